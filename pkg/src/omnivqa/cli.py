"""Command-line pipeline: features, pooling, training, evaluation and studies.

Every command writes into its ``--out`` directory only, together with
``config.json`` holding the fully resolved configuration.  A JSON run
configuration (``--config``) supplies defaults; flags override it.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import OmniVQAError

log = logging.getLogger("omnivqa")

DEFAULT_CONFIG = {
    "geometry": {"mode": "vp", "pattern": "uniform", "fov_deg": 40.0, "vp_size": None},
    "features": ["SA", "PSNR_HVS", "PSNR_HVS_M", "MS_SSIM", "GMSD", "R_TI", "T_GMSD"],
    "pooling": {"kind": "hvs", "alpha": 0.03, "beta": 0.2, "tau": None, "p": 2.0,
                "k_percent": 10.0, "normalize": True},
    "model": {"kind": "rfr", "grid": None, "hyperparams": None, "seed": 0,
              "n_repeats": 10, "split_fraction": 0.2},
    "cv": {"repeats": 1000, "fraction": 0.2, "seed": 0},
    "sffs": {"max_features": None},
    "sweep": {"patterns": ["tropical", "uniform"], "fovs": [30.0, 40.0, 50.0],
              "modes": ["collage", "vp"]},
    "jobs": None,
}


class UsageError(Exception):
    """Bad flag combination detected after parsing (exit code 2)."""


# ---- configuration ---------------------------------------------------------------

def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in out:
            raise UsageError(f"unknown configuration key {k!r}")
        if isinstance(out[k], dict) and isinstance(v, dict):
            for kk in v:
                if kk not in out[k]:
                    raise UsageError(f"unknown configuration key {k}.{kk}")
            out[k].update(copy.deepcopy(v))
        else:
            out[k] = copy.deepcopy(v)
    return out


def _set(cfg: dict, section: str, key: str, value):
    if value is not None:
        cfg[section][key] = value


def resolve_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            cfg = _merge(cfg, json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: {exc}") from exc
    g = cfg["geometry"]
    for key, attr in (("mode", "mode"), ("pattern", "pattern"), ("fov_deg", "fov")):
        if getattr(args, attr, None) is not None:
            g[key] = getattr(args, attr)
    if getattr(args, "vp_size", None) is not None:
        g["vp_size"] = list(args.vp_size)
    if getattr(args, "features", None):
        cfg["features"] = [f.strip() for f in args.features.split(",") if f.strip()]
    p = cfg["pooling"]
    _set(cfg, "pooling", "kind", getattr(args, "pooling", None))
    for key in ("alpha", "beta", "tau", "p", "k_percent"):
        _set(cfg, "pooling", key, getattr(args, key, None))
    if getattr(args, "literal_frame_count", False):
        p["normalize"] = False
    m = cfg["model"]
    _set(cfg, "model", "kind", getattr(args, "kind", None))
    _set(cfg, "model", "seed", getattr(args, "seed", None))
    _set(cfg, "model", "n_repeats", getattr(args, "tune_repeats", None))
    _set(cfg, "model", "split_fraction", getattr(args, "tune_fraction", None))
    if getattr(args, "grid", None):
        m["grid"] = json.loads(Path(args.grid).read_text())
    if getattr(args, "params", None):
        m["hyperparams"] = json.loads(args.params)
    _set(cfg, "cv", "repeats", getattr(args, "repeats", None))
    _set(cfg, "cv", "fraction", getattr(args, "fraction", None))
    if getattr(args, "seed", None) is not None:
        cfg["cv"]["seed"] = args.seed
    _set(cfg, "sffs", "max_features", getattr(args, "max_features", None))
    if getattr(args, "patterns", None):
        cfg["sweep"]["patterns"] = args.patterns.split(",")
    if getattr(args, "fovs", None):
        cfg["sweep"]["fovs"] = [float(v) for v in args.fovs.split(",")]
    if getattr(args, "jobs", None) is not None:
        cfg["jobs"] = args.jobs
    return cfg


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _out_dir(args, cfg: dict, command: str) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs = {k: str(v) for k, v in sorted(vars(args).items())
              if k in ("manifest", "cache", "table", "model", "predictions", "split",
                       "train_table", "test_table") and v is not None}
    _dump_json(out / "config.json", {"command": command, "inputs": inputs, "config": cfg,
                                     "version": __version__})
    return out


def _jobs(cfg: dict) -> int:
    j = cfg.get("jobs")
    return int(j) if j else (os.cpu_count() or 1)


# ---- helpers ---------------------------------------------------------------------

def _pattern_for(cfg: dict, manifest, mode: str, pattern=None, fov=None):
    from .geometry import default_viewport_size, make_pattern

    if mode == "projection":
        return None
    g = cfg["geometry"]
    pattern = pattern or g["pattern"]
    fov = float(fov if fov is not None else g["fov_deg"])
    size = g["vp_size"]
    if size is None:
        widths = {v.width for v in manifest if v.width}
        if not widths:
            raise UsageError("manifest lacks widths; pass --vp-size")
        size = default_viewport_size(fov, max(widths))
    return make_pattern(pattern, fov, size)


def _one_video(entry, pattern, mode, features, out_dir):
    from .dataset import compute_features, write_feature_cache

    tensor = compute_features(entry, pattern, mode, features)
    write_feature_cache(tensor, out_dir)
    return entry.video_id


def _extract(manifest, pattern, mode, features, out_dir, jobs):
    work = list(manifest)
    if jobs == 1 or len(work) < 2:
        for e in work:
            _one_video(e, pattern, mode, features, out_dir)
            log.info("features: %s", e.video_id)
        return
    from joblib import Parallel, delayed

    Parallel(n_jobs=min(jobs, len(work)))(
        delayed(_one_video)(e, pattern, mode, features, out_dir) for e in work)


def _pooling(cfg):
    from .pooling import PoolingConfig

    return PoolingConfig.from_dict(cfg["pooling"])


def _experiment(cfg):
    from .evaluation.harness import ExperimentConfig

    m = cfg["model"]
    return ExperimentConfig(kind=m["kind"], grid=m["grid"], n_repeats=m["n_repeats"],
                            split_fraction=m["split_fraction"], seed=m["seed"],
                            hyperparams=m["hyperparams"])


def _require_targets(data, what="table"):
    if np.any(np.isnan(data.y)):
        missing = [v for v, y in zip(data.video_ids, data.y) if math.isnan(y)][:5]
        from .errors import MissingFieldError
        raise MissingFieldError(f"{what} lacks dmos for {missing}")


def _baseline_columns(data, names):
    out = {}
    for name in names or []:
        if name not in data.feature_names:
            raise UsageError(f"column {name!r} not in table")
        out[name] = data.X[:, data.feature_names.index(name)]
    return out


def _fmt(v) -> str:
    return format(float(v), ".17g")


# ---- commands ----------------------------------------------------------------------

def cmd_features(args) -> None:
    from .dataset import feature_provenance, load_manifest, normalize_mode
    from .metrics import parse_features

    cfg = resolve_config(args)
    mode = normalize_mode(cfg["geometry"]["mode"])
    cfg["geometry"]["mode"] = mode
    manifest = load_manifest(args.manifest)
    pattern = _pattern_for(cfg, manifest, mode)
    if pattern is not None:
        cfg["geometry"]["vp_size"] = [pattern.specs[0].width, pattern.specs[0].height]
    features = parse_features(cfg["features"])
    out = _out_dir(args, cfg, "features")
    _extract(manifest, pattern, mode, features, out, _jobs(cfg))
    _dump_json(out / "provenance.json", feature_provenance(mode, pattern, features))


def cmd_pool(args) -> None:
    from .dataset import load_manifest, pool_cache_dir, write_pooled_table

    cfg = resolve_config(args)
    manifest = load_manifest(args.manifest, check_paths=False)
    expected = None
    prov = Path(args.cache) / "provenance.json"
    if prov.exists():
        expected = json.loads(prov.read_text())
    data = pool_cache_dir(manifest, args.cache, _pooling(cfg), expected)
    out = _out_dir(args, cfg, "pool")
    write_pooled_table(out / "pooled.csv", data)


def _train_rows(args, data):
    if not args.split:
        return data
    from .evaluation import read_split_file

    train_ids, _ = read_split_file(args.split)
    return data.select_ids(train_ids)


def cmd_train(args) -> None:
    from .dataset import read_pooled_table
    from .evaluation.harness import fit_and_tune

    cfg = resolve_config(args)
    data = _train_rows(args, read_pooled_table(args.table))
    _require_targets(data)
    model, params, table = fit_and_tune(data, _experiment(cfg))
    out = _out_dir(args, cfg, "train")
    model.save(out / "model.json")
    _dump_json(out / "tuning.json", {"best": params, "grid": table})


def cmd_predict(args) -> None:
    from .dataset import read_pooled_table
    from .regression import QualityModel

    cfg = resolve_config(args)
    model = QualityModel.load(args.model)
    data = read_pooled_table(args.table)
    pred = model.predict(data)
    out = _out_dir(args, cfg, "predict")
    with open(out / "predictions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["video_id", "group_id", "dmos", "prediction"])
        for vid, g, y, p in zip(data.video_ids, data.groups, data.y, pred):
            w.writerow([vid, g, "" if math.isnan(y) else _fmt(y), _fmt(p)])


def _read_scores(args):
    """Return (video_ids, scores, dmos) from a predictions file or a table column."""
    if args.predictions:
        with open(args.predictions, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "prediction" not in rows[0] or "dmos" not in rows[0]:
            raise UsageError("predictions file needs video_id, dmos and prediction columns")
        ids = [r["video_id"] for r in rows]
        scores = np.array([float(r["prediction"]) for r in rows])
        dmos = np.array([float(r["dmos"]) if r["dmos"] else math.nan for r in rows])
        return ids, scores, dmos
    from .dataset import read_pooled_table

    data = read_pooled_table(args.table)
    if args.column not in data.feature_names:
        raise UsageError(f"column {args.column!r} not in table")
    return data.video_ids, data.X[:, data.feature_names.index(args.column)], data.y


def cmd_evaluate(args) -> None:
    from .errors import MissingFieldError
    from .evaluation import evaluate, fit_logistic4, read_split_file

    if bool(args.predictions) == bool(args.table):
        raise UsageError("give exactly one of --predictions or --table/--column")
    if args.table and not args.column:
        raise UsageError("--table needs --column")
    cfg = resolve_config(args)
    ids, scores, dmos = _read_scores(args)
    pos = {v: i for i, v in enumerate(ids)}
    if args.split:
        train_ids, test_ids = read_split_file(args.split)
        tr = [pos[v] for v in train_ids if v in pos]
        te = [pos[v] for v in test_ids if v in pos]
        descriptor = f"split:{Path(args.split).name}"
    else:
        tr = te = list(range(len(ids)))
        descriptor = "all"
    if np.any(np.isnan(dmos[te])) or (args.logistic_fit and np.any(np.isnan(dmos[tr]))):
        raise MissingFieldError("dmos missing for evaluated videos")
    report = {"source": args.column or "prediction", "logistic": None}
    mapped = scores[te]
    if args.logistic_fit:
        params = fit_logistic4(scores[tr], dmos[tr])
        mapped = params(scores[te])
        report["logistic"] = params.to_dict()
    report["report"] = evaluate(mapped, dmos[te], descriptor).to_dict()
    out = _out_dir(args, cfg, "evaluate")
    _dump_json(out / "report.json", report)


def cmd_cv(args) -> None:
    from .dataset import read_pooled_table
    from .evaluation.harness import run_repeated_cv, write_cv_distribution_csv

    cfg = resolve_config(args)
    data = read_pooled_table(args.table)
    _require_targets(data)
    c, m = cfg["cv"], cfg["model"]
    report = run_repeated_cv(data, c["repeats"], c["fraction"], c["seed"], m["kind"],
                             m["hyperparams"], _baseline_columns(data, args.baseline),
                             n_jobs=_jobs(cfg))
    out = _out_dir(args, cfg, "cv")
    _dump_json(out / "cv_report.json", report.to_dict())
    write_cv_distribution_csv(out / "cv_distribution.csv", report)


def cmd_sffs(args) -> None:
    from .dataset import read_pooled_table
    from .regression import sffs

    cfg = resolve_config(args)
    data = read_pooled_table(args.table)
    _require_targets(data)
    m = cfg["model"]
    selected, scores = sffs(data, cfg["sffs"]["max_features"], m["kind"], m["hyperparams"],
                            m["n_repeats"], m["split_fraction"], m["seed"])
    out = _out_dir(args, cfg, "sffs")
    steps = [{"step": i + 1, "added": f.name, "selected": [s.name for s in selected[:i + 1]],
              "mean_plcc": s} for i, (f, s) in enumerate(zip(selected, scores))]
    _dump_json(out / "sffs.json", {"steps": steps})


def _sweep_rows(data, domain, pattern, fov, features):
    """Per-feature logistic-mapped criteria; viewport columns are averaged."""
    from .errors import DegenerateInputError, ZeroVarianceError
    from .evaluation import evaluate, fit_logistic4
    from .regression import column_feature

    rows = []
    for fid in features:
        cols = [i for i, n in enumerate(data.feature_names) if column_feature(n) is fid]
        score = data.X[:, cols].mean(axis=1)
        try:
            params = fit_logistic4(score, data.y)
            r = evaluate(params(score), data.y, domain)
            vals = (r.plcc, r.srocc, r.rmse)
        except (DegenerateInputError, ZeroVarianceError):
            vals = (math.nan, math.nan, math.nan)
        rows.append([domain, pattern, fov, fid.name, *vals])
    return rows


def cmd_sweep(args) -> None:
    from .dataset import load_manifest, pool_cache_dir
    from .metrics import ERP_ONLY_FEATURES, parse_features

    cfg = resolve_config(args)
    manifest = load_manifest(args.manifest, require_dmos=True)
    features = parse_features(cfg["features"])
    viewport_features = [f for f in features if f not in ERP_ONLY_FEATURES]
    out = _out_dir(args, cfg, "sweep")
    pooling = _pooling(cfg)
    jobs = _jobs(cfg)
    rows = []
    runs = [("projection", None, None)]
    for mode in cfg["sweep"]["modes"]:
        for pat in cfg["sweep"]["patterns"]:
            for fov in cfg["sweep"]["fovs"]:
                runs.append((mode, pat, float(fov)))
    for mode, pat, fov in runs:
        pattern = _pattern_for(cfg, manifest, mode, pat, fov)
        feats = features if mode == "projection" else viewport_features
        tag = mode if pattern is None else f"{mode}_{pat}_{fov:g}"
        cache = out / "cache" / tag
        cache.mkdir(parents=True, exist_ok=True)
        _extract(manifest, pattern, mode, feats, cache, jobs)
        data = pool_cache_dir(manifest, cache, pooling)
        rows += _sweep_rows(data, mode, pat or "", "" if fov is None else fov, feats)
        log.info("sweep: %s done", tag)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["domain", "pattern", "fov_deg", "feature", "plcc", "srocc", "rmse"])
        for r in rows:
            w.writerow([*r[:3], r[3], *(_fmt(v) for v in r[4:])])


def cmd_fixed(args) -> None:
    from .dataset import read_pooled_table
    from .evaluation import read_split_file
    from .evaluation.harness import run_fixed_split, write_reports_json

    cfg = resolve_config(args)
    data = read_pooled_table(args.table)
    _require_targets(data)
    train_ids, test_ids = read_split_file(args.split)
    reports = run_fixed_split(data, train_ids, test_ids, _experiment(cfg),
                              _baseline_columns(data, args.baseline))
    out = _out_dir(args, cfg, "fixed")
    write_reports_json(out / "fixed_report.json", reports)


def cmd_cross(args) -> None:
    from .dataset import read_pooled_table
    from .evaluation.harness import run_cross_dataset, write_reports_json

    cfg = resolve_config(args)
    train = read_pooled_table(args.train_table)
    test = read_pooled_table(args.test_table)
    _require_targets(train, "train table")
    _require_targets(test, "test table")
    report = run_cross_dataset(train, test, _experiment(cfg))
    out = _out_dir(args, cfg, "cross")
    write_reports_json(out / "cross_report.json", {f"ours_{cfg['model']['kind']}": report})


def cmd_synth(args) -> None:
    from .synthetic import make_dataset

    cfg = resolve_config(args)
    out = _out_dir(args, cfg, "synth")
    make_dataset(out, n_contents=args.contents, levels=args.levels, n_frames=args.frames,
                 width=args.width, seed=args.seed if args.seed is not None else 0,
                 noise_sigma=args.noise)


# ---- parser --------------------------------------------------------------------------

def _add_common(p, out_help="output directory"):
    p.add_argument("--out", required=True, help=out_help)
    p.add_argument("--config", help="JSON run configuration; flags override its values")


def _add_geometry(p):
    p.add_argument("--mode", choices=["projection", "collage", "vp"],
                   help="computation domain (default: vp)")
    p.add_argument("--pattern", choices=["uniform", "tropical", "equatorial"],
                   help="viewport sampling pattern (default: uniform)")
    p.add_argument("--fov", type=float, help="viewport field of view in degrees (default: 40)")
    p.add_argument("--vp-size", type=int, nargs=2, metavar=("W", "H"),
                   help="viewport size in pixels (default: matches ERP angular density)")
    p.add_argument("--features", help="comma-separated feature names")
    p.add_argument("--jobs", type=int, help="parallel workers across videos (default: all cores)")


def _add_pooling(p):
    p.add_argument("--pooling", choices=["hvs", "mean", "minkowski", "percentile"],
                   help="temporal pooling kind (default: hvs)")
    p.add_argument("--alpha", type=float, help="smoothing gain for falling values")
    p.add_argument("--beta", type=float, help="smoothing gain for rising values")
    p.add_argument("--tau", type=float, help="recency time constant in frames (default: F/3)")
    p.add_argument("--p", type=float, help="Minkowski order")
    p.add_argument("--k-percent", type=float, help="percentile pooling fraction in percent")
    p.add_argument("--literal-frame-count", action="store_true",
                   help="divide recency-weighted sums by F instead of the weight sum")


def _add_model(p, tuning=True):
    p.add_argument("--kind", choices=["rfr", "gbr", "svr"], help="regressor (default: rfr)")
    p.add_argument("--seed", type=int, help="random seed (default: 0)")
    p.add_argument("--params", help="fixed hyper-parameters as JSON; skips tuning")
    if tuning:
        p.add_argument("--grid", help="JSON file with the hyper-parameter grid")
        p.add_argument("--tune-repeats", type=int, help="grouped splits per grid point")
        p.add_argument("--tune-fraction", type=float, help="validation fraction during tuning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnivqa", description="Viewport-based quality estimation for 360-degree video.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("features", help="render viewports and write feature caches")
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    _add_common(p)
    _add_geometry(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("pool", help="pool cached features into a per-video table")
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    p.add_argument("--cache", required=True, help="directory written by 'features'")
    _add_common(p)
    _add_pooling(p)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("train", help="tune and train a regressor on a pooled table")
    p.add_argument("--table", required=True, help="pooled feature table (CSV)")
    p.add_argument("--split", help="split file; only its [train] ids are used")
    _add_common(p)
    _add_model(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict DMOS for every row of a pooled table")
    p.add_argument("--model", required=True, help="model file written by 'train'")
    p.add_argument("--table", required=True, help="pooled feature table (CSV)")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="PLCC, SROCC and RMSE against DMOS")
    p.add_argument("--predictions", help="predictions CSV written by 'predict'")
    p.add_argument("--table", help="pooled table holding a raw metric column")
    p.add_argument("--column", help="raw metric column of --table")
    p.add_argument("--logistic-fit", action="store_true",
                   help="map scores with a fitted 4-parameter logistic first")
    p.add_argument("--split", help="fit the logistic on [train] ids, report on [test] ids")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="repeated grouped train/test evaluation")
    p.add_argument("--table", required=True, help="pooled feature table (CSV)")
    p.add_argument("--repeats", type=int, help="number of random splits (default: 1000)")
    p.add_argument("--fraction", type=float, help="test fraction of groups (default: 0.2)")
    p.add_argument("--baseline", action="append", metavar="COLUMN",
                   help="raw metric column evaluated alongside (repeatable)")
    p.add_argument("--jobs", type=int, help="parallel workers across repeats")
    _add_common(p)
    _add_model(p, tuning=False)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("sffs", help="sequential forward feature selection trace")
    p.add_argument("--table", required=True, help="pooled feature table (CSV)")
    p.add_argument("--max-features", type=int, help="stop after this many feature ids")
    p.add_argument("--tune-repeats", type=int, help="grouped splits per candidate")
    p.add_argument("--tune-fraction", type=float, help="validation fraction per split")
    _add_common(p)
    _add_model(p, tuning=False)
    p.set_defaults(func=cmd_sffs)

    p = sub.add_parser("sweep", help="individual-metric results per pattern and FoV")
    p.add_argument("--manifest", required=True, help="dataset manifest with dmos (JSON)")
    p.add_argument("--patterns", help="comma-separated patterns")
    p.add_argument("--fovs", help="comma-separated fields of view in degrees")
    p.add_argument("--vp-size", type=int, nargs=2, metavar=("W", "H"),
                   help="viewport size in pixels (default: matches ERP angular density)")
    p.add_argument("--features", help="comma-separated feature names")
    p.add_argument("--jobs", type=int, help="parallel workers across videos")
    _add_common(p)
    _add_pooling(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixed", help="fixed-split experiment with optional baselines")
    p.add_argument("--table", required=True, help="pooled feature table (CSV)")
    p.add_argument("--split", required=True, help="split file with [train] and [test] ids")
    p.add_argument("--baseline", action="append", metavar="COLUMN",
                   help="raw metric column evaluated alongside (repeatable)")
    _add_common(p)
    _add_model(p)
    p.set_defaults(func=cmd_fixed)

    p = sub.add_parser("cross", help="train on one table, evaluate on another")
    p.add_argument("--train-table", required=True, help="pooled table used for training")
    p.add_argument("--test-table", required=True, help="pooled table used for testing")
    _add_common(p)
    _add_model(p)
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("synth", help="write a synthetic dataset with known DMOS")
    p.add_argument("--contents", type=int, default=12, help="source contents (default: 12)")
    p.add_argument("--levels", type=int, default=1, help="distortions per content (default: 1)")
    p.add_argument("--frames", type=int, default=6, help="frames per video (default: 6)")
    p.add_argument("--width", type=int, default=128, help="ERP width in pixels (default: 128)")
    p.add_argument("--noise", type=float, default=2.0, help="DMOS noise std (default: 2)")
    p.add_argument("--seed", type=int, help="random seed (default: 0)")
    _add_common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except OmniVQAError as exc:
        print(f"error: {exc.code}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: invalid-input: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io-error: {_one_line(exc)}", file=sys.stderr)
        return 1
    return 0


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
