"""Acceptance criteria, one or more tests per criterion.

Each test registers its criterion line through the ``criterion`` fixture;
the terminal summary prints one PASS/FAIL/SKIP line per entry.
"""

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from omnivqa import regression
from omnivqa.cli import main as cli_main
from omnivqa.dataset import (compute_features, load_manifest, pool_cache_dir, read_feature_cache,
                             write_feature_cache)
from omnivqa.dataset.features import compute_tensor
from omnivqa.evaluation import grouped_shuffle_split, plcc, rmse, srocc, write_split_file
from omnivqa.evaluation.harness import ExperimentConfig, run_fixed_split
from omnivqa.geometry import (Direction, ViewportSpec, direction_to_viewport_pixel,
                              make_pattern, render_viewport, viewport_pixel_to_direction)
from omnivqa.metrics import ERP_ONLY_FEATURES, FeatureId, ideal_value
from omnivqa.metrics.spatial import gmsd, psnr, spatial_activity, ssim
from omnivqa.metrics.temporal import temporal_gmsd, temporal_information
from omnivqa.pooling import (POOLING_KINDS, PoolingConfig, hvs_pool, minkowski_pool,
                             pool_series, pool_tensor)
from omnivqa.regression import QualityModel, TrainingSet, sffs
from omnivqa.synthetic import (apply_distortion, as_luma, ladder, make_content, make_dataset,
                               quantize)

PUBLISHED_FIXED_PLCC = 0.9293
PUBLISHED_CV_PLCC = 0.86778
PUBLISHED_CROSS_PLCC = 0.95644
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


# ---- 1: identity suite ---------------------------------------------------------------

def test_c1_identity_suite(criterion):
    criterion(1, "identity: all features ideal for dist=ref, 20 videos x 3 modes, < 60 s")
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    all_features = list(FeatureId)
    vp_features = [f for f in all_features if f not in ERP_ONLY_FEATURES]
    kinds = ["uniform", "tropical", "equatorial"]
    for k in range(20):
        frames = quantize(make_content(int(rng.integers(2 ** 31)), 3, 64))
        pattern = make_pattern(kinds[k % 3], float(rng.uniform(30, 90)), (12, 12))
        for mode, feats in (("projection", all_features), ("collage", vp_features),
                            ("vp", vp_features)):
            t = compute_tensor(as_luma(frames), as_luma(frames), mode, pattern, feats)
            for m, fid in enumerate(feats):
                ideal = ideal_value(fid)
                if fid.name.startswith(("PSNR", "WS_", "S_")):
                    assert np.all(t[:, :, m] == ideal), (k, mode, fid)
                else:
                    np.testing.assert_allclose(t[:, :, m], ideal, rtol=0, atol=1e-9,
                                               err_msg=f"{k} {mode} {fid.name}")
    assert time.perf_counter() - start < 60.0


# ---- 2: closed-form PSNR -------------------------------------------------------------

def test_c2_psnr_closed_form(criterion):
    criterion(2, "PSNR of a +1 uniform offset is 48.130804 dB +- 1e-6")
    a = np.random.default_rng(2).integers(0, 255, (32, 64)).astype(float)
    assert abs(psnr(a, a + 1) - 48.130804) <= 1e-6
    assert abs(10 * math.log10(255 ** 2) - 48.130804) <= 1e-6


# ---- 3: geometry ---------------------------------------------------------------------

def test_c3_geometry(criterion):
    criterion(3, "gnomonic round trip < 1e-9 px; 25/16/9 viewports; constant ERP stays constant")
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10):
        fov = float(rng.uniform(0.2, 2.8))
        spec = ViewportSpec(Direction(float(rng.uniform(-math.pi, math.pi)),
                                      float(rng.uniform(-1.5, 1.5))),
                            fov, float(rng.uniform(0.2, 2.8)),
                            int(rng.integers(16, 2000)), int(rng.integers(16, 2000)))
        for px in np.linspace(0, spec.width - 1, 64):
            for py in np.linspace(0, spec.height - 1, 64):
                qx, qy = direction_to_viewport_pixel(spec, viewport_pixel_to_direction(spec, px, py))
                worst = max(worst, abs(qx - px), abs(qy - py))
    assert worst < 1e-9
    assert [len(make_pattern(k, 40, (512, 512))) for k in ("uniform", "tropical", "equatorial")] \
        == [25, 16, 9]
    erp = np.full((90, 180), 123.0)
    for spec in make_pattern("uniform", 40, (24, 24)).specs:
        assert np.all(render_viewport(erp, spec) == 123.0)


# ---- 4: metric oracles ---------------------------------------------------------------

def test_c4_metric_oracles(criterion):
    criterion(4, "SA, GMSD, SSIM, TI, T-GMSD (1e-9) and PLCC, SROCC, RMSE (1e-12) match oracles")
    rng = np.random.default_rng(4)
    for _ in range(20):
        h, w = (int(v) for v in rng.integers(11, 18, 2))
        a = rng.uniform(0, 255, (h, w))
        b = np.clip(a + rng.normal(0, rng.uniform(2, 40), (h, w)), 0, 255)
        a0, b0 = rng.uniform(0, 255, (2, h, w))
        assert abs(spatial_activity(a, b) - oracles.spatial_activity(a, b)) <= 1e-9
        assert abs(gmsd(a, b) - oracles.gmsd(a, b)) <= 1e-9
        assert abs(ssim(a, b) - oracles.ssim(a, b)) <= 1e-9
        assert abs(temporal_information(a, a0) - oracles.temporal_information(a, a0)) <= 1e-9
        assert abs(temporal_gmsd(a, a0, b, b0) - oracles.gmsd(a - a0, b - b0)) <= 1e-9
        n = int(rng.integers(5, 60))
        x = rng.normal(size=n)
        y = x + rng.normal(size=n)
        yt = np.round(y)  # ties for the ranking oracle
        assert abs(plcc(x, y) - oracles.pearson(x, y)) <= 1e-12
        assert abs(srocc(x, yt) - oracles.spearman(x, yt)) <= 1e-12
        assert abs(rmse(x, y) - oracles.rmse(x, y)) <= 1e-12


# ---- 5: pooling ----------------------------------------------------------------------

def test_c5_pooling(criterion):
    criterion(5, "hvs_pool hand example exact; constants preserved (1e-12); Minkowski monotone in p")
    w = np.array([math.exp(-2), math.exp(-1), 1.0])
    expected = (1.0 * w[0] + 0.97 * w[1] + 0.9409 * w[2]) / w.sum()
    got = hvs_pool([1.0, 0.0, 0.0], PoolingConfig(alpha=0.03, beta=0.2, tau=1.0))
    assert got == pytest.approx(expected, rel=0, abs=1e-15)
    assert got == oracles.hvs_pool([1.0, 0.0, 0.0], 0.03, 0.2, 1.0)
    for kind in POOLING_KINDS:
        for c in (0.0, 0.5, 3.0, 250.0):
            for n in (1, 2, 7, 30):
                assert abs(pool_series([c] * n, PoolingConfig(kind=kind)) - c) <= 1e-12
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = rng.uniform(0, 50, int(rng.integers(1, 40)))
        vals = [minkowski_pool(q, p) for p in (1.0, 1.5, 2.0, 3.0, 4.0, 8.0)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# ---- 6 and 7: learning sanity and monotonicity -------------------------------------

SYN_PATTERN = ("equatorial", 60.0, (21, 21))
SYN_GRID = {"n_estimators": [100], "max_depth": [8, None], "max_features": ["sqrt", "third"]}


def _cache_dataset(manifest, cache_dir, pattern):
    for entry in manifest:
        write_feature_cache(compute_features(entry, pattern, "vp"), cache_dir)
    return pool_cache_dir(manifest, cache_dir, PoolingConfig())


@pytest.fixture(scope="module")
def synthetic_study(tmp_path_factory):
    root = tmp_path_factory.mktemp("c6")
    start = time.perf_counter()
    manifest = make_dataset(root / "data", n_contents=30, levels=3, n_frames=6, width=128,
                            seed=0, noise_sigma=2.0)
    pattern = make_pattern(*SYN_PATTERN)
    data = _cache_dataset(manifest, root / "cache", pattern)
    tr, te = grouped_shuffle_split(data.groups, 0.2, seed=0)
    cfg = ExperimentConfig(kind="rfr", grid=SYN_GRID, n_repeats=5, split_fraction=0.2, seed=0)
    train_ids = [data.video_ids[i] for i in tr]
    test_ids = [data.video_ids[i] for i in te]
    reports = run_fixed_split(data, train_ids, test_ids, cfg)
    selected, scores = sffs(data.subset(tr), 1, "rfr", {"n_estimators": 50}, n_repeats=5)
    model = regression.train(data.subset(tr), "rfr", reports["_params"], seed=0)
    return dict(root=root, data=data, reports=reports, selected=selected, scores=scores,
                model=model, pattern=pattern, elapsed=time.perf_counter() - start)


def test_c6_learning_plcc(criterion, synthetic_study):
    criterion(6, "synthetic 30x3 pipeline: grouped test PLCC >= 0.90, < 5 min")
    rep = synthetic_study["reports"]["ours_rfr"]
    print(f"test PLCC {rep.plcc:.4f} SROCC {rep.srocc:.4f} RMSE {rep.rmse:.3f} "
          f"({synthetic_study['elapsed']:.1f} s)")
    assert rep.plcc >= 0.90
    assert synthetic_study["elapsed"] < 300


def test_c6_sffs_first_pick(criterion, synthetic_study):
    criterion(6, "synthetic 30x3 pipeline: SFFS selects GMSD or R-TI first")
    first = synthetic_study["selected"][0]
    print(f"SFFS first pick {first.name} (mean PLCC {synthetic_study['scores'][0]:.4f})")
    assert first in (FeatureId.GMSD, FeatureId.R_TI)


def test_c7_ladder_monotone(criterion, synthetic_study):
    criterion(7, "predictions strictly monotone on 5-step noise/blur ladders, >= 90% of contents")
    model, pattern = synthetic_study["model"], synthetic_study["pattern"]
    features = [regression.column_feature(c) for c in model.feature_layout if c.startswith("v0_")]
    rng = np.random.default_rng(7)
    outcomes = []
    for c in range(10):
        ref = quantize(make_content(10_000 + int(rng.integers(2 ** 20)), 6, 128))
        for kind in ("noise", "blur"):
            rows = []
            for d in ladder(kind, 5):
                dist = apply_distortion(ref, d, seed=int(rng.integers(2 ** 31)))
                t = compute_tensor(as_luma(ref), as_luma(dist), "vp", pattern, features)
                rows.append(pool_tensor(t, PoolingConfig()))
            pred = model.predict(np.array(rows))
            outcomes.append(bool(np.all(np.diff(pred) > 0)))
    rate = sum(outcomes) / len(outcomes)
    print(f"strictly monotone ladders: {sum(outcomes)}/{len(outcomes)}")
    assert rate >= 0.9


# ---- 8: protocol fidelity ----------------------------------------------------------

def test_c8_splits_never_straddle(criterion):
    criterion(8, "grouped splits never straddle a group over 1000 seeds")
    rng = np.random.default_rng(8)
    groups = np.array([f"src{int(g)}" for g in rng.integers(0, 60, 540)])
    for seed in range(1000):
        tr, te = grouped_shuffle_split(groups, 0.2, seed=seed)
        assert not set(groups[tr]) & set(groups[te])
        assert len(tr) + len(te) == len(groups)


class AccessCounter:
    """Wraps train/predict and records every row the learner reads."""

    def __init__(self, monkeypatch):
        self.train_ids: list = []
        self.predict_rows: list = []
        real_train = regression.train
        real_predict = QualityModel.predict

        def spy_train(data, *args, **kwargs):
            self.train_ids.append(list(data.video_ids))
            return real_train(data, *args, **kwargs)

        def spy_predict(model, features):
            X = features.X if isinstance(features, TrainingSet) else np.atleast_2d(features)
            self.predict_rows.append(np.array(X, copy=True))
            return real_predict(model, features)

        monkeypatch.setattr(regression, "train", spy_train)
        monkeypatch.setattr(QualityModel, "predict", spy_predict)

    def touched(self, ids, rows) -> int:
        ids = set(ids)
        n = sum(1 for call in self.train_ids for v in call if v in ids)
        keys = {r.tobytes() for r in rows}
        n += sum(1 for call in self.predict_rows for r in call if r.tobytes() in keys)
        return n


def _unique_rows_set(n_groups=12, per=3, seed=0):
    rng = np.random.default_rng(seed)
    n = n_groups * per
    X = rng.uniform(0, 1, (n, 3))
    y = 10 * X[:, 0] + rng.normal(0, 0.1, n)
    return TrainingSet([f"v{i}" for i in range(n)], [f"g{i // per}" for i in range(n)], X, y,
                       regression.layout_columns(1, ["SA", "GMSD", "R_TI"]))


def test_c8_tuning_reads_only_train_rows(criterion, monkeypatch):
    criterion(8, "tuning reads only train rows (access-counting test double)")
    data = _unique_rows_set()
    tr, te = grouped_shuffle_split(data.groups, 0.25, seed=3)
    train_ids = [data.video_ids[i] for i in tr]
    test_ids = [data.video_ids[i] for i in te]
    spy = AccessCounter(monkeypatch)
    cfg = ExperimentConfig(grid={"n_estimators": [5, 10]}, n_repeats=3)
    run_fixed_split(data, train_ids, test_ids, cfg)
    # tuning: 2 grid points x 3 repeats; then one final fit
    assert len(spy.train_ids) == 7
    tuning_calls = spy.train_ids[:-1]
    assert all(set(c) <= set(train_ids) for c in tuning_calls)
    assert sum(len(c) for c in spy.train_ids) > 0
    test_rows = [data.X[i] for i in te]
    tuning_predicts = spy.predict_rows[:-1]
    assert len(tuning_predicts) == 6
    assert not any(r.tobytes() in {t.tobytes() for t in test_rows}
                   for call in tuning_predicts for r in call)
    # the final test-set prediction is the only access to test rows
    assert {r.tobytes() for r in spy.predict_rows[-1]} == {t.tobytes() for t in test_rows}
    assert spy.touched(test_ids, test_rows) == len(test_rows)


def test_c8_spy_detects_leakage(monkeypatch):
    """Positive control: tuning on all rows is reported as touching test rows."""
    data = _unique_rows_set()
    tr, te = grouped_shuffle_split(data.groups, 0.25, seed=3)
    spy = AccessCounter(monkeypatch)
    regression.tune_hyperparams(data, "rfr", {"n_estimators": [5]}, n_repeats=3)
    assert spy.touched([data.video_ids[i] for i in te], [data.X[i] for i in te]) > 0


# ---- 9: published numbers (conditional on the real datasets) --------------------------

def _dataset_dir(var):
    d = os.environ.get(var)
    if not d or not (Path(d) / "manifest.json").exists():
        pytest.skip(f"set {var} to a directory with manifest.json to run")
    return Path(d)


@pytest.fixture(scope="module")
def vqa_odv_table(tmp_path_factory):
    d = _dataset_dir("OMNIVQA_VQA_ODV")
    out = tmp_path_factory.mktemp("vqa_odv")
    cfg = CONFIGS / "vqa_odv.json"
    assert cli_main(["features", "--manifest", str(d / "manifest.json"), "--config", str(cfg),
                     "--out", str(out / "feats")]) == 0
    assert cli_main(["pool", "--manifest", str(d / "manifest.json"), "--cache",
                     str(out / "feats"), "--config", str(cfg), "--out", str(out / "pooled")]) == 0
    return d, out, cfg


def test_c9_fixed_split(criterion, request):
    criterion(9, f"VQA-ODV fixed split PLCC {PUBLISHED_FIXED_PLCC} +- 0.03 (needs dataset)")
    d, out, cfg = request.getfixturevalue("vqa_odv_table")
    split = d / "split.txt"
    if not split.exists():
        pytest.skip("split.txt with the published partition not present")
    table = out / "pooled" / "pooled.csv"
    assert cli_main(["train", "--table", str(table), "--split", str(split), "--config", str(cfg),
                     "--out", str(out / "model")]) == 0
    assert cli_main(["predict", "--model", str(out / "model" / "model.json"), "--table",
                     str(table), "--out", str(out / "pred")]) == 0
    assert cli_main(["evaluate", "--predictions", str(out / "pred" / "predictions.csv"),
                     "--split", str(split), "--out", str(out / "eval")]) == 0
    rep = json.loads((out / "eval" / "report.json").read_text())["report"]
    print(f"fixed split PLCC {rep['plcc']:.4f} SROCC {rep['srocc']:.4f} RMSE {rep['rmse']:.3f}")
    assert abs(rep["plcc"] - PUBLISHED_FIXED_PLCC) <= 0.03


def test_c9_repeated_cv(criterion, request):
    criterion(9, f"VQA-ODV repeated-CV mean PLCC {PUBLISHED_CV_PLCC} +- 0.03 (needs dataset)")
    _, out, cfg = request.getfixturevalue("vqa_odv_table")
    assert cli_main(["cv", "--table", str(out / "pooled" / "pooled.csv"), "--config", str(cfg),
                     "--out", str(out / "cv")]) == 0
    mean = json.loads((out / "cv" / "cv_report.json").read_text())["mean"]["ours_rfr"]
    assert abs(mean["plcc"] - PUBLISHED_CV_PLCC) <= 0.03


def test_c9_cross_dataset(criterion, request, tmp_path):
    criterion(9, f"VR-VQA48 cross-dataset PLCC {PUBLISHED_CROSS_PLCC} +- 0.04 (needs datasets)")
    _, out, cfg = request.getfixturevalue("vqa_odv_table")
    other = _dataset_dir("OMNIVQA_VR_VQA48")
    assert cli_main(["features", "--manifest", str(other / "manifest.json"), "--config",
                     str(cfg), "--out", str(tmp_path / "feats")]) == 0
    assert cli_main(["pool", "--manifest", str(other / "manifest.json"), "--cache",
                     str(tmp_path / "feats"), "--config", str(cfg),
                     "--out", str(tmp_path / "pooled")]) == 0
    assert cli_main(["cross", "--train-table", str(out / "pooled" / "pooled.csv"),
                     "--test-table", str(tmp_path / "pooled" / "pooled.csv"), "--config",
                     str(cfg), "--out", str(tmp_path / "cross")]) == 0
    rep = json.loads((tmp_path / "cross" / "cross_report.json").read_text())["ours_rfr"]
    assert abs(rep["plcc"] - PUBLISHED_CROSS_PLCC) <= 0.04


# ---- 10: serialization -------------------------------------------------------------

def test_c10_round_trips(criterion, tmp_path):
    criterion(10, "model and feature-cache round trips byte-identical")
    rng = np.random.default_rng(10)
    data = _unique_rows_set(seed=10)
    for kind in ("rfr", "gbr", "svr"):
        model = regression.train(data, kind, {"rfr": {"n_estimators": 10},
                                              "gbr": {"n_estimators": 20}, "svr": {}}[kind])
        path = tmp_path / f"{kind}.json"
        model.save(path)
        loaded = QualityModel.load(path)
        loaded.save(tmp_path / f"{kind}2.json")
        assert path.read_bytes() == (tmp_path / f"{kind}2.json").read_bytes()
        probe = rng.uniform(-1, 2, (1000, 3))
        assert model.predict(probe).tobytes() == loaded.predict(probe).tobytes()
    ref = quantize(make_content(5, 3, 64))
    dist = apply_distortion(ref, ladder("noise", 1)[0], seed=1)
    pattern = make_pattern("tropical", 40, (12, 12))
    from omnivqa.dataset import FeatureTensor
    from omnivqa.dataset.features import feature_provenance
    from omnivqa.metrics import MODEL_FEATURES
    values = compute_tensor(as_luma(ref), as_luma(dist), "vp", pattern)
    tensor = FeatureTensor("v", values, [f.name for f in MODEL_FEATURES],
                           feature_provenance("vp", pattern, MODEL_FEATURES))
    first = write_feature_cache(tensor, tmp_path / "a")
    back = read_feature_cache(first, tensor.provenance)
    assert back.values.tobytes() == tensor.values.tobytes()
    second = write_feature_cache(back, tmp_path / "b")
    assert first.read_bytes() == second.read_bytes()
    assert first.with_suffix(".json").read_bytes() == second.with_suffix(".json").read_bytes()


def _snapshot(d: Path):
    return {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_c10_cli_reruns_identical(criterion, tmp_path):
    criterion(10, "every CLI command re-run with the same seed is byte-identical")
    data = tmp_path / "data"
    assert cli_main(["synth", "--contents", "8", "--levels", "2", "--frames", "3",
                     "--width", "48", "--out", str(data)]) == 0
    manifest = str(data / "manifest.json")
    ids = [v.video_id for v in load_manifest(manifest)]
    write_split_file(tmp_path / "split.txt", ids[:12], ids[12:])
    geo = ["--pattern", "equatorial", "--fov", "60", "--vp-size", "12", "12", "--jobs", "1"]
    fast = ["--params", '{"n_estimators": 10}']

    def commands(o: Path):
        t = str(o / "pool" / "pooled.csv")
        return [
            ["features", "--manifest", manifest, *geo, "--out", str(o / "feat")],
            ["pool", "--manifest", manifest, "--cache", str(o / "feat"), "--out", str(o / "pool")],
            ["train", "--table", t, "--grid", str(tmp_path / "grid.json"), "--tune-repeats", "2",
             "--out", str(o / "train")],
            ["predict", "--model", str(o / "train" / "model.json"), "--table", t,
             "--out", str(o / "pred")],
            ["evaluate", "--table", t, "--column", "v0_GMSD", "--logistic-fit",
             "--out", str(o / "eval")],
            ["cv", "--table", t, "--repeats", "4", *fast, "--jobs", "1", "--out", str(o / "cv")],
            ["sffs", "--table", t, "--max-features", "2", "--tune-repeats", "2", *fast,
             "--out", str(o / "sffs")],
            ["fixed", "--table", t, "--split", str(tmp_path / "split.txt"), *fast,
             "--baseline", "v0_GMSD", "--out", str(o / "fixed")],
            ["cross", "--train-table", t, "--test-table", t, *fast, "--out", str(o / "cross")],
            ["sweep", "--manifest", manifest, "--patterns", "equatorial", "--fovs", "60",
             "--vp-size", "12", "12", "--jobs", "1", "--out", str(o / "sweep")],
            ["synth", "--contents", "3", "--frames", "2", "--width", "32", "--out", str(o / "synth")],
        ]

    (tmp_path / "grid.json").write_text(json.dumps({"n_estimators": [5, 10]}))
    first, second = tmp_path / "run1", tmp_path / "run2"
    for o in (first, second):
        for argv in commands(o):
            assert cli_main(argv) == 0, argv

    def normalized(root):
        # config.json echoes the output paths, which legitimately differ
        snap = _snapshot(root)
        return {k: v.replace(str(root).encode(), b"<out>") for k, v in snap.items()}

    a, b = normalized(first), normalized(second)
    assert a.keys() == b.keys()
    assert a == b
    # re-running into the same directory leaves every byte unchanged
    before = _snapshot(first)
    for argv in commands(first):
        assert cli_main(argv) == 0
    assert _snapshot(first) == before
