"""Experiment protocols: fixed split, repeated grouped CV, cross-dataset."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .. import regression
from ..errors import LayoutMismatchError, SplitOverlapError, TooFewGroupsError, ZeroVarianceError
from .criteria import EvalReport, evaluate, fit_logistic4
from .splits import grouped_shuffle_split, repeat_seed

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    kind: str = "rfr"
    grid: Optional[dict] = None
    n_repeats: int = 10
    split_fraction: float = 0.2
    seed: int = 0
    hyperparams: Optional[dict] = None  # skips tuning when given

    def to_dict(self) -> dict:
        return asdict(self)


def _log_orientation(name, pred, target):
    r = float(np.corrcoef(pred, target)[0, 1]) if np.std(pred) > 0 and np.std(target) > 0 else math.nan
    log.info("%s: PLCC sign %+.0f (raw r=%.4f)", name, math.copysign(1, r) if r == r else 0, r)


def fit_and_tune(train: regression.TrainingSet, cfg: ExperimentConfig):
    """Tune on ``train`` (unless fixed params are given) and fit the final model."""
    if cfg.hyperparams is not None:
        params, table = dict(cfg.hyperparams), []
    else:
        params, table = regression.tune_hyperparams(
            train, cfg.kind, cfg.grid, cfg.n_repeats, cfg.split_fraction, cfg.seed)
    return regression.train(train, cfg.kind, params, cfg.seed), params, table


def baseline_report(train_scores, train_dmos, test_scores, test_dmos, descriptor) -> EvalReport:
    """Map a raw metric with a logistic fitted on train rows, evaluate on test rows."""
    params = fit_logistic4(train_scores, train_dmos)
    return evaluate(params(test_scores), test_dmos, descriptor)


def run_fixed_split(data: regression.TrainingSet, train_ids: Sequence[str],
                    test_ids: Sequence[str], cfg: ExperimentConfig = ExperimentConfig(),
                    baselines: Optional[Mapping[str, Sequence[float]]] = None) -> dict:
    """Tune and train on the train ids only, report on the test ids.

    ``baselines`` maps a method name to one raw score per row of ``data``;
    each is logistic-mapped on train rows.  Returns ``{method: EvalReport}``
    plus ``"_params"`` with the chosen hyper-parameters.
    """
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise SplitOverlapError(f"ids in both train and test: {sorted(overlap)[:5]}")
    train = data.select_ids(train_ids)
    test = data.select_ids(test_ids)
    model, params, _ = fit_and_tune(train, cfg)
    pred = model.predict(test.X)
    _log_orientation("fixed-split", pred, test.y)
    out = {f"ours_{cfg.kind}": evaluate(pred, test.y, "fixed:test")}
    pos = {v: i for i, v in enumerate(data.video_ids)}
    tr_idx = [pos[v] for v in train_ids]
    te_idx = [pos[v] for v in test_ids]
    for name, scores in (baselines or {}).items():
        s = np.asarray(scores, dtype=np.float64)
        out[name] = baseline_report(s[tr_idx], data.y[tr_idx], s[te_idx], data.y[te_idx],
                                    "fixed:test")
    out["_params"] = params
    return out


@dataclass
class CVReport:
    mean: dict  # method -> EvalReport of averaged criteria
    per_repeat: dict  # method -> {"plcc": [...], "srocc": [...], "rmse": [...]}
    n_excluded: dict  # method -> undefined-correlation repeats
    n_repeats: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"n_repeats": self.n_repeats, "params": self.params,
                "n_excluded": self.n_excluded,
                "mean": {k: v.to_dict() for k, v in self.mean.items()},
                "per_repeat": self.per_repeat}


def _cv_repeat(data, r, cfg, params, baselines):
    tr, te = grouped_shuffle_split(data.groups, cfg.split_fraction, repeat_seed(cfg.seed, r))
    out = {}
    model = regression.train(data.subset(tr), cfg.kind, params, cfg.seed)
    try:
        out[f"ours_{cfg.kind}"] = evaluate(model.predict(data.X[te]), data.y[te], f"cv:{r}")
    except ZeroVarianceError:
        out[f"ours_{cfg.kind}"] = None
    for name, scores in (baselines or {}).items():
        s = np.asarray(scores, dtype=np.float64)
        try:
            out[name] = baseline_report(s[tr], data.y[tr], s[te], data.y[te], f"cv:{r}")
        except (ZeroVarianceError, ValueError):
            out[name] = None
    return out


def run_repeated_cv(data: regression.TrainingSet, n_repeats: int = 1000,
                    fraction: float = 0.2, seed: int = 0, kind: str = "rfr",
                    hyperparams: Optional[dict] = None,
                    baselines: Optional[Mapping[str, Sequence[float]]] = None,
                    n_jobs: int = 1) -> CVReport:
    """Average criteria over repeated grouped train/test splits.

    Hyper-parameters are fixed for all repeats (defaults when omitted).
    Repeat ``r`` uses sub-seed ``(seed, r)``, so serial and parallel runs
    agree.  Repeats with undefined correlation are excluded and counted.
    """
    if data.n_groups < 5:
        raise TooFewGroupsError(f"repeated CV needs >= 5 groups, got {data.n_groups}")
    params = dict(regression.DEFAULT_PARAMS[kind])
    params.update(hyperparams or {})
    cfg = ExperimentConfig(kind=kind, split_fraction=fraction, seed=seed)
    if n_jobs == 1:
        results = [_cv_repeat(data, r, cfg, params, baselines) for r in range(n_repeats)]
    else:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=n_jobs)(
            delayed(_cv_repeat)(data, r, cfg, params, baselines) for r in range(n_repeats))
    methods = list(results[0])
    mean, per, excluded = {}, {}, {}
    for m in methods:
        reps = [res[m] for res in results]
        ok = [rep for rep in reps if rep is not None]
        excluded[m] = len(reps) - len(ok)
        per[m] = {k: [getattr(rep, k) if rep is not None else None for rep in reps]
                  for k in ("plcc", "srocc", "rmse")}
        if ok:
            mean[m] = EvalReport(float(np.mean([o.plcc for o in ok])),
                                 float(np.mean([o.srocc for o in ok])),
                                 float(np.mean([o.rmse for o in ok])),
                                 int(np.mean([o.n for o in ok])),
                                 f"cv:{n_repeats}x{fraction}")
    return CVReport(mean, per, excluded, n_repeats, params)


def run_cross_dataset(train: regression.TrainingSet, test: regression.TrainingSet,
                      cfg: ExperimentConfig = ExperimentConfig()) -> EvalReport:
    """Train on all of ``train`` (tuning on it), evaluate on all of ``test``."""
    if train.feature_names != test.feature_names:
        raise LayoutMismatchError("train and test tables have different feature layouts")
    model, _, _ = fit_and_tune(train, cfg)
    pred = model.predict(test.X)
    _log_orientation("cross-dataset", pred, test.y)
    return evaluate(pred, test.y, "cross-dataset")


def write_reports_json(path, reports: Mapping) -> None:
    payload = {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in reports.items()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_cv_distribution_csv(path, report: CVReport) -> None:
    """Per-repeat criteria, one row per (method, repeat)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "repeat", "plcc", "srocc", "rmse"])
        for m, vals in report.per_repeat.items():
            for r in range(report.n_repeats):
                row = [vals[k][r] for k in ("plcc", "srocc", "rmse")]
                w.writerow([m, r] + ["" if v is None else repr(float(v)) for v in row])
