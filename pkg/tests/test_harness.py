import math
import warnings

import numpy as np
import pytest

from omnivqa.errors import LayoutMismatchError, SplitOverlapError, TooFewGroupsError
from omnivqa.evaluation.harness import (ExperimentConfig, run_cross_dataset,
                                        run_fixed_split, run_repeated_cv,
                                        write_cv_distribution_csv, write_reports_json)
from omnivqa.regression import TrainingSet, layout_columns

FAST = {"n_estimators": 20}


def linear_groups(rng, n_groups=12, per=3, shift=0.0):
    n = n_groups * per
    X = rng.uniform(0, 1, (n, 2)) + shift
    y = 20 * X[:, 0] + 5 + rng.normal(0, 0.2, n)
    return TrainingSet([f"v{i}" for i in range(n)], [f"g{i // per}" for i in range(n)], X, y,
                       layout_columns(1, ["GMSD", "R_TI"]))


def test_fixed_split_report_and_swap(rng):
    data = linear_groups(rng)
    a_ids, b_ids = data.video_ids[:27], data.video_ids[27:]
    cfg = ExperimentConfig(hyperparams=FAST)
    rep = run_fixed_split(data, a_ids, b_ids, cfg, baselines={"raw": data.X[:, 0]})
    ours = rep["ours_rfr"]
    assert ours.n == 9 and ours.plcc > 0.9
    assert math.isfinite(ours.srocc) and ours.rmse >= 0
    assert rep["raw"].plcc > 0.9
    swapped = run_fixed_split(data, b_ids, a_ids, cfg)["ours_rfr"]
    assert (swapped.plcc, swapped.rmse, swapped.n) != (ours.plcc, ours.rmse, ours.n)


def test_fixed_split_overlap(rng):
    data = linear_groups(rng)
    with pytest.raises(SplitOverlapError):
        run_fixed_split(data, data.video_ids[:10], data.video_ids[9:])


def test_fixed_split_tunes_when_no_params(rng):
    data = linear_groups(rng)
    cfg = ExperimentConfig(grid={"n_estimators": [5, 10]}, n_repeats=2)
    rep = run_fixed_split(data, data.video_ids[:27], data.video_ids[27:], cfg)
    assert rep["_params"] in ({"n_estimators": 5}, {"n_estimators": 10})


def test_cv_linear_and_determinism(rng, tmp_path):
    data = linear_groups(rng, n_groups=20, per=5)
    a = run_repeated_cv(data, 20, 0.2, seed=4, hyperparams=FAST)
    assert a.mean["ours_rfr"].plcc >= 0.95
    assert a.n_excluded["ours_rfr"] == 0
    b = run_repeated_cv(data, 20, 0.2, seed=4, hyperparams=FAST, n_jobs=2)
    assert a.to_dict() == b.to_dict()
    write_cv_distribution_csv(tmp_path / "d.csv", a)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "method,repeat,plcc,srocc,rmse" and len(lines) == 21


def test_cv_constant_predictor_excluded(rng):
    data = linear_groups(rng)
    data.y[:] = 7.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = run_repeated_cv(data, 5, 0.2, hyperparams=FAST)
    assert rep.n_excluded["ours_rfr"] == 5
    assert "ours_rfr" not in rep.mean
    assert rep.per_repeat["ours_rfr"]["plcc"] == [None] * 5


def test_cv_too_few_groups(rng):
    data = linear_groups(rng, n_groups=4)
    with pytest.raises(TooFewGroupsError):
        run_repeated_cv(data, 3, 0.2)


def test_cross_dataset(rng, tmp_path):
    train = linear_groups(rng)
    same = run_cross_dataset(train, train, ExperimentConfig(hyperparams=FAST))
    assert same.plcc > 0.99
    other = linear_groups(np.random.default_rng(99), shift=0.5)
    rep = run_cross_dataset(train, other, ExperimentConfig(hyperparams=FAST))
    assert all(math.isfinite(v) for v in (rep.plcc, rep.srocc, rep.rmse))
    bad = TrainingSet(other.video_ids, other.groups, other.X, other.y,
                      layout_columns(1, ["GMSD", "SA"]))
    with pytest.raises(LayoutMismatchError):
        run_cross_dataset(train, bad)
    write_reports_json(tmp_path / "r.json", {"ours": rep})
    assert '"plcc"' in (tmp_path / "r.json").read_text()
