"""Fusion regressors mapping pooled feature vectors to DMOS.

Models are fitted with scikit-learn and immediately exported into a plain
node-array representation (:class:`QualityModel`).  Prediction, storage and
loading only use that representation, so a saved model file fully defines
its outputs.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import LayoutMismatchError, NonFiniteInputError, TooFewGroupsError, ZeroVarianceError
from .evaluation.criteria import plcc
from .evaluation.splits import grouped_shuffle_split, repeat_seed
from .metrics.registry import FeatureId

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODEL_KINDS = ("rfr", "gbr", "svr")

DEFAULT_GRIDS = {
    "rfr": {"n_estimators": [100, 300], "max_depth": [8, 16, None],
            "min_samples_leaf": [1, 5], "max_features": ["sqrt", "third"]},
    "gbr": {"learning_rate": [0.05, 0.1], "n_estimators": [200, 500], "max_depth": [2, 3]},
    "svr": {"C": [1.0, 10.0, 100.0], "epsilon": [0.1, 1.0]},
}

DEFAULT_PARAMS = {
    "rfr": {"n_estimators": 100, "max_depth": None, "min_samples_leaf": 1,
            "max_features": "sqrt", "bootstrap": True},
    "gbr": {"learning_rate": 0.1, "n_estimators": 200, "max_depth": 3},
    "svr": {"C": 10.0, "epsilon": 0.1},
}

_COLUMN_RE = re.compile(r"^v(\d+)_(.+)$")


def column_name(viewport: int, feature) -> str:
    return f"v{viewport}_{FeatureId.parse(feature).name}"


def layout_columns(n_viewports: int, features: Sequence) -> list[str]:
    """Column names in pooled-vector order (viewport-major, feature-minor)."""
    return [column_name(n, f) for n in range(n_viewports) for f in features]


def column_feature(name: str) -> FeatureId:
    m = _COLUMN_RE.match(name)
    if not m:
        raise LayoutMismatchError(f"not a pooled feature column: {name!r}")
    return FeatureId.parse(m.group(2))


@dataclass
class TrainingSet:
    """Pooled feature table: one row per video."""

    video_ids: list
    groups: list
    X: np.ndarray
    y: np.ndarray
    feature_names: list

    def __post_init__(self):
        self.video_ids = [str(v) for v in self.video_ids]
        self.groups = [str(g) for g in self.groups]
        self.X = np.asarray(self.X, dtype=np.float64).reshape(len(self.video_ids), -1)
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        self.feature_names = list(self.feature_names)
        if self.X.shape[1] != len(self.feature_names):
            raise LayoutMismatchError("feature matrix width does not match feature names")
        if self.y.size != len(self.video_ids) or len(self.groups) != len(self.video_ids):
            raise ValueError("rows, groups and targets must have equal length")
        if any(not g for g in self.groups):
            raise ValueError("group ids must be non-empty")

    def __len__(self):
        return len(self.video_ids)

    @property
    def n_groups(self) -> int:
        return len(set(self.groups))

    def subset(self, idx) -> "TrainingSet":
        idx = np.asarray(idx, dtype=np.int64)
        return TrainingSet([self.video_ids[i] for i in idx], [self.groups[i] for i in idx],
                           self.X[idx], self.y[idx], self.feature_names)

    def select_ids(self, ids: Iterable[str]) -> "TrainingSet":
        pos = {v: i for i, v in enumerate(self.video_ids)}
        missing = [v for v in ids if v not in pos]
        if missing:
            raise KeyError(f"unknown video ids: {missing[:5]}")
        return self.subset([pos[v] for v in ids])

    def feature_ids(self) -> list[FeatureId]:
        """Distinct feature ids present, in id order."""
        return sorted({column_feature(n) for n in self.feature_names})

    def with_features(self, features: Iterable) -> "TrainingSet":
        """Keep the columns of the given feature ids (across all viewports)."""
        keep = {FeatureId.parse(f) for f in features}
        cols = [i for i, n in enumerate(self.feature_names) if column_feature(n) in keep]
        return TrainingSet(self.video_ids, self.groups, self.X[:, cols], self.y,
                           [self.feature_names[i] for i in cols])


@dataclass
class QualityModel:
    kind: str
    feature_layout: list
    hyperparams: dict
    seed: int
    trees: list = field(default_factory=list)
    init_value: float = 0.0
    learning_rate: float = 1.0
    svr: Optional[dict] = None

    # ---- prediction ----------------------------------------------------------
    def _matrix(self, features) -> np.ndarray:
        if isinstance(features, TrainingSet):
            if features.feature_names != self.feature_layout:
                raise LayoutMismatchError("feature layout differs from the model's")
            X = features.X
        else:
            X = np.asarray(features, dtype=np.float64)
            if X.ndim == 1:
                X = X[None, :]
        if X.shape[1] != len(self.feature_layout):
            raise LayoutMismatchError(
                f"expected {len(self.feature_layout)} features, got {X.shape[1]}")
        return X

    def predict(self, features) -> np.ndarray:
        X = self._matrix(features)
        if self.kind == "svr":
            return _svr_predict(self.svr, X)
        # split decisions compare single-precision feature values
        Xs = X.astype(np.float32).astype(np.float64)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += _tree_predict(tree, Xs)
        if self.kind == "rfr":
            return total / len(self.trees)
        return self.init_value + self.learning_rate * total

    # ---- persistence ---------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "kind": self.kind,
             "feature_layout": list(self.feature_layout),
             "hyperparams": self.hyperparams, "seed": self.seed,
             "trees": [{"nodes": _nodes_to_json(t)} for t in self.trees]}
        if self.kind == "gbr":
            d["init_value"] = self.init_value
            d["learning_rate"] = self.learning_rate
        if self.kind == "svr":
            d["svr"] = {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                        for k, v in self.svr.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, allow_nan=False)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "QualityModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema {d.get('schema_version')!r}")
        svr = d.get("svr")
        if svr is not None:
            svr = {k: (np.asarray(v, dtype=np.float64) if isinstance(v, list) else v)
                   for k, v in svr.items()}
        return cls(kind=d["kind"], feature_layout=d["feature_layout"],
                   hyperparams=d["hyperparams"], seed=d["seed"],
                   trees=[_nodes_from_json(t["nodes"]) for t in d["trees"]],
                   init_value=d.get("init_value", 0.0),
                   learning_rate=d.get("learning_rate", 1.0), svr=svr)

    @classmethod
    def from_json(cls, text: str) -> "QualityModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "QualityModel":
        return cls.from_json(Path(path).read_text())


def predict(model: QualityModel, features) -> np.ndarray:
    return model.predict(features)


# ---- tree representation -------------------------------------------------------

def _tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    feat, thr = tree["feature_index"], tree["threshold"]
    left, right, leaf = tree["left"], tree["right"], tree["leaf_value"]
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = left[node] >= 0
    while active.any():
        r = rows[active]
        n = node[active]
        go_left = X[r, feat[n]] <= thr[n]
        node[active] = np.where(go_left, left[n], right[n])
        active = left[node] >= 0
    return leaf[node]


def _export_sklearn_tree(est, scale=1.0) -> dict:
    t = est.tree_
    left = t.children_left.astype(np.int64)
    is_leaf = left < 0
    value = t.value[:, 0, 0].astype(np.float64) * scale
    return {
        "feature_index": np.where(is_leaf, -1, t.feature).astype(np.int64),
        "threshold": np.where(is_leaf, 0.0, t.threshold).astype(np.float64),
        "left": left,
        "right": t.children_right.astype(np.int64),
        "leaf_value": np.where(is_leaf, value, 0.0),
    }


def _constant_tree(value: float) -> dict:
    return {"feature_index": np.array([-1]), "threshold": np.array([0.0]),
            "left": np.array([-1]), "right": np.array([-1]),
            "leaf_value": np.array([float(value)])}


def _nodes_to_json(tree: dict) -> list:
    out = []
    for i in range(tree["left"].size):
        if tree["left"][i] < 0:
            out.append({"feature_index": None, "threshold": None, "left": None,
                        "right": None, "leaf_value": float(tree["leaf_value"][i])})
        else:
            out.append({"feature_index": int(tree["feature_index"][i]),
                        "threshold": float(tree["threshold"][i]),
                        "left": int(tree["left"][i]), "right": int(tree["right"][i]),
                        "leaf_value": None})
    return out


def _nodes_from_json(nodes: list) -> dict:
    def col(key, leaf_default, dtype):
        return np.array([leaf_default if n[key] is None else n[key] for n in nodes], dtype=dtype)
    return {"feature_index": col("feature_index", -1, np.int64),
            "threshold": col("threshold", 0.0, np.float64),
            "left": col("left", -1, np.int64), "right": col("right", -1, np.int64),
            "leaf_value": col("leaf_value", 0.0, np.float64)}


def _svr_predict(params: dict, X: np.ndarray) -> np.ndarray:
    Z = (X - params["mean"]) / params["scale"]
    sv = params["support_vectors"]
    d2 = (np.sum(Z * Z, axis=1)[:, None] + np.sum(sv * sv, axis=1)[None, :]
          - 2.0 * Z @ sv.T)
    K = np.exp(-params["gamma"] * np.maximum(d2, 0.0))
    return K @ params["dual_coef"] + params["intercept"]


# ---- training ----------------------------------------------------------------------

def _resolve_max_features(value, d):
    if value in (None, "all"):
        return None
    if value == "sqrt":
        return "sqrt"
    if value == "third":
        return max(1, int(d / 3))
    return value


def _check_data(data: TrainingSet):
    if len(data) == 0:
        raise ValueError("empty training set")
    if not (np.all(np.isfinite(data.X)) and np.all(np.isfinite(data.y))):
        raise NonFiniteInputError("training features and targets must be finite")


def train(data: TrainingSet, kind: str = "rfr", hyperparams: Optional[Mapping] = None,
          seed: int = 0) -> QualityModel:
    """Fit a regressor of the given kind.

    Constant targets produce a constant model with a warning.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    _check_data(data)
    params = dict(DEFAULT_PARAMS[kind])
    params.update(hyperparams or {})
    seed = int(seed)
    meta = dict(kind=kind, feature_layout=list(data.feature_names), hyperparams=params, seed=seed)
    X, y = data.X, data.y
    if np.all(y == y[0]):
        warnings.warn("all targets are equal; fitting a constant model", RuntimeWarning)
        return QualityModel(**{**meta, "kind": "rfr"}, trees=[_constant_tree(y[0])])
    rs = seed % (2 ** 32)
    if kind == "rfr":
        from sklearn.ensemble import RandomForestRegressor
        est = RandomForestRegressor(
            n_estimators=int(params["n_estimators"]), max_depth=params["max_depth"],
            min_samples_leaf=int(params["min_samples_leaf"]),
            max_features=_resolve_max_features(params["max_features"], X.shape[1]),
            bootstrap=bool(params.get("bootstrap", True)), random_state=rs,
            n_jobs=params.get("n_jobs"))
        est.fit(X, y)
        return QualityModel(**meta, trees=[_export_sklearn_tree(t) for t in est.estimators_])
    if kind == "gbr":
        from sklearn.ensemble import GradientBoostingRegressor
        est = GradientBoostingRegressor(
            loss="squared_error", learning_rate=float(params["learning_rate"]),
            n_estimators=int(params["n_estimators"]), max_depth=int(params["max_depth"]),
            random_state=rs)
        est.fit(X, y)
        init = float(est.init_.constant_.ravel()[0])
        trees = [_export_sklearn_tree(t) for t in est.estimators_[:, 0]]
        return QualityModel(**meta, trees=trees, init_value=init,
                            learning_rate=float(params["learning_rate"]))
    from sklearn.svm import SVR
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    var = Z.var()
    gamma = 1.0 / (Z.shape[1] * var) if var > 0 else 1.0
    est = SVR(kernel="rbf", C=float(params["C"]), epsilon=float(params["epsilon"]), gamma=gamma)
    est.fit(Z, y)
    svr = {"mean": mean, "scale": scale, "gamma": float(gamma),
           "support_vectors": np.asarray(est.support_vectors_, dtype=np.float64),
           "dual_coef": np.asarray(est.dual_coef_[0], dtype=np.float64),
           "intercept": float(est.intercept_[0])}
    return QualityModel(**meta, svr=svr)


# ---- model selection ---------------------------------------------------------------

def expand_grid(grid) -> list[dict]:
    """Cartesian product of a ``{param: [values]}`` grid, keys sorted."""
    if isinstance(grid, Mapping):
        if not grid:
            raise ValueError("empty hyper-parameter grid")
        keys = sorted(grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]
    points = [dict(p) for p in grid]
    if not points:
        raise ValueError("empty hyper-parameter grid")
    return points


def grouped_cv_plcc(data: TrainingSet, kind: str, params: Mapping, n_repeats: int,
                    split_fraction: float, seed: int) -> tuple[float, list]:
    """Mean validation PLCC over grouped shuffle splits of ``data``.

    Repeats whose PLCC is undefined are skipped; NaN if all are.
    """
    if data.n_groups < 2:
        raise TooFewGroupsError(f"need >= 2 groups, got {data.n_groups}")
    scores = []
    for r in range(n_repeats):
        tr, va = grouped_shuffle_split(data.groups, split_fraction, repeat_seed(seed, r))
        model = train(data.subset(tr), kind, params, seed)
        try:
            scores.append(plcc(model.predict(data.X[va]), data.y[va]))
        except ZeroVarianceError:
            scores.append(math.nan)
    finite = [s for s in scores if not math.isnan(s)]
    return (float(np.mean(finite)) if finite else math.nan), scores


def tune_hyperparams(data: TrainingSet, kind: str = "rfr", grid=None, n_repeats: int = 10,
                     split_fraction: float = 0.2, seed: int = 0):
    """Pick the grid point with the best mean grouped-CV PLCC on ``data``.

    ``data`` must contain training rows only.  Returns ``(best, table)``
    where ``table`` lists every grid point with its mean PLCC.  Ties keep
    the earlier grid point.
    """
    points = expand_grid(DEFAULT_GRIDS[kind] if grid is None else grid)
    if data.n_groups < 2:
        raise TooFewGroupsError(f"need >= 2 groups, got {data.n_groups}")
    table = []
    best, best_score = points[0], -math.inf
    for p in points:
        mean, scores = grouped_cv_plcc(data, kind, p, n_repeats, split_fraction, seed)
        table.append({"params": p, "mean_plcc": mean, "repeats": scores})
        log.debug("grid point %s -> %.5f", p, mean)
        if not math.isnan(mean) and mean > best_score:
            best, best_score = p, mean
    return best, table


def sffs(data: TrainingSet, max_features: Optional[int] = None, kind: str = "rfr",
         hyperparams: Optional[Mapping] = None, n_repeats: int = 10,
         split_fraction: float = 0.2, seed: int = 0):
    """Sequential forward selection over feature ids.

    Selecting an id keeps its columns for every viewport.  Each step adds
    the id with the highest mean grouped-CV PLCC; ties go to the lower id.
    Returns ``(selected_ids, step_scores)``.
    """
    candidates = data.feature_ids()
    if max_features is None:
        max_features = len(candidates)
    if max_features > len(candidates):
        raise ValueError(f"max_features={max_features} exceeds {len(candidates)} feature ids")
    if data.n_groups < 2:
        raise TooFewGroupsError(f"need >= 2 groups, got {data.n_groups}")
    selected: list[FeatureId] = []
    step_scores: list[float] = []
    for _ in range(max_features):
        best_id, best_score = None, -math.inf
        for fid in candidates:
            if fid in selected:
                continue
            subset = data.with_features(selected + [fid])
            score, _ = grouped_cv_plcc(subset, kind, hyperparams or {}, n_repeats,
                                       split_fraction, seed)
            if not math.isnan(score) and score > best_score:
                best_id, best_score = fid, score
        if best_id is None:
            break
        selected.append(best_id)
        step_scores.append(best_score)
        log.info("sffs step %d: +%s (PLCC %.5f)", len(selected), best_id.name, best_score)
    return selected, step_scores
