"""Temporal pooling of per-frame feature series."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySeriesError, NegativeInputError
from .metrics.registry import FeatureId, higher_is_better

POOLING_KINDS = ("hvs", "mean", "minkowski", "percentile")


@dataclass(frozen=True)
class PoolingConfig:
    """Pooling parameters.

    ``tau=None`` means one third of the series length.  ``normalize=False``
    divides the recency-weighted sum by the frame count instead of by the
    weight sum.
    """

    kind: str = "hvs"
    alpha: float = 0.03
    beta: float = 0.2
    tau: Optional[float] = None
    p: float = 2.0
    k_percent: float = 10.0
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in POOLING_KINDS:
            raise ValueError(f"unknown pooling kind {self.kind!r}")
        if not (0.0 < self.alpha <= 1.0 and 0.0 < self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in (0, 1]")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.p < 1:
            raise ValueError("Minkowski order p must be >= 1")
        if not 0.0 < self.k_percent <= 100.0:
            raise ValueError("k_percent must lie in (0, 100]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PoolingConfig":
        return cls(**d)


def _series(series) -> np.ndarray:
    q = np.asarray(series, dtype=np.float64).ravel()
    if q.size == 0:
        raise EmptySeriesError("cannot pool an empty series")
    return q


def smooth_asymmetric(series, alpha=0.03, beta=0.2) -> np.ndarray:
    """Low-pass recursion with separate gains for falls and rises."""
    q = _series(series)
    out = np.empty_like(q)
    out[0] = q[0]
    for f in range(1, q.size):
        delta = q[f] - out[f - 1]
        out[f] = out[f - 1] + (alpha if delta <= 0 else beta) * delta
    return out


def recency_weights(n_frames: int, tau: float) -> np.ndarray:
    f = np.arange(n_frames, dtype=np.float64)
    return np.exp(((f + 1.0) - n_frames) / tau)


def hvs_pool(series, cfg: PoolingConfig = PoolingConfig()) -> float:
    q = _series(series)
    lp = smooth_asymmetric(q, cfg.alpha, cfg.beta)
    if q.size == 1:
        return float(lp[0])
    tau = cfg.tau if cfg.tau is not None else q.size / 3.0
    w = recency_weights(q.size, tau)
    total = float(np.sum(lp * w))
    return total / float(np.sum(w)) if cfg.normalize else total / q.size


def mean_pool(series) -> float:
    return float(np.mean(_series(series)))


def minkowski_pool(series, p: float = 2.0) -> float:
    q = _series(series)
    if p < 1:
        raise ValueError("Minkowski order p must be >= 1")
    if np.any(q < 0) and not float(p).is_integer():
        raise NegativeInputError("non-integer Minkowski order needs a nonnegative series")
    if p == 1:
        return float(np.mean(q))
    m = float(np.mean(q ** p))
    # odd integer orders keep the sign of negative inputs
    return math.copysign(abs(m) ** (1.0 / p), m)


def percentile_pool(series, k_percent: float = 10.0, lower_is_worse: bool = True) -> float:
    """Mean of the worst ``ceil(F * k / 100)`` values."""
    q = _series(series)
    n = max(1, math.ceil(q.size * k_percent / 100.0 - 1e-12))
    s = np.sort(q)
    worst = s[:n] if lower_is_worse else s[-n:]
    return float(np.mean(worst))


def pool_series(series, cfg: PoolingConfig, feature=None) -> float:
    if cfg.kind == "hvs":
        return hvs_pool(series, cfg)
    if cfg.kind == "mean":
        return mean_pool(series)
    if cfg.kind == "minkowski":
        return minkowski_pool(series, cfg.p)
    lower_is_worse = True if feature is None else higher_is_better(feature)
    return percentile_pool(series, cfg.k_percent, lower_is_worse)


def pool_tensor(values, cfg: PoolingConfig, features: Sequence = ()) -> np.ndarray:
    """Pool an ``(F, N, M)`` tensor into a length ``N * M`` vector.

    Element ``n * M + m`` holds viewport ``n``, feature ``m``.
    ``features`` (``FeatureId`` or names) selects the percentile polarity.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 3 or x.size == 0:
        raise EmptySeriesError("expected a non-empty (frames, viewports, features) tensor")
    _, n_vp, n_feat = x.shape
    feats = [FeatureId.parse(f) for f in features] if features else [None] * n_feat
    if len(feats) != n_feat:
        raise ValueError("feature list length does not match tensor")
    out = np.empty(n_vp * n_feat)
    for n in range(n_vp):
        for m in range(n_feat):
            out[n * n_feat + m] = pool_series(x[:, n, m], cfg, feats[m])
    return out
