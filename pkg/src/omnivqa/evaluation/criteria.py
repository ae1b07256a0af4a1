"""Agreement criteria between predictions and subjective scores."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, special, stats

from ..errors import DegenerateInputError, LengthMismatchError, ZeroVarianceError


def _pair(x, y, min_len=2):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatchError(f"lengths differ: {x.size} vs {y.size}")
    if x.size < min_len:
        raise LengthMismatchError(f"need at least {min_len} samples, got {x.size}")
    return x, y


def plcc(x, y) -> float:
    x, y = _pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def srocc(x, y) -> float:
    """Spearman correlation; ties receive their average rank."""
    x, y = _pair(x, y)
    return plcc(stats.rankdata(x), stats.rankdata(y))


def rmse(pred, target) -> float:
    p, t = _pair(pred, target, min_len=1)
    d = p - t
    return float(np.sqrt(np.mean(d * d)))


@dataclass(frozen=True)
class Logistic4Params:
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.beta1, self.beta2, self.beta3, self.beta4])

    def to_dict(self) -> dict:
        return asdict(self)

    def __call__(self, scores) -> np.ndarray:
        return logistic4(scores, self.as_array())


def logistic4(scores, beta) -> np.ndarray:
    """``(b1 - b2) / (1 + exp(-(s - b3) / |b4|)) + b2``."""
    b1, b2, b3, b4 = beta
    s = np.asarray(scores, dtype=np.float64)
    scale = max(abs(b4), 1e-300)
    return (b1 - b2) * special.expit((s - b3) / scale) + b2


def logistic_init(scores, dmos) -> Logistic4Params:
    s = np.asarray(scores, dtype=np.float64)
    d = np.asarray(dmos, dtype=np.float64)
    return Logistic4Params(float(d.max()), float(d.min()), float(np.median(s)), float(np.std(s)))


def _sse(beta, s, d):
    r = logistic4(s, beta) - d
    return float(r @ r)


def fit_logistic4(scores, dmos, init=None, max_iter=2000, tol=1e-10) -> Logistic4Params:
    """Least-squares logistic mapping by Nelder-Mead.

    Without an explicit ``init`` the search starts from both the documented
    increasing guess and its decreasing mirror (``beta1``/``beta2`` swapped)
    and keeps the better fit.  Each start is restarted from its own optimum
    until the residual stops improving.  The result never has a larger
    residual than its starting point.
    """
    s, d = _pair(scores, dmos)
    if s.size < 4 or np.all(s == s[0]):
        raise DegenerateInputError("logistic fit needs >= 4 non-constant scores")
    if init is None:
        base = logistic_init(s, d)
        if base.beta4 == 0.0:
            raise DegenerateInputError("scores have zero spread")
        starts = [base.as_array(),
                  np.array([base.beta2, base.beta1, base.beta3, base.beta4])]
    else:
        starts = [np.asarray(init.as_array() if isinstance(init, Logistic4Params) else init,
                             dtype=np.float64)]
    best, best_err = None, math.inf
    for x0 in starts:
        x, err = x0, _sse(x0, s, d)
        for _ in range(5):
            res = optimize.minimize(_sse, x, args=(s, d), method="Nelder-Mead",
                                    options={"maxiter": max_iter, "xatol": tol,
                                             "fatol": tol, "adaptive": True})
            if res.fun < err - tol * max(1.0, err):
                x, err = res.x, float(res.fun)
            else:
                if res.fun < err:
                    x, err = res.x, float(res.fun)
                break
        if err < best_err:
            best, best_err = x, err
    return Logistic4Params(*(float(v) for v in best))


@dataclass
class EvalReport:
    plcc: float
    srocc: float
    rmse: float
    n: int
    split_descriptor: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(pred, target, split_descriptor: str = "") -> EvalReport:
    p, t = _pair(pred, target)
    return EvalReport(plcc(p, t), srocc(p, t), rmse(p, t), int(p.size), split_descriptor)
