"""Temporal features comparing frame-to-frame changes of two sequences."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatchError
from ..frames import as_array, peak_of
from . import tables
from .spatial import gmsd


def temporal_information(curr, prev) -> float:
    """Population standard deviation of ``curr - prev``."""
    a = as_array(curr)
    b = as_array(prev)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.std(a - b))


def relative_ti(ref_curr, ref_prev, dist_curr, dist_prev,
                eps=tables.R_TI_EPS, cap=tables.R_TI_CAP) -> float:
    """``|TI_ref - TI_dist| / TI_ref`` with a bounded static-reference rule.

    Both TI below ``eps`` gives 0; only the reference below ``eps`` gives
    ``cap``.  Larger ratios are not clipped.
    """
    _check_window(ref_curr, ref_prev, dist_curr, dist_prev)
    ti_ref = temporal_information(ref_curr, ref_prev)
    ti_dist = temporal_information(dist_curr, dist_prev)
    if ti_ref < eps:
        return 0.0 if ti_dist < eps else cap
    return abs(ti_ref - ti_dist) / ti_ref


def temporal_gmsd(ref_curr, ref_prev, dist_curr, dist_prev, bit_depth=None) -> float:
    """GMSD between the signed reference and distorted frame differences."""
    _check_window(ref_curr, ref_prev, dist_curr, dist_prev)
    bd = bit_depth
    if bd is None:
        peak = peak_of(ref_curr)
        bd = int(round(np.log2(peak + 1)))
    d_ref = as_array(ref_curr) - as_array(ref_prev)
    d_dist = as_array(dist_curr) - as_array(dist_prev)
    return gmsd(d_ref, d_dist, bit_depth=bd)


def _check_window(*frames):
    shapes = {as_array(f).shape for f in frames}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"frame pair window has mixed shapes: {sorted(shapes)}")
