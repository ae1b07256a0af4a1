"""Feature extraction over whole videos in the three computation modes."""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import DimensionMismatchError, FrameCountMismatchError
from ..frames import LumaFrame
from ..geometry import SamplingPattern, render_collage, render_viewport
from ..metrics.registry import ERP_ONLY_FEATURES, MODEL_FEATURES, FeatureId, frame_features
from ..metrics.tables import TABLES_DIGEST
from .cache import FeatureTensor
from .frames import read_frames
from .manifest import VideoEntry

log = logging.getLogger(__name__)

MODES = ("projection", "collage", "vp")
_MODE_ALIASES = {"proj": "projection", "per_viewport": "vp", "vp-collage": "collage"}


def normalize_mode(mode: str) -> str:
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def feature_provenance(mode: str, pattern: Optional[SamplingPattern], features) -> dict:
    mode = normalize_mode(mode)
    prov = {"mode": mode, "features": [FeatureId.parse(f).name for f in features],
            "feature_version": TABLES_DIGEST, "pattern": None, "fov_deg": None, "vp_size": None}
    if mode != "projection":
        spec = pattern.specs[0]
        prov.update(pattern=pattern.kind.value,
                    fov_deg=round(float(np.degrees(spec.fov_h)), 9),
                    vp_size=[spec.width, spec.height])
    return prov


def _surfaces(frame: LumaFrame, mode: str, pattern):
    if mode == "projection":
        return [frame.samples]
    if mode == "collage":
        return [render_collage(frame.samples, pattern)]
    return [render_viewport(frame.samples, spec) for spec in pattern.specs]


def compute_tensor(ref_frames: Iterable[LumaFrame], dist_frames: Iterable[LumaFrame],
                   mode: str, pattern: Optional[SamplingPattern] = None,
                   features: Sequence = MODEL_FEATURES) -> np.ndarray:
    """Stream two frame sequences into an ``(F, N, M)`` array.

    Only the current and previous rendered surfaces are held, so memory is
    constant in the number of frames.  Temporal features of frame 0 are 0.
    """
    mode = normalize_mode(mode)
    feats = [FeatureId.parse(f) for f in features]
    if mode != "projection":
        if pattern is None or len(pattern) == 0:
            raise ValueError(f"mode {mode!r} needs a sampling pattern")
        bad = [f.name for f in feats if f in ERP_ONLY_FEATURES]
        if bad:
            raise ValueError(f"features {bad} are only defined on ERP frames (projection mode)")
    rows = []
    prev = None
    ref_it, dist_it = iter(ref_frames), iter(dist_frames)
    f = 0
    while True:
        r = next(ref_it, None)
        d = next(dist_it, None)
        if r is None or d is None:
            if r is not None or d is not None:
                raise FrameCountMismatchError(f"reference and distorted lengths differ at frame {f}")
            break
        if r.samples.shape != d.samples.shape:
            raise DimensionMismatchError(
                f"frame {f}: reference {r.samples.shape} vs distorted {d.samples.shape}")
        cur = (_surfaces(r, mode, pattern), _surfaces(d, mode, pattern))
        bd = r.bit_depth
        del r, d
        row = []
        for n in range(len(cur[0])):
            if prev is None:
                row.append(frame_features(feats, cur[0][n], cur[1][n], bit_depth=bd))
            else:
                row.append(frame_features(feats, cur[0][n], cur[1][n],
                                          prev[0][n], prev[1][n], bit_depth=bd))
        rows.append(row)
        prev = cur
        f += 1
    if not rows:
        raise FrameCountMismatchError("no frames to compare")
    return np.asarray(rows, dtype=np.float64)


def compute_features(entry: VideoEntry, pattern: Optional[SamplingPattern], mode: str,
                     features: Sequence = MODEL_FEATURES, frames=None) -> FeatureTensor:
    """Feature tensor for one manifest entry.

    ``frames`` may supply ``(ref_iterable, dist_iterable)`` instead of
    reading the entry's files.
    """
    mode = normalize_mode(mode)
    if frames is None:
        ref = read_frames(entry.reference_path, entry.width, entry.height, entry.bit_depth)
        dist = read_frames(entry.distorted_path, entry.width, entry.height, entry.bit_depth)
    else:
        ref, dist = frames
    values = compute_tensor(ref, dist, mode, pattern, features)
    if entry.frame_count and values.shape[0] != entry.frame_count:
        raise FrameCountMismatchError(
            f"{entry.video_id}: manifest says {entry.frame_count} frames, read {values.shape[0]}")
    names = [FeatureId.parse(f).name for f in features]
    return FeatureTensor(entry.video_id, values, names,
                         feature_provenance(mode, pattern, features))
