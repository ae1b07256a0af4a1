"""Feature identifiers, polarity, and per-frame evaluation."""

from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Sequence

from . import spatial, temporal


class FeatureId(IntEnum):
    SA = 0
    PSNR = 1
    PSNR_HVS = 2
    PSNR_HVS_M = 3
    SSIM = 4
    MS_SSIM = 5
    GMSD = 6
    R_TI = 7
    T_GMSD = 8
    WS_PSNR = 9
    S_PSNR = 10

    @classmethod
    def parse(cls, name) -> "FeatureId":
        if isinstance(name, FeatureId):
            return name
        key = str(name).strip().upper().replace("-", "_")
        return cls[key]


class FeatureSample(NamedTuple):
    id: FeatureId
    value: float


#: Features used by the fused model, in tensor order.
MODEL_FEATURES = (FeatureId.SA, FeatureId.PSNR_HVS, FeatureId.PSNR_HVS_M,
                  FeatureId.MS_SSIM, FeatureId.GMSD, FeatureId.R_TI, FeatureId.T_GMSD)

TEMPORAL_FEATURES = frozenset({FeatureId.R_TI, FeatureId.T_GMSD})
#: Only meaningful on whole ERP frames.
ERP_ONLY_FEATURES = frozenset({FeatureId.WS_PSNR, FeatureId.S_PSNR})

HIGHER_IS_BETTER = frozenset({FeatureId.PSNR, FeatureId.PSNR_HVS, FeatureId.PSNR_HVS_M,
                              FeatureId.SSIM, FeatureId.MS_SSIM, FeatureId.WS_PSNR,
                              FeatureId.S_PSNR})


def higher_is_better(fid) -> bool:
    return FeatureId.parse(fid) in HIGHER_IS_BETTER


def ideal_value(fid) -> float:
    """Value a feature takes on identical inputs."""
    fid = FeatureId.parse(fid)
    if fid in (FeatureId.SSIM, FeatureId.MS_SSIM):
        return 1.0
    if fid in HIGHER_IS_BETTER:
        return spatial.tables.IDENTITY_CAP_DB
    return 0.0


def parse_features(names: Sequence) -> tuple[FeatureId, ...]:
    ids = tuple(FeatureId.parse(n) for n in names)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate feature ids")
    return ids


def frame_features(features, ref, dist, ref_prev=None, dist_prev=None,
                   bit_depth=8) -> list[float]:
    """Evaluate ``features`` on one (reference, distorted) surface pair.

    Temporal features are 0 when no previous surfaces are given.
    """
    out = []
    hvs = None
    for fid in features:
        if fid == FeatureId.SA:
            v = spatial.spatial_activity(ref, dist)
        elif fid == FeatureId.PSNR:
            v = spatial.psnr(ref, dist, bit_depth)
        elif fid in (FeatureId.PSNR_HVS, FeatureId.PSNR_HVS_M):
            if hvs is None:
                hvs = spatial.psnr_hvs_pair(ref, dist, bit_depth)
            v = hvs[0] if fid == FeatureId.PSNR_HVS else hvs[1]
        elif fid == FeatureId.SSIM:
            v = spatial.ssim(ref, dist, bit_depth)
        elif fid == FeatureId.MS_SSIM:
            v = spatial.ms_ssim(ref, dist, bit_depth)
        elif fid == FeatureId.GMSD:
            v = spatial.gmsd(ref, dist, bit_depth)
        elif fid == FeatureId.WS_PSNR:
            v = spatial.ws_psnr(ref, dist, bit_depth)
        elif fid == FeatureId.S_PSNR:
            v = spatial.s_psnr(ref, dist, bit_depth)
        elif fid in TEMPORAL_FEATURES:
            if ref_prev is None:
                v = 0.0
            elif fid == FeatureId.R_TI:
                v = temporal.relative_ti(ref, ref_prev, dist, dist_prev)
            else:
                v = temporal.temporal_gmsd(ref, ref_prev, dist, dist_prev, bit_depth)
        else:  # pragma: no cover
            raise KeyError(fid)
        out.append(float(v))
    return out
