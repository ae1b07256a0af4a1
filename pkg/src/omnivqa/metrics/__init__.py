from .registry import (ERP_ONLY_FEATURES, MODEL_FEATURES, TEMPORAL_FEATURES, FeatureId,
                       FeatureSample, frame_features, higher_is_better, ideal_value,
                       parse_features)
from .spatial import (gmsd, ms_ssim, psnr, psnr_hvs, psnr_hvs_m, s_psnr, sobel_map,
                      spatial_activity, ssim, ws_psnr)
from .temporal import relative_ti, temporal_gmsd, temporal_information

__all__ = [
    "ERP_ONLY_FEATURES",
    "FeatureId",
    "FeatureSample",
    "MODEL_FEATURES",
    "TEMPORAL_FEATURES",
    "frame_features",
    "gmsd",
    "higher_is_better",
    "ideal_value",
    "ms_ssim",
    "parse_features",
    "psnr",
    "psnr_hvs",
    "psnr_hvs_m",
    "relative_ti",
    "s_psnr",
    "sobel_map",
    "spatial_activity",
    "ssim",
    "temporal_gmsd",
    "temporal_information",
    "ws_psnr",
]
