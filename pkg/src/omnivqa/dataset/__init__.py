from .cache import FeatureTensor, read_feature_cache, write_feature_cache
from .features import compute_features, compute_tensor, feature_provenance, normalize_mode
from .frames import read_frames, write_y4m, write_yuv420
from .manifest import DatasetManifest, VideoEntry, load_manifest
from .table import pool_cache_dir, read_pooled_table, write_pooled_table

__all__ = [
    "DatasetManifest",
    "FeatureTensor",
    "VideoEntry",
    "compute_features",
    "compute_tensor",
    "feature_provenance",
    "load_manifest",
    "normalize_mode",
    "pool_cache_dir",
    "read_feature_cache",
    "read_frames",
    "read_pooled_table",
    "write_feature_cache",
    "write_pooled_table",
    "write_y4m",
    "write_yuv420",
]
