"""Pooled per-video feature tables (CSV)."""

from __future__ import annotations

import csv
import math
from typing import Optional

import numpy as np

from ..errors import CacheParseError
from ..pooling import PoolingConfig, pool_tensor
from ..regression import TrainingSet, layout_columns
from .cache import cache_paths, read_feature_cache
from .manifest import DatasetManifest


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else format(float(v), ".17g")


def write_pooled_table(path, data: TrainingSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["video_id", "group_id", "dmos", *data.feature_names])
        for i, vid in enumerate(data.video_ids):
            w.writerow([vid, data.groups[i], _fmt(data.y[i]), *(_fmt(v) for v in data.X[i])])


def read_pooled_table(path) -> TrainingSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:3] != ["video_id", "group_id", "dmos"]:
        raise CacheParseError(f"{path}: expected header video_id,group_id,dmos,...")
    names = rows[0][3:]
    ids, groups, y, X = [], [], [], []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(names) + 3:
            raise CacheParseError(f"{path}:{lineno}: expected {len(names) + 3} fields")
        try:
            y.append(float(row[2]) if row[2] != "" else math.nan)
            X.append([float(v) for v in row[3:]])
        except ValueError as exc:
            raise CacheParseError(f"{path}:{lineno}: {exc}") from exc
        ids.append(row[0])
        groups.append(row[1])
    return TrainingSet(ids, groups, np.asarray(X).reshape(len(ids), len(names)), y, names)


def pool_cache_dir(manifest: DatasetManifest, cache_dir, cfg: PoolingConfig,
                   expected_provenance: Optional[dict] = None) -> TrainingSet:
    """Pool every manifest video's cached tensor into one table."""
    ids, groups, y, X = [], [], [], []
    names = None
    for entry in manifest:
        csv_path, _ = cache_paths(cache_dir, entry.video_id)
        t = read_feature_cache(csv_path, expected_provenance)
        cols = layout_columns(t.n_viewports, t.feature_names)
        if names is None:
            names = cols
        elif cols != names:
            raise CacheParseError(f"{csv_path}: layout differs from earlier videos")
        ids.append(entry.video_id)
        groups.append(entry.group_id)
        y.append(math.nan if entry.dmos is None else entry.dmos)
        X.append(pool_tensor(t.values, cfg, t.feature_names))
    return TrainingSet(ids, groups, np.asarray(X), y, names or [])
