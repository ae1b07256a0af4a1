"""Per-video feature tensors and their CSV + JSON sidecar cache."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from ..errors import CacheParseError, ProvenanceMismatchError


@dataclass(eq=False)
class FeatureTensor:
    """Feature values of one video indexed by (frame, viewport, feature)."""

    video_id: str
    values: np.ndarray
    feature_names: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError("feature tensor must be 3-D (frames, viewports, features)")
        if self.values.shape[2] != len(self.feature_names):
            raise ValueError("feature axis does not match feature names")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_viewports(self) -> int:
        return self.values.shape[1]

    def equals(self, other: "FeatureTensor") -> bool:
        return (self.video_id == other.video_id and self.feature_names == other.feature_names
                and self.provenance == other.provenance
                and self.values.shape == other.values.shape
                and np.array_equal(self.values, other.values))


def cache_paths(directory, video_id: str) -> tuple[Path, Path]:
    d = Path(directory)
    return d / f"{video_id}.csv", d / f"{video_id}.json"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_feature_cache(tensor: FeatureTensor, directory) -> Path:
    """Write ``<video_id>.csv`` and its ``<video_id>.json`` provenance sidecar."""
    csv_path, meta_path = cache_paths(directory, tensor.video_id)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "viewport", *tensor.feature_names])
        F, N, _ = tensor.values.shape
        for f in range(F):
            for n in range(N):
                w.writerow([f, n, *(_fmt(v) for v in tensor.values[f, n])])
    meta = {"video_id": tensor.video_id, "shape": list(tensor.values.shape),
            "provenance": tensor.provenance}
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path


def check_provenance(found: Mapping, expected: Optional[Mapping], where="") -> None:
    if not expected:
        return
    diffs = {k: (found.get(k), v) for k, v in expected.items() if found.get(k) != v}
    if diffs:
        desc = ", ".join(f"{k}: cached {a!r} != current {b!r}" for k, (a, b) in sorted(diffs.items()))
        raise ProvenanceMismatchError(f"{where}{desc}")


def read_feature_cache(path, expected_provenance: Optional[Mapping] = None) -> FeatureTensor:
    """Load a cached tensor; ``path`` is the CSV file or its sidecar."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    meta_path = path.with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheParseError(f"{meta_path}: {exc}") from exc
    provenance = meta.get("provenance", {})
    check_provenance(provenance, expected_provenance, where=f"{csv_path}: ")
    try:
        F, N, M = (int(x) for x in meta["shape"])
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
    except (OSError, KeyError, ValueError) as exc:
        raise CacheParseError(f"{csv_path}: {exc}") from exc
    header = rows[0] if rows else []
    if header[:2] != ["frame", "viewport"] or len(header) != M + 2:
        raise CacheParseError(f"{csv_path}: unexpected header {header}")
    values = np.full((F, N, M), np.nan)
    seen = np.zeros((F, N), dtype=bool)
    for lineno, row in enumerate(rows[1:], 2):
        try:
            f, n = int(row[0]), int(row[1])
            vals = [float(x) for x in row[2:]]
        except (ValueError, IndexError) as exc:
            raise CacheParseError(f"{csv_path}:{lineno}: {exc}") from exc
        if len(vals) != M or not (0 <= f < F and 0 <= n < N) or seen[f, n]:
            raise CacheParseError(f"{csv_path}:{lineno}: malformed row")
        values[f, n] = vals
        seen[f, n] = True
    if not seen.all():
        raise CacheParseError(f"{csv_path}: missing (frame, viewport) rows")
    return FeatureTensor(meta.get("video_id", csv_path.stem), values, header[2:], provenance)
