"""Dataset manifests (JSON)."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from ..errors import DanglingPathError, DuplicateVideoError, ManifestError, MissingFieldError

log = logging.getLogger(__name__)

_REQUIRED = ("video_id", "group_id", "reference_path", "distorted_path")


@dataclass
class VideoEntry:
    video_id: str
    group_id: str
    reference_path: str
    distorted_path: str
    frame_count: Optional[int] = None
    width: Optional[int] = None
    height: Optional[int] = None
    bit_depth: int = 8
    dmos: Optional[float] = None
    projection: str = "erp"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DatasetManifest:
    videos: list
    path: Optional[str] = None

    def __len__(self):
        return len(self.videos)

    def __iter__(self):
        return iter(self.videos)

    def by_id(self) -> dict:
        return {v.video_id: v for v in self.videos}

    def to_dict(self) -> dict:
        return {"videos": [v.to_dict() for v in self.videos]}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def load_manifest(path, require_dmos: bool = False, check_paths: bool = True) -> DatasetManifest:
    """Read and validate a manifest.

    Relative media paths are resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    items = doc.get("videos") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise ManifestError(f"{path}: expected a 'videos' list")
    base = path.parent
    seen = set()
    videos = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ManifestError(f"{path}: entry {i} is not an object")
        name = item.get("video_id", f"#{i}")
        for key in _REQUIRED:
            if item.get(key) in (None, ""):
                raise MissingFieldError(f"{path}: video {name!r} lacks {key!r}")
        if require_dmos and item.get("dmos") is None:
            raise MissingFieldError(f"{path}: video {name!r} lacks 'dmos'")
        vid = str(item["video_id"])
        if vid in seen:
            raise DuplicateVideoError(f"{path}: duplicate video_id {vid!r}")
        seen.add(vid)
        unknown = set(item) - set(VideoEntry.__dataclass_fields__)
        if unknown:
            raise ManifestError(f"{path}: video {vid!r} has unknown fields {sorted(unknown)}")
        entry = VideoEntry(**item)
        entry.video_id, entry.group_id = vid, str(entry.group_id)
        if entry.projection != "erp":
            raise ManifestError(f"{path}: video {vid!r} projection {entry.projection!r} unsupported")
        for key in ("reference_path", "distorted_path"):
            p = Path(getattr(entry, key))
            if not p.is_absolute():
                p = base / p
            if check_paths and not p.exists():
                raise DanglingPathError(f"{path}: video {vid!r} {key} not found: {p}")
            setattr(entry, key, str(p))
        if entry.dmos is not None:
            entry.dmos = float(entry.dmos)
            if not math.isfinite(entry.dmos):
                raise ManifestError(f"{path}: video {vid!r} has non-finite dmos")
        if entry.width and entry.height and entry.width != 2 * entry.height:
            log.warning("video %s is %dx%d, not 2:1 ERP", vid, entry.width, entry.height)
        videos.append(entry)
    return DatasetManifest(videos, str(path))
