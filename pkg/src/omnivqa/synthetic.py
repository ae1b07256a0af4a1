"""Synthetic ERP videos with controlled distortions.

Used by the test suite and the ``synth`` command to exercise the full
pipeline without a subjective dataset.  Each content is a smooth random
texture panning around the sphere; distortions combine Gaussian blur,
additive noise and frame freezing (which perturbs temporal information).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .dataset.frames import write_y4m
from .dataset.manifest import DatasetManifest, VideoEntry, load_manifest
from .frames import LumaFrame
from .metrics.spatial import gmsd
from .metrics.temporal import relative_ti


@dataclass(frozen=True)
class Distortion:
    blur: float = 0.0
    noise: float = 0.0
    freeze: int = 1  # keep every ``freeze``-th frame, repeat it in between

    def label(self) -> str:
        return f"b{self.blur:.2f}_n{self.noise:.2f}_f{self.freeze}"


def make_content(seed: int, n_frames: int = 6, width: int = 128, height: Optional[int] = None,
                 pan_px: float = 2.0) -> list[np.ndarray]:
    """Reference frames: band-limited texture panned horizontally with wrap."""
    height = height or width // 2
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.normal(size=(height, width)), sigma=rng.uniform(1.5, 4.0),
                                   mode=("nearest", "wrap"))
    base = (base - base.mean()) / (base.std() + 1e-12)
    detail = ndimage.gaussian_filter(rng.normal(size=(height, width)), 0.8, mode=("nearest", "wrap"))
    detail /= detail.std() + 1e-12
    img = 128.0 + 40.0 * base + rng.uniform(4.0, 14.0) * detail
    speed = pan_px * rng.uniform(0.5, 1.5)
    frames = []
    for f in range(n_frames):
        shifted = ndimage.shift(img, (0.0, speed * f), order=1, mode="grid-wrap")
        frames.append(np.clip(shifted, 0.0, 255.0))
    return frames


def apply_distortion(frames, d: Distortion, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for f, img in enumerate(frames):
        src = frames[(f // d.freeze) * d.freeze] if d.freeze > 1 else img
        x = src
        if d.blur > 0:
            x = ndimage.gaussian_filter(x, d.blur, mode=("nearest", "wrap"))
        if d.noise > 0:
            x = x + rng.normal(scale=d.noise, size=x.shape)
        out.append(np.clip(np.rint(x), 0.0, 255.0))
    return out


def quantize(frames) -> list[np.ndarray]:
    return [np.clip(np.rint(f), 0.0, 255.0) for f in frames]


def projection_drivers(ref, dist) -> tuple[float, float]:
    """Frame-averaged projection-domain GMSD and R-TI (frame 0 has no R-TI)."""
    g = [gmsd(r, d) for r, d in zip(ref, dist)]
    t = [relative_ti(ref[f], ref[f - 1], dist[f], dist[f - 1]) for f in range(1, len(ref))]
    return float(np.mean(g)), float(np.mean(t)) if t else 0.0


def dmos_function(gmsd_value, rti_value):
    """Known smooth ground truth used by the synthetic studies."""
    s = 4.0 * np.asarray(gmsd_value) + 0.6 * np.asarray(rti_value)
    return 90.0 * np.tanh(s)


def random_distortion(rng: np.random.Generator) -> Distortion:
    return Distortion(blur=float(rng.choice([0.0, rng.uniform(0.3, 2.5)])),
                      noise=float(rng.uniform(0.0, 14.0)),
                      freeze=int(rng.choice([1, 1, 2, 3])))


def ladder(kind: str = "noise", steps: int = 5) -> list[Distortion]:
    """Distortions of strictly increasing strength."""
    if kind == "noise":
        return [Distortion(noise=2.0 + 3.0 * k) for k in range(steps)]
    if kind == "blur":
        return [Distortion(blur=0.4 + 0.5 * k) for k in range(steps)]
    raise ValueError(f"unknown ladder {kind!r}")


def make_dataset(out_dir, n_contents: int = 12, levels: int = 3, n_frames: int = 6,
                 width: int = 128, seed: int = 0, noise_sigma: float = 2.0,
                 distortions=None) -> DatasetManifest:
    """Write reference/distorted Y4M files and a manifest with synthetic DMOS.

    ``distortions`` (a list of :class:`Distortion`) fixes the levels used for
    every content; otherwise each content draws ``levels`` random ones.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    videos = []
    for c in range(n_contents):
        group = f"c{c:03d}"
        ref = quantize(make_content(int(rng.integers(2 ** 31)), n_frames, width))
        ref_path = out / f"{group}_ref.y4m"
        write_y4m(ref_path, ref)
        dists = distortions or [random_distortion(rng) for _ in range(levels)]
        for k, d in enumerate(dists):
            vid = f"{group}_d{k}"
            dist = apply_distortion(ref, d, seed=int(rng.integers(2 ** 31)))
            g, t = projection_drivers(ref, dist)
            dmos = float(dmos_function(g, t))
            if noise_sigma:
                dmos += float(rng.normal(scale=noise_sigma))
            write_y4m(out / f"{vid}.y4m", dist)
            videos.append(VideoEntry(vid, group, ref_path.name, f"{vid}.y4m", n_frames,
                                     width, width // 2, 8, round(dmos, 6)))
    DatasetManifest(videos).save(out / "manifest.json")
    return load_manifest(out / "manifest.json")


def as_luma(frames) -> list[LumaFrame]:
    return [LumaFrame(f, 8) for f in frames]
