"""Viewport sampling patterns and gnomonic rendering of equirectangular frames.

Conventions
-----------
Directions are ``(azimuth, elevation)`` in radians.  Azimuth grows to the
right of the ERP frame and lies in ``[-pi, pi)``; elevation grows upwards and
lies in ``[-pi/2, pi/2]``.  ``(0, 0)`` is the centre of the ERP frame.

Pixel coordinates are continuous: pixel ``i`` covers ``[i, i + 1)`` and its
centre sits at ``i + 0.5``.  Viewport pixel coordinates passed to
:func:`viewport_pixel_to_direction` are integer-style indices (``0`` is the
first pixel) and the half-pixel offset is applied internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidFovError
from .frames import LumaFrame

__all__ = [
    "Direction",
    "ViewportSpec",
    "PatternKind",
    "SamplingPattern",
    "make_pattern",
    "default_viewport_size",
    "viewport_pixel_to_direction",
    "direction_to_viewport_pixel",
    "direction_to_erp_pixel",
    "viewport_sampling_grid",
    "render_viewport",
    "render_collage",
    "COLLAGE_GRID",
]

TWO_PI = 2.0 * math.pi


def _wrap_azimuth(az):
    """Wrap azimuth(s) into ``[-pi, pi)``."""
    return np.mod(np.asarray(az, dtype=np.float64) + math.pi, TWO_PI) - math.pi


@dataclass(frozen=True)
class Direction:
    azimuth: float
    elevation: float

    def __post_init__(self):
        if not -math.pi / 2 <= self.elevation <= math.pi / 2:
            raise ValueError(f"elevation {self.elevation} outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(cls, azimuth: float, elevation: float) -> "Direction":
        az = float(_wrap_azimuth(math.radians(azimuth)))
        return cls(az, math.radians(elevation))

    def unit_vector(self) -> np.ndarray:
        ce = math.cos(self.elevation)
        return np.array([ce * math.sin(self.azimuth), math.sin(self.elevation),
                         ce * math.cos(self.azimuth)])


@dataclass(frozen=True)
class ViewportSpec:
    center: Direction
    fov_h: float
    fov_v: float
    width: int
    height: int

    def __post_init__(self):
        for name in ("fov_h", "fov_v"):
            v = getattr(self, name)
            if not 0.0 < v < math.pi:
                raise InvalidFovError(f"{name}={v} must lie strictly inside (0, pi)")
        if int(self.width) < 2 or int(self.height) < 2:
            raise ValueError("viewport width and height must be >= 2")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (right, up, forward) unit vectors of the tangent plane."""
        az, el = self.center.azimuth, self.center.elevation
        forward = self.center.unit_vector()
        right = np.array([math.cos(az), 0.0, -math.sin(az)])
        up = np.array([-math.sin(el) * math.sin(az), math.cos(el),
                       -math.sin(el) * math.cos(az)])
        return right, up, forward


class PatternKind(str, Enum):
    UNIFORM = "uniform"
    TROPICAL = "tropical"
    EQUATORIAL = "equatorial"


# (elevations, azimuths) in degrees.  Elevation rings are listed top-down so
# that the collage shows the northern hemisphere in its upper rows.
_PATTERN_ANGLES = {
    PatternKind.UNIFORM: ((60.0, 30.0, 0.0, -30.0, -60.0),
                          (0.0, 72.0, 144.0, 216.0, 288.0)),
    PatternKind.TROPICAL: ((30.0, -30.0), tuple(45.0 * k for k in range(8))),
    PatternKind.EQUATORIAL: ((0.0,), tuple(40.0 * k for k in range(9))),
}

#: (rows, columns) of the collage tiling for each pattern kind.
COLLAGE_GRID = {
    PatternKind.UNIFORM: (5, 5),
    PatternKind.TROPICAL: (2, 8),
    PatternKind.EQUATORIAL: (1, 9),
}


@dataclass(frozen=True)
class SamplingPattern:
    """An ordered set of viewports.

    Specs are ordered row-major: elevation rings from north to south, and
    within a ring by increasing azimuth (0, 72, 144, ... degrees, wrapped to
    ``[-pi, pi)``).  The same order is used for collage tiles and for the
    viewport index of feature tensors.
    """

    kind: PatternKind
    specs: tuple[ViewportSpec, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    @property
    def grid(self) -> tuple[int, int]:
        return COLLAGE_GRID[self.kind]


def default_viewport_size(fov_deg: float, erp_width: int) -> tuple[int, int]:
    """Viewport size whose angular density matches the ERP equator."""
    w = max(2, int(round(fov_deg / 360.0 * erp_width)))
    return w, w


def make_pattern(kind, fov_deg: float, vp_size: Sequence[int]) -> SamplingPattern:
    """Build the fixed direction grid for ``kind`` with a square field of view."""
    kind = PatternKind(kind)
    if not 0.0 < fov_deg < 180.0:
        raise InvalidFovError(f"fov {fov_deg} deg outside (0, 180)")
    width, height = (int(vp_size[0]), int(vp_size[1]))
    if width <= 0 or height <= 0:
        raise ValueError("viewport size must be positive")
    fov = math.radians(fov_deg)
    elevations, azimuths = _PATTERN_ANGLES[kind]
    specs = tuple(
        ViewportSpec(Direction.from_degrees(az, el), fov, fov, width, height)
        for el in elevations
        for az in azimuths
    )
    return SamplingPattern(kind, specs)


def _tangent_coords(spec: ViewportSpec, px, py):
    x = (2.0 * (np.asarray(px, dtype=np.float64) + 0.5) / spec.width - 1.0) * math.tan(spec.fov_h / 2)
    y = (2.0 * (np.asarray(py, dtype=np.float64) + 0.5) / spec.height - 1.0) * math.tan(spec.fov_v / 2)
    return x, y


def _rays(spec: ViewportSpec, px, py):
    x, y = _tangent_coords(spec, px, py)
    right, up, forward = spec.basis()
    # screen y grows downwards, world up is -y
    ray = (x[..., None] * right + (-y)[..., None] * up + forward)
    return ray / np.linalg.norm(ray, axis=-1, keepdims=True)


def _ray_to_angles(ray):
    az = np.arctan2(ray[..., 0], ray[..., 2])
    el = np.arctan2(ray[..., 1], np.hypot(ray[..., 0], ray[..., 2]))
    return _wrap_azimuth(az), el


def viewport_pixel_to_direction(spec: ViewportSpec, px: float, py: float) -> Direction:
    az, el = _ray_to_angles(_rays(spec, np.asarray([px]), np.asarray([py])))
    return Direction(float(az[0]), float(el[0]))


def direction_to_viewport_pixel(spec: ViewportSpec, direction: Direction) -> tuple[float, float]:
    """Inverse of :func:`viewport_pixel_to_direction`.

    Returns ``(nan, nan)`` for directions behind the tangent plane.
    """
    right, up, forward = spec.basis()
    v = direction.unit_vector()
    cz = float(v @ forward)
    if cz <= 0.0:
        return math.nan, math.nan
    x = float(v @ right) / cz
    y = -float(v @ up) / cz
    px = (x / math.tan(spec.fov_h / 2) + 1.0) * spec.width / 2.0 - 0.5
    py = (y / math.tan(spec.fov_v / 2) + 1.0) * spec.height / 2.0 - 0.5
    return px, py


def direction_to_erp_pixel(azimuth, elevation, erp_w: int, erp_h: int):
    """Map direction(s) to continuous ERP pixel coordinates ``(u, v)``.

    Accepts scalars or arrays; ``u`` wraps periodically into ``[0, erp_w)``.
    """
    u = np.mod((np.asarray(azimuth, dtype=np.float64) / TWO_PI + 0.5) * erp_w, erp_w)
    v = (0.5 - np.asarray(elevation, dtype=np.float64) / math.pi) * erp_h
    if np.ndim(u) == 0:
        return float(u), float(v)
    return u, v


@lru_cache(maxsize=256)
def viewport_sampling_grid(spec: ViewportSpec, erp_w: int, erp_h: int):
    """Precomputed bilinear taps ``(x0, x1, fx, y0, y1, fy)`` for one viewport.

    Horizontal indices wrap around the ERP seam; vertical indices clamp at
    the poles.  Arrays are read-only and shared between calls.
    """
    py, px = np.mgrid[0:spec.height, 0:spec.width]
    az, el = _ray_to_angles(_rays(spec, px, py))
    u, v = direction_to_erp_pixel(az, el, erp_w, erp_h)
    x = u - 0.5
    y = np.clip(v - 0.5, 0.0, erp_h - 1)
    x0f = np.floor(x)
    y0f = np.floor(y)
    fx = x - x0f
    fy = y - y0f
    x0 = np.mod(x0f.astype(np.int64), erp_w)
    x1 = np.mod(x0 + 1, erp_w)
    y0 = y0f.astype(np.int64)
    y1 = np.minimum(y0 + 1, erp_h - 1)
    taps = (x0, x1, fx, y0, y1, fy)
    for a in taps:
        a.setflags(write=False)
    return taps


def _sample_bilinear(img: np.ndarray, taps) -> np.ndarray:
    x0, x1, fx, y0, y1, fy = taps
    a = img[y0, x0]
    b = img[y0, x1]
    c = img[y1, x0]
    d = img[y1, x1]
    # lerp form keeps constant inputs exactly constant
    top = a + fx * (b - a)
    bot = c + fx * (d - c)
    return top + fy * (bot - top)


def render_viewport(erp, spec: ViewportSpec):
    """Render one gnomonic viewport from an ERP frame.

    ``erp`` may be a :class:`LumaFrame` (a LumaFrame is returned) or a 2-D
    array (a float64 array is returned).
    """
    if isinstance(erp, LumaFrame):
        out = render_viewport(erp.samples, spec)
        return LumaFrame(out, erp.bit_depth)
    img = np.asarray(erp, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty ERP frame")
    h, w = img.shape
    return _sample_bilinear(img, viewport_sampling_grid(spec, w, h))


def render_collage(erp, pattern: SamplingPattern):
    """Tile all viewports of ``pattern`` into one frame, row-major.

    Tile ``(r, c)`` holds viewport ``r * cols + c`` where ``(rows, cols)`` is
    :data:`COLLAGE_GRID` for the pattern kind.
    """
    if len(pattern) == 0:
        raise ValueError("empty sampling pattern")
    if isinstance(erp, LumaFrame):
        return LumaFrame(render_collage(erp.samples, pattern), erp.bit_depth)
    rows, cols = pattern.grid
    vh, vw = pattern.specs[0].height, pattern.specs[0].width
    out = np.empty((rows * vh, cols * vw), dtype=np.float64)
    for i, spec in enumerate(pattern.specs):
        r, c = divmod(i, cols)
        out[r * vh:(r + 1) * vh, c * vw:(c + 1) * vw] = render_viewport(erp, spec)
    return out
