"""Full-reference spatial quality metrics on luma planes.

All functions accept 2-D arrays or :class:`~omnivqa.frames.LumaFrame`
objects.  ``bit_depth`` defaults to the frame's bit depth, or 8 for bare
arrays.  The PSNR family saturates at :data:`~.tables.IDENTITY_CAP_DB`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft, ndimage

from ..errors import DimensionMismatchError, FrameTooSmallError
from ..frames import as_array, peak_of
from ..geometry import direction_to_erp_pixel
from . import tables

SOBEL = np.array([[1.0, 0.0, -1.0],
                  [2.0, 0.0, -2.0],
                  [1.0, 0.0, -1.0]])
PREWITT = np.array([[1.0, 0.0, -1.0],
                    [1.0, 0.0, -1.0],
                    [1.0, 0.0, -1.0]]) / 3.0


def _pair(ref, dist, bit_depth):
    peak = peak_of(ref, bit_depth)
    a = as_array(ref)
    b = as_array(dist)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return a, b, peak


def _require_min(a, n, what):
    if a.ndim != 2 or a.shape[0] < n or a.shape[1] < n:
        raise FrameTooSmallError(f"{what} needs frames of at least {n}x{n}, got {a.shape}")


def _psnr_from_mse(mse: float, peak: float) -> float:
    if mse <= 0.0:
        return tables.IDENTITY_CAP_DB
    return min(10.0 * math.log10(peak * peak / mse), tables.IDENTITY_CAP_DB)


def gradient_magnitude(z, kernel) -> np.ndarray:
    """Magnitude of the response to ``kernel`` and its transpose.

    Borders are handled by edge replication.
    """
    z = np.asarray(z, dtype=np.float64)
    gx = ndimage.correlate(z, kernel, mode="nearest")
    gy = ndimage.correlate(z, kernel.T, mode="nearest")
    return np.sqrt(gx * gx + gy * gy)


def sobel_map(z) -> np.ndarray:
    z = as_array(z)
    _require_min(z, 3, "sobel_map")
    return gradient_magnitude(z, SOBEL)


def spatial_activity(ref, dist) -> float:
    """RMS difference between the Sobel maps of two frames."""
    a, b, _ = _pair(ref, dist, None)
    s = sobel_map(a) - sobel_map(b)
    return float(np.sqrt(np.mean(s * s)))


def psnr(ref, dist, bit_depth=None) -> float:
    a, b, peak = _pair(ref, dist, bit_depth)
    d = a - b
    return _psnr_from_mse(float(np.mean(d * d)), peak)


# --- PSNR-HVS / PSNR-HVS-M -------------------------------------------------

def _blocks(img):
    h, w = img.shape
    h8, w8 = h - h % 8, w - w % 8
    return (img[:h8, :w8].reshape(h8 // 8, 8, w8 // 8, 8)
            .transpose(0, 2, 1, 3).reshape(-1, 8, 8))


def _dct_blocks(blocks):
    return fft.dctn(blocks, axes=(1, 2), norm="ortho")


def _sum_sq_dev(x, axes):
    return np.sum((x - x.mean(axis=axes, keepdims=True)) ** 2, axis=axes)


def _masking_strength(blocks, coeffs):
    """Per-block contrast-masking strength of the psnrhvsm.m reference."""
    ac = coeffs * coeffs * tables.MASK_COEFFICIENTS
    energy = ac.sum(axis=(1, 2)) - ac[:, 0, 0]
    total = _sum_sq_dev(blocks, (1, 2))
    quads = (_sum_sq_dev(blocks[:, :4, :4], (1, 2)) + _sum_sq_dev(blocks[:, :4, 4:], (1, 2))
             + _sum_sq_dev(blocks[:, 4:, 4:], (1, 2)) + _sum_sq_dev(blocks[:, 4:, :4], (1, 2)))
    pop = np.divide(quads, total, out=np.zeros_like(total), where=total != 0)
    return np.sqrt(energy * pop) / 32.0


def psnr_hvs_pair(ref, dist, bit_depth=None) -> tuple[float, float]:
    """Return ``(psnr_hvs, psnr_hvs_m)`` computed in one pass.

    Frames are rescaled to the 8-bit range because the masking model is
    calibrated for it.  Trailing partial 8x8 blocks are dropped.
    """
    a, b, peak = _pair(ref, dist, bit_depth)
    _require_min(a, 8, "psnr_hvs")
    scale = 255.0 / peak
    ba = _blocks(a * scale) if scale != 1.0 else _blocks(a)
    bb = _blocks(b * scale) if scale != 1.0 else _blocks(b)
    ca = _dct_blocks(ba)
    cb = _dct_blocks(bb)
    u = np.abs(ca - cb)
    num = u.size
    s_hvs = float(np.sum((u * tables.CSF_COEFFICIENTS) ** 2)) / num

    mask = np.maximum(_masking_strength(ba, ca), _masking_strength(bb, cb))
    thr = mask[:, None, None] / tables.MASK_COEFFICIENTS
    um = np.maximum(u - thr, 0.0)
    um[:, 0, 0] = u[:, 0, 0]
    s_hvs_m = float(np.sum((um * tables.CSF_COEFFICIENTS) ** 2)) / num
    return _psnr_from_mse(s_hvs, 255.0), _psnr_from_mse(s_hvs_m, 255.0)


def psnr_hvs(ref, dist, bit_depth=None) -> float:
    return psnr_hvs_pair(ref, dist, bit_depth)[0]


def psnr_hvs_m(ref, dist, bit_depth=None) -> float:
    return psnr_hvs_pair(ref, dist, bit_depth)[1]


# --- SSIM / MS-SSIM ----------------------------------------------------------

@lru_cache(maxsize=4)
def gaussian_window(size: int = tables.SSIM_WINDOW, sigma: float = tables.SSIM_SIGMA) -> np.ndarray:
    """Normalised 1-D Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    g.setflags(write=False)
    return g


def _filter_valid(img, g):
    n = g.size
    tmp = sliding_window_view(img, n, axis=1) @ g
    return sliding_window_view(tmp, n, axis=0) @ g


def _ssim_maps(a, b, peak):
    g = gaussian_window()
    c1 = (tables.SSIM_K1 * peak) ** 2
    c2 = (tables.SSIM_K2 * peak) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    saa = _filter_valid(a * a, g) - mu_a * mu_a
    sbb = _filter_valid(b * b, g) - mu_b * mu_b
    sab = _filter_valid(a * b, g) - mu_a * mu_b
    lum = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    cs = (2.0 * sab + c2) / (saa + sbb + c2)
    return lum, cs


def ssim(ref, dist, bit_depth=None) -> float:
    """Mean SSIM over the valid region of an 11x11 Gaussian window."""
    a, b, peak = _pair(ref, dist, bit_depth)
    _require_min(a, tables.SSIM_WINDOW, "ssim")
    lum, cs = _ssim_maps(a, b, peak)
    return float(np.mean(lum * cs))


def ms_ssim_scales(shape) -> int:
    """Number of scales usable for a frame of ``shape`` (at most 5)."""
    m = 0
    side = min(shape)
    while m < len(tables.MS_SSIM_WEIGHTS) and side >= tables.SSIM_WINDOW:
        m += 1
        side = (side + 1) // 2
    return m


def _downsample(img):
    p = np.pad(img, ((0, 1), (0, 1)), mode="edge")
    avg = (p[:-1, :-1] + p[1:, :-1] + p[:-1, 1:] + p[1:, 1:]) * 0.25
    return avg[::2, ::2]


def ms_ssim(ref, dist, bit_depth=None, scales=None) -> float:
    """Multi-scale SSIM.

    Frames too small for five scales use fewer, with the leading exponents
    renormalised to sum to one.  Per-scale terms are clamped at zero before
    exponentiation so the result stays real.
    """
    a, b, peak = _pair(ref, dist, bit_depth)
    _require_min(a, tables.SSIM_WINDOW, "ms_ssim")
    n = ms_ssim_scales(a.shape) if scales is None else min(int(scales), ms_ssim_scales(a.shape))
    w = np.asarray(tables.MS_SSIM_WEIGHTS[:n])
    w = w / w.sum()
    out = 1.0
    for m in range(n):
        lum, cs = _ssim_maps(a, b, peak)
        if m == n - 1:
            term = float(np.mean(lum * cs))
        else:
            term = float(np.mean(cs))
            a = _downsample(a)
            b = _downsample(b)
        out *= max(term, 0.0) ** w[m]
    return float(out)


# --- GMSD -----------------------------------------------------------------------

def gms_map(ref, dist, bit_depth=None, c=tables.GMSD_C, downsample=False) -> np.ndarray:
    """Gradient-magnitude similarity map on Prewitt gradients.

    Inputs are rescaled to the 8-bit range so that ``c`` keeps its meaning.
    """
    a, b, peak = _pair(ref, dist, bit_depth)
    _require_min(a, 3, "gmsd")
    scale = 255.0 / peak
    if scale != 1.0:
        a = a * scale
        b = b * scale
    if downsample:
        a = _downsample(a)
        b = _downsample(b)
    ma = gradient_magnitude(a, PREWITT)
    mb = gradient_magnitude(b, PREWITT)
    return (2.0 * ma * mb + c) / (ma * ma + mb * mb + c)


def gmsd(ref, dist, bit_depth=None, c=tables.GMSD_C, downsample=False) -> float:
    return float(np.std(gms_map(ref, dist, bit_depth, c, downsample)))


# --- projection-aware PSNR ------------------------------------------------------

@lru_cache(maxsize=16)
def erp_row_weights(height: int) -> np.ndarray:
    j = np.arange(height, dtype=np.float64)
    w = np.cos((j + 0.5 - height / 2.0) * math.pi / height)
    w.setflags(write=False)
    return w


def ws_psnr(ref, dist, bit_depth=None) -> float:
    """PSNR with ERP rows weighted by the sphere area they cover."""
    a, b, peak = _pair(ref, dist, bit_depth)
    w = erp_row_weights(a.shape[0])
    d = a - b
    row_mse = np.mean(d * d, axis=1)
    return _psnr_from_mse(float(np.sum(row_mse * w) / np.sum(w)), peak)


S_PSNR_DEFAULT_POINTS = 655362


@lru_cache(maxsize=8)
def fibonacci_sphere(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Near-uniform ``(azimuth, elevation)`` samples on the unit sphere."""
    i = np.arange(n_points, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / n_points
    el = np.arcsin(z)
    az = np.mod(i * math.pi * (3.0 - math.sqrt(5.0)), 2.0 * math.pi) - math.pi
    az.setflags(write=False)
    el.setflags(write=False)
    return az, el


@lru_cache(maxsize=8)
def _sphere_lookup(n_points: int, width: int, height: int):
    az, el = fibonacci_sphere(n_points)
    u, v = direction_to_erp_pixel(az, el, width, height)
    cols = np.mod(np.floor(u).astype(np.int64), width)
    rows = np.clip(np.floor(v).astype(np.int64), 0, height - 1)
    flat = rows * width + cols
    flat.setflags(write=False)
    return flat


def s_psnr(ref, dist, bit_depth=None, n_points: int = S_PSNR_DEFAULT_POINTS) -> float:
    """PSNR over a Fibonacci lattice of sphere points, nearest-neighbour lookup."""
    a, b, peak = _pair(ref, dist, bit_depth)
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    idx = _sphere_lookup(int(n_points), a.shape[1], a.shape[0])
    d = a.ravel()[idx] - b.ravel()[idx]
    return _psnr_from_mse(float(np.mean(d * d)), peak)
