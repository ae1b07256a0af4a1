import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage
from scipy.fft import idctn

import oracles
from omnivqa.errors import DimensionMismatchError, FrameTooSmallError
from omnivqa.frames import LumaFrame
from omnivqa.metrics import tables
from omnivqa.metrics.spatial import (erp_row_weights, gmsd, ms_ssim, ms_ssim_scales, psnr,
                                     psnr_hvs, psnr_hvs_m, psnr_hvs_pair, s_psnr,
                                     spatial_activity, ssim, ws_psnr)


def _fixtures(rng, n=20, lo=11, hi=24):
    for _ in range(n):
        h, w = rng.integers(lo, hi, size=2)
        a = rng.uniform(0, 255, (h, w))
        b = np.clip(a + rng.normal(0, rng.uniform(1, 40), (h, w)), 0, 255)
        yield a, b


def test_sa_matches_oracle(rng):
    for a, b in _fixtures(rng):
        assert spatial_activity(a, b) == pytest.approx(oracles.spatial_activity(a, b), abs=1e-9)


def test_sa_checkerboard_frozen():
    i, j = np.indices((8, 8))
    board = np.where((i + j) % 2 == 0, 0.0, 255.0)
    flat = np.full((8, 8), 128.0)
    assert spatial_activity(board, flat) == pytest.approx(180.31222920256963, abs=1e-9)
    assert oracles.spatial_activity(board, flat) == pytest.approx(180.31222920256963, abs=1e-9)


def test_gmsd_matches_oracle(rng):
    for a, b in _fixtures(rng):
        assert gmsd(a, b) == pytest.approx(oracles.gmsd(a, b), abs=1e-9)


def test_gmsd_localized_blur_frozen():
    i, j = np.indices((64, 64))
    r = 128 + 60 * np.sin(i / 3) * np.cos(j / 4) + 20 * ((i // 8 + j // 8) % 2)
    d = r.copy()
    d[20:36, 24:40] = ndimage.uniform_filter(r, 5)[20:36, 24:40]
    assert gmsd(r, d) == pytest.approx(0.022511273312649373, abs=1e-12)


def test_gmsd_identity_and_10bit(rng):
    a = rng.uniform(0, 1023, (32, 32))
    assert gmsd(a, a, bit_depth=10) == 0.0
    b = np.clip(a + rng.normal(0, 30, a.shape), 0, 1023)
    # rescaling to 8 bits makes the result depth-invariant
    assert gmsd(LumaFrame(a, 10), LumaFrame(b, 10)) == pytest.approx(
        gmsd(a * 255 / 1023, b * 255 / 1023), abs=1e-12)


def test_ssim_matches_oracle(rng):
    for a, b in _fixtures(rng, lo=11, hi=16):
        assert ssim(a, b) == pytest.approx(oracles.ssim(a, b), abs=1e-9)


def test_ssim_identity_and_inversion(rng):
    a = rng.uniform(0, 255, (32, 32))
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(a, 255 - a) < 0


def test_ssim_too_small():
    with pytest.raises(FrameTooSmallError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        psnr(np.zeros((8, 8)), np.zeros((8, 9)))


def test_psnr_closed_form():
    a = np.full((16, 16), 100.0)
    assert psnr(a, a + 1) == pytest.approx(48.130804, abs=1e-6)
    assert psnr(a, a) == 100.0


def test_psnr_hvs_single_block_frozen():
    i, j = np.indices((8, 8))
    ref = 50 + 2 * (i * 8 + j) + 10 * np.sin(i + 2 * j)
    delta = np.zeros((8, 8))
    delta[2, 3] = 60.0
    dist = ref + idctn(delta, norm="ortho")
    hvs, hvsm = psnr_hvs_pair(ref, dist)
    assert hvs == pytest.approx(30.023292722378482, abs=1e-9)
    assert hvsm == pytest.approx(34.52798122147683, abs=1e-9)


def test_psnr_hvs_matches_oracle(rng):
    for _ in range(20):
        h, w = 8 * rng.integers(1, 4, size=2)
        a = rng.uniform(0, 255, (h, w))
        b = np.clip(a + rng.normal(0, 10, (h, w)), 0, 255)
        ours = psnr_hvs_pair(a, b)
        ref = oracles.psnr_hvs_pair(a, b)
        assert ours[0] == pytest.approx(ref[0], abs=1e-9)
        assert ours[1] == pytest.approx(ref[1], abs=1e-9)


def test_tables_match_jpeg_derivation():
    np.testing.assert_array_equal(tables.CSF_COEFFICIENTS, oracles.csf_table())
    diff = np.argwhere(tables.CSF_COEFFICIENTS != np.array(oracles.derived_csf_table()))
    assert [tuple(d) for d in diff] == list(oracles.PUBLISHED_CSF_OVERRIDES)
    np.testing.assert_allclose(tables.MASK_COEFFICIENTS, oracles.mask_table(), atol=5e-7)


def test_psnr_hvs_m_not_below_hvs(rng):
    for a, b in _fixtures(rng, n=10, lo=16, hi=40):
        assert psnr_hvs_m(a, b) >= psnr_hvs(a, b) - 1e-9


def test_ms_ssim_identity_and_scales(rng):
    a = rng.uniform(0, 255, (200, 200))
    assert ms_ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ms_ssim_scales((200, 200)) == 5
    assert ms_ssim_scales((64, 64)) < 5
    b = np.clip(a + rng.normal(0, 20, a.shape), 0, 255)
    assert 0 < ms_ssim(a, b) < 1


def test_ws_psnr_weights():
    w = erp_row_weights(4)
    np.testing.assert_allclose(w, np.cos((np.arange(4) + 0.5 - 2) * math.pi / 4))
    a = np.full((32, 64), 50.0)
    assert ws_psnr(a, a + 1) == pytest.approx(48.130804, abs=1e-6)


def test_s_psnr_uniform_offset():
    a = np.full((32, 64), 50.0)
    assert s_psnr(a, a + 1, n_points=2000) == pytest.approx(48.130804, abs=1e-6)
    assert s_psnr(a, a) == 100.0


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (12, 12), elements=st.floats(0, 255)),
       arrays(np.float64, (12, 12), elements=st.floats(0, 255)))
def test_symmetry_and_bounds(a, b):
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert ssim(a, b) <= 1 + 1e-12
    g = gmsd(a, b)
    assert g >= 0 and g == pytest.approx(gmsd(b, a), abs=1e-12)
    assert psnr(a, b) <= 100.0
    assert spatial_activity(a, b) >= 0
