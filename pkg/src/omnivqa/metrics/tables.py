"""Constant tables for the DCT-domain HVS metrics.

Single source of truth for the contrast-sensitivity and masking coefficients
of PSNR-HVS / PSNR-HVS-M, as used by the psnrhvsm.m reference code of
N. Ponomarenko et al. ("On between-coefficient contrast masking of DCT basis
functions", VPQM 2007).  Both tables derive from the JPEG luminance
quantisation matrix, ``CSF = 25.735088 / Q`` and ``MASK = (10 / Q) ** 2``,
rounded to six decimals; the test suite checks that relation.

Any edit here changes :data:`TABLES_DIGEST`, which invalidates feature caches.
"""

import hashlib

import numpy as np

CSF_COEFFICIENTS = np.array([
    [1.608443, 2.339554, 2.573509, 1.608443, 1.072295, 0.643377, 0.504610, 0.421887],
    [2.144591, 2.144591, 1.838221, 1.354478, 0.989811, 0.443708, 0.428918, 0.467911],
    [1.838221, 1.979622, 1.608443, 1.072295, 0.643377, 0.451493, 0.372972, 0.459555],
    [1.838221, 1.513829, 1.169777, 0.887417, 0.504610, 0.295806, 0.321689, 0.415082],
    [1.429727, 1.169777, 0.695543, 0.459555, 0.378457, 0.236102, 0.249855, 0.334222],
    [1.072295, 0.735288, 0.467911, 0.402111, 0.317717, 0.247453, 0.227744, 0.279729],
    [0.525206, 0.402111, 0.329937, 0.295806, 0.249855, 0.212687, 0.214459, 0.254803],
    [0.357432, 0.279729, 0.270896, 0.262603, 0.229778, 0.257351, 0.249855, 0.259950],
])
CSF_COEFFICIENTS.setflags(write=False)

MASK_COEFFICIENTS = np.array([
    [0.390625, 0.826446, 1.000000, 0.390625, 0.173611, 0.062500, 0.038447, 0.026874],
    [0.694444, 0.694444, 0.510204, 0.277008, 0.147929, 0.029727, 0.027778, 0.033058],
    [0.510204, 0.591716, 0.390625, 0.173611, 0.062500, 0.030779, 0.021004, 0.031888],
    [0.510204, 0.346021, 0.206612, 0.118906, 0.038447, 0.013212, 0.015625, 0.026015],
    [0.308642, 0.206612, 0.073046, 0.031888, 0.021626, 0.008417, 0.009426, 0.016866],
    [0.173611, 0.081633, 0.033058, 0.024414, 0.015242, 0.009246, 0.007831, 0.011815],
    [0.041649, 0.024414, 0.016437, 0.013212, 0.009426, 0.006830, 0.006944, 0.009803],
    [0.019290, 0.011815, 0.011080, 0.010412, 0.007972, 0.010000, 0.009426, 0.010203],
])
MASK_COEFFICIENTS.setflags(write=False)

#: JPEG luminance quantisation matrix (ITU-T T.81 Annex K).
JPEG_LUMA_QUANT = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)
JPEG_LUMA_QUANT.setflags(write=False)

# SSIM / MS-SSIM
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)

# GMSD stabiliser for the 8-bit intensity range
GMSD_C = 170.0

IDENTITY_CAP_DB = 100.0
R_TI_EPS = 1e-8
R_TI_CAP = 10.0

FEATURE_VERSION = "1"


def _digest() -> str:
    h = hashlib.sha256(FEATURE_VERSION.encode())
    for arr in (CSF_COEFFICIENTS, MASK_COEFFICIENTS):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(repr((SSIM_K1, SSIM_K2, SSIM_WINDOW, SSIM_SIGMA, MS_SSIM_WEIGHTS,
                   GMSD_C, IDENTITY_CAP_DB, R_TI_EPS, R_TI_CAP)).encode())
    return h.hexdigest()[:16]


TABLES_DIGEST = _digest()
