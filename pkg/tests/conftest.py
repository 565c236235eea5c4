"""Shared test helpers: independent oracles and small fixtures."""

import numpy as np
import pytest

from lsopc.litho import KernelSet, OpticalKernel


def spatial_convolve(mask, coeffs):
    """Independent circular-convolution oracle: per-tap periodic rolls.

    Uses the same centered embedding convention as the library but sums tap
    by tap in the spatial domain, never touching an FFT.
    """
    mask = np.asarray(mask, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    k = coeffs.shape[0]
    c = k // 2
    out = np.zeros(mask.shape, dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            if coeffs[i, j] != 0:
                # tap at offset (dy, dx) from the kernel center
                out += coeffs[i, j] * np.roll(mask, (i - c, j - c), axis=(0, 1))
    return out


def spatial_intensity(mask, kernels, dose=1.0):
    """Direct spatial-domain SOCS summation."""
    total = np.zeros(np.shape(mask), dtype=np.float64)
    for k in kernels.kernels:
        total += k.weight * np.abs(spatial_convolve(mask, k.coeffs)) ** 2
    return dose * total


def brute_tsdf(mask, d_upper=900.0, d_lower=-100.0):
    """Nearest-opposite-pixel TSDF oracle via an exact KD-tree query."""
    from scipy.spatial import cKDTree
    m = np.asarray(mask) != 0
    ones = np.argwhere(m)
    zeros = np.argwhere(~m)
    coords = np.argwhere(np.ones_like(m))
    d_to_one = cKDTree(ones).query(coords)[0].reshape(m.shape)
    d_to_zero = cKDTree(zeros).query(coords)[0].reshape(m.shape)
    phi = np.where(m, -(d_to_zero - 0.5), d_to_one - 0.5)
    return np.clip(phi, d_lower, d_upper)


def delta_kernel_set(side, condition, weight=1.0, big=5):
    """Kernel set holding a single discrete delta (exact identity)."""
    coeffs = np.zeros((big, big), dtype=np.complex128)
    coeffs[big // 2, big // 2] = 1.0
    return KernelSet([OpticalKernel(coeffs, weight)], condition)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
