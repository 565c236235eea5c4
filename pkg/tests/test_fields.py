import numpy as np
import pytest

from lsopc.fields import convolve, embed_kernel, shift
from lsopc.litho import gen_synthetic_kernels

from conftest import spatial_convolve


class TestShift:
    def test_single_pixel_translation(self):
        grid = np.zeros((3, 3), dtype=np.uint8)
        grid[1, 1] = 1
        out = shift(grid, 1, 0)
        expected = np.zeros((3, 3), dtype=np.uint8)
        expected[1, 2] = 1  # (x, y) = (2, 1)
        assert np.array_equal(out, expected)

    def test_zero_shift_is_identity(self, rng):
        grid = rng.standard_normal((7, 5))
        out = shift(grid, 0, 0)
        assert np.array_equal(out, grid)
        assert out is not grid

    def test_replicate_pad_hand_case(self):
        grid = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = shift(grid, 1, 0, pad="replicate")
        assert np.array_equal(out, [[1.0, 1.0], [3.0, 3.0]])

    def test_zero_pad_fills_zeros(self):
        grid = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = shift(grid, 0, -1, pad="zero")
        assert np.array_equal(out, [[3.0, 4.0], [0.0, 0.0]])

    def test_input_unmodified(self):
        grid = np.arange(9.0).reshape(3, 3)
        before = grid.copy()
        shift(grid, 1, 1)
        assert np.array_equal(grid, before)

    def test_oversized_shift_rejected(self):
        grid = np.zeros((4, 4))
        with pytest.raises(ValueError):
            shift(grid, 4, 0)
        with pytest.raises(ValueError):
            shift(grid, 0, -4)

    def test_unknown_pad_rejected(self):
        with pytest.raises(ValueError):
            shift(np.zeros((3, 3)), 1, 0, pad="wrap")

    def test_round_trip_restores_interior(self, rng):
        grid = rng.standard_normal((16, 16))
        for dx, dy in [(3, 0), (0, 2), (2, -3), (-1, -1)]:
            out = shift(shift(grid, dx, dy), -dx, -dy)
            m = max(abs(dx), abs(dy))
            assert np.array_equal(out[m:16 - m, m:16 - m],
                                  grid[m:16 - m, m:16 - m])


class TestConvolve:
    def test_delta_kernel_is_identity(self, rng):
        mask = (rng.random((16, 16)) < 0.4).astype(np.float64)
        delta = np.zeros((5, 5), dtype=np.complex128)
        delta[2, 2] = 1.0
        out = convolve(mask, delta)
        assert np.allclose(out.real, mask, atol=1e-12)
        assert np.allclose(out.imag, 0.0, atol=1e-12)

    def test_zero_mask_gives_zero(self):
        kernel = np.ones((3, 3), dtype=np.complex128)
        out = convolve(np.zeros((8, 8)), kernel)
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_ones_kernel_spreads_block(self):
        mask = np.zeros((8, 8))
        mask[4, 4] = 1.0
        out = convolve(mask, np.ones((3, 3), dtype=np.complex128)).real
        expected = np.zeros((8, 8))
        expected[3:6, 3:6] = 1.0
        assert np.allclose(out, expected, atol=1e-10)

    def test_ones_kernel_wraparound(self):
        mask = np.zeros((8, 8))
        mask[0, 0] = 1.0
        out = convolve(mask, np.ones((3, 3), dtype=np.complex128)).real
        lit = {(y, x) for y in (-1, 0, 1) for x in (-1, 0, 1)}
        expected = np.zeros((8, 8))
        for y, x in lit:
            expected[y % 8, x % 8] = 1.0
        assert np.allclose(out, expected, atol=1e-10)

    def test_linearity(self, rng):
        m1 = rng.random((32, 32))
        m2 = rng.random((32, 32))
        focus, _ = gen_synthetic_kernels(7, 2, seed=1)
        k = focus.kernels[1]
        lhs = convolve(2.5 * m1 - 0.75 * m2, k)
        rhs = 2.5 * convolve(m1, k) - 0.75 * convolve(m2, k)
        scale = np.abs(rhs).max()
        assert np.abs(lhs - rhs).max() <= 1e-9 * scale

    def test_matches_spatial_oracle(self, rng):
        mask = rng.random((64, 64))
        focus, defocus = gen_synthetic_kernels(9, 3, seed=5)
        for k in focus.kernels + defocus.kernels:
            out = convolve(mask, k)
            ref = spatial_convolve(mask, k.coeffs)
            assert np.abs(out - ref).max() <= 1e-9 * np.abs(ref).max()

    def test_kernel_larger_than_grid_rejected(self):
        with pytest.raises(ValueError):
            convolve(np.zeros((4, 4)), np.ones((5, 5), dtype=np.complex128))


class TestEmbedKernel:
    def test_delta_lands_at_origin(self):
        delta = np.zeros((3, 3), dtype=np.complex128)
        delta[1, 1] = 1.0
        emb = embed_kernel(delta, (8, 8))
        assert emb[0, 0] == 1.0
        assert np.count_nonzero(emb) == 1

    def test_preserves_mass(self):
        coeffs = np.arange(9.0).reshape(3, 3).astype(np.complex128)
        emb = embed_kernel(coeffs, (16, 16))
        assert np.isclose(emb.sum(), coeffs.sum())
