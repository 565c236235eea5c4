import numpy as np
import pytest

from lsopc.metrics import MetricsReport, fracture, l2_error, pvband, shot_count


class TestL2Error:
    def test_zero_on_match(self, rng):
        z = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        assert l2_error(z, z.copy()) == 0

    def test_counts_disagreements(self):
        a = np.zeros((8, 8), dtype=np.uint8)
        b = a.copy()
        b[0, :7] = 1
        assert l2_error(a, b) == 7

    def test_pitch_scaling(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = a.copy()
        b[1, 1] = 1
        assert l2_error(a, b, pitch=3) == 9

    def test_xor_popcount_oracle(self, rng):
        a = (rng.random((32, 32)) < 0.5).astype(np.uint8)
        b = (rng.random((32, 32)) < 0.5).astype(np.uint8)
        assert l2_error(a, b) == int((a ^ b).sum())

    def test_symmetry(self, rng):
        a = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        b = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        assert l2_error(a, b) == l2_error(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            l2_error(np.zeros((4, 4)), np.zeros((4, 5)))


class TestPvband:
    def test_zero_on_match(self, rng):
        z = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        assert pvband(z, z.copy()) == 0

    def test_nested_squares(self):
        outer = np.zeros((16, 16), dtype=np.uint8)
        outer[3:13, 3:13] = 1
        inner = np.zeros((16, 16), dtype=np.uint8)
        inner[4:12, 4:12] = 1
        assert pvband(inner, outer) == 100 - 64

    def test_xor_popcount_oracle(self, rng):
        a = (rng.random((32, 32)) < 0.5).astype(np.uint8)
        b = (rng.random((32, 32)) < 0.5).astype(np.uint8)
        assert pvband(a, b) == int((a ^ b).sum())

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            pvband(np.zeros((4, 4)), np.zeros((5, 4)))


def paint(rects, shape):
    grid = np.zeros(shape, dtype=np.int64)
    for x, y, w, h in rects:
        grid[y:y + h, x:x + w] += 1
    return grid


class TestFracture:
    def test_solid_rectangle_is_one_shot(self):
        mask = np.zeros((16, 16), dtype=np.uint8)
        mask[2:9, 3:14] = 1
        rects = fracture(mask)
        assert rects == [(3, 2, 11, 7)]
        assert shot_count(mask) == 1

    def test_empty_mask(self):
        assert fracture(np.zeros((8, 8), dtype=np.uint8)) == []
        assert shot_count(np.zeros((8, 8), dtype=np.uint8)) == 0

    def test_plus_sign_is_three_shots(self):
        mask = np.zeros((9, 9), dtype=np.uint8)
        mask[3:6, 0:9] = 1   # horizontal 9x3 bar
        mask[0:9, 3:6] = 1   # vertical 3x9 bar
        rects = fracture(mask)
        assert len(rects) == 3
        painted = paint(rects, mask.shape)
        assert (painted <= 1).all()
        assert np.array_equal((painted > 0).astype(np.uint8), mask)

    def test_reconstruction_on_random_masks(self, rng):
        for _ in range(10):
            mask = (rng.random((24, 24)) < 0.35).astype(np.uint8)
            rects = fracture(mask)
            painted = paint(rects, mask.shape)
            assert (painted <= 1).all(), "rectangles overlap"
            assert np.array_equal((painted > 0).astype(np.uint8), mask)
            assert sum(w * h for _, _, w, h in rects) == int(mask.sum())

    def test_k_disjoint_rectangles_need_at_most_k_shots(self, rng):
        mask = np.zeros((40, 40), dtype=np.uint8)
        placed = 0
        for _ in range(6):
            x, y = rng.integers(0, 30, size=2)
            w, h = rng.integers(2, 8, size=2)
            if mask[max(y - 1, 0):y + h + 1, max(x - 1, 0):x + w + 1].any():
                continue
            mask[y:y + h, x:x + w] = 1
            placed += 1
        assert placed >= 1
        assert shot_count(mask) <= placed

    def test_tie_break_topmost_leftmost(self):
        mask = np.zeros((8, 8), dtype=np.uint8)
        mask[0, 0:2] = 1   # two equal-area 2x1 candidates
        mask[4, 3:5] = 1
        rects = fracture(mask)
        assert rects[0] == (0, 0, 2, 1)


class TestMetricsReport:
    def test_as_dict_schema(self):
        d = MetricsReport(l2=5, pvband=7, shots=3, wall_time=1.5, iters=9).as_dict()
        assert d == {"l2": 5, "pvband": 7, "shots": 3,
                     "wall_time_s": 1.5, "iters": 9}
        assert isinstance(d["l2"], int) and isinstance(d["wall_time_s"], float)
