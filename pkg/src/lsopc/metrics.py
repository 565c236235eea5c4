"""Mask evaluation: squared L2 error, PVBand area and fracturing shot count.

Shot count uses a deterministic greedy decomposition: repeatedly extract the
largest-area all-ones axis-aligned rectangle (ties broken topmost, then
leftmost) until the mask is empty.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = ["MetricsReport", "l2_error", "pvband", "fracture", "shot_count"]


@dataclass
class MetricsReport:
    l2: int
    pvband: int
    shots: int
    wall_time: float = 0.0
    iters: int = 0

    def as_dict(self):
        return {
            "l2": int(self.l2),
            "pvband": int(self.pvband),
            "shots": int(self.shots),
            "wall_time_s": float(self.wall_time),
            "iters": int(self.iters),
        }


def _check_dims(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def l2_error(z, z_t, pitch=1):
    """Squared L2 error in nm^2: for binary grids the disagreement count."""
    z = np.asarray(z)
    z_t = np.asarray(z_t)
    _check_dims(z, z_t)
    return int(np.count_nonzero(z != z_t)) * pitch * pitch


def pvband(z_in, z_out, pitch=1):
    """PVBand area in nm^2: XOR of the two extreme-corner prints."""
    z_in = np.asarray(z_in)
    z_out = np.asarray(z_out)
    _check_dims(z_in, z_out)
    return int(np.count_nonzero(z_in != z_out)) * pitch * pitch


@njit(cache=True)
def _largest_rect(mask):
    """Largest all-ones rectangle, ties topmost then leftmost.

    Returns (area, x, y, w, h); area 0 when the mask is empty.  Histogram
    stack sweep per row, O(H*W) total.
    """
    h, w = mask.shape
    heights = np.zeros(w, dtype=np.int64)
    stack = np.empty(w + 1, dtype=np.int64)
    best_area = 0
    bx = by = bw = bh = 0
    for y in range(h):
        for x in range(w):
            heights[x] = heights[x] + 1 if mask[y, x] else 0
        top = -1
        for x in range(w + 1):
            cur = heights[x] if x < w else 0
            while top >= 0 and heights[stack[top]] > cur:
                hh = heights[stack[top]]
                top -= 1
                left = stack[top] + 1 if top >= 0 else 0
                width = x - left
                area = hh * width
                ty = y - hh + 1
                if area > best_area or (
                    area == best_area and (ty < by or (ty == by and left < bx))
                ):
                    best_area = area
                    bx, by, bw, bh = left, ty, width, hh
            top += 1
            stack[top] = x
    return best_area, bx, by, bw, bh


def fracture(mask):
    """Greedy maximal-rectangle decomposition of a binary mask.

    Returns a list of (x, y, w, h) pixel rectangles, pairwise disjoint, whose
    union reproduces the mask exactly.
    """
    work = (np.asarray(mask) != 0).astype(np.uint8)
    rects = []
    while True:
        area, x, y, w, h = _largest_rect(work)
        if area == 0:
            break
        rects.append((int(x), int(y), int(w), int(h)))
        work[y:y + h, x:x + w] = 0
    return rects


def shot_count(mask):
    return len(fracture(mask))
