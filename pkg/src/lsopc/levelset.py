"""Level-set machinery: truncated signed distance fields, mask conversions,
central-difference geometry gradients, curvature and Heaviside functions.

Sign convention: phi <= 0 inside the mask, phi > 0 outside.  The zero level
set lies midway between opposite-phase pixel centers (distance minus half a
pixel), which makes the mask round trip exact.  All stencils use replicate
padding so the truncation plateaus at the borders stay gradient-free.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, NumericalError

D_UPPER_DEFAULT = 900.0
D_LOWER_DEFAULT = -100.0

# guard for the curvature quotient, which vanishes on TSDF plateaus
EPS_DEN = 1e-8

__all__ = [
    "LevelSetField", "GeometryGradient",
    "extract_boundaries", "tsdf_from_mask", "mask_from_phi",
    "geometry_gradient", "gradient_magnitude", "curvature",
    "heaviside", "ahf", "evolve_step",
]


@dataclass
class LevelSetField:
    phi: np.ndarray
    d_upper: float = D_UPPER_DEFAULT
    d_lower: float = D_LOWER_DEFAULT

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if not (self.d_lower < 0.0 < self.d_upper):
            raise ValueError(
                f"truncation bounds must satisfy D_l < 0 < D_u, "
                f"got [{self.d_lower}, {self.d_upper}]")

    @property
    def shape(self):
        return self.phi.shape

    def copy(self):
        return LevelSetField(self.phi.copy(), self.d_upper, self.d_lower)


@dataclass
class GeometryGradient:
    gx: np.ndarray
    gy: np.ndarray
    gxx: np.ndarray
    gyy: np.ndarray
    gxy: np.ndarray

    @property
    def magnitude(self):
        return np.hypot(self.gx, self.gy)


def _phi_array(phi):
    return phi.phi if isinstance(phi, LevelSetField) else np.asarray(phi, dtype=np.float64)


def extract_boundaries(mask):
    """Boundary evidence grids from shift-XOR against 1-pixel translations.

    b_h marks pixels whose up- or down-shifted copy differs, b_v the same for
    left/right shifts; shifts use zero padding.
    """
    from .fields import shift
    m = np.asarray(mask, dtype=np.uint8)
    up = shift(m, 0, -1)
    down = shift(m, 0, 1)
    left = shift(m, -1, 0)
    right = shift(m, 1, 0)
    b_h = ((m ^ up) | (m ^ down)).astype(np.uint8)
    b_v = ((m ^ left) | (m ^ right)).astype(np.uint8)
    return b_h, b_v


def tsdf_from_mask(mask, d_upper=D_UPPER_DEFAULT, d_lower=D_LOWER_DEFAULT):
    """Truncated signed distance field of a binary mask.

    For each pixel, d = (Euclidean distance to the nearest opposite-phase
    pixel center) - 0.5, so the zero crossing sits midway between pixel
    centers; phi = -d inside, +d outside, clamped to [d_lower, d_upper].
    """
    m = np.asarray(mask)
    inside = m != 0
    if inside.all() or not inside.any():
        raise DegenerateInputError("mask is uniform: no boundary exists")
    dist_to_one = ndimage.distance_transform_edt(~inside)
    dist_to_zero = ndimage.distance_transform_edt(inside)
    phi = np.where(inside, -(dist_to_zero - 0.5), dist_to_one - 0.5)
    np.clip(phi, d_lower, d_upper, out=phi)
    return LevelSetField(phi, d_upper, d_lower)


def mask_from_phi(phi):
    """Binary mask from a level-set field: 1 where phi <= 0."""
    return (_phi_array(phi) <= 0.0).astype(np.uint8)


def geometry_gradient(phi):
    """First and second spatial derivatives by central differences,
    replicate padding at the borders."""
    p = np.pad(_phi_array(phi), 1, mode="edge")
    c = p[1:-1, 1:-1]
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    gxx = p[1:-1, 2:] + p[1:-1, :-2] - 2.0 * c
    gyy = p[2:, 1:-1] + p[:-2, 1:-1] - 2.0 * c
    gxy = 0.25 * ((p[2:, 2:] - p[2:, :-2]) - (p[:-2, 2:] - p[:-2, :-2]))
    return GeometryGradient(gx, gy, gxx, gyy, gxy)


def gradient_magnitude(phi):
    return geometry_gradient(phi).magnitude


def curvature(phi, m=None, weight=1.0):
    """Curvature term kappa = weight * m * |grad phi| * div(grad phi / |grad phi|),
    computed as the central-difference quotient

        (gxx*gy^2 - 2*gy*gx*gxy + gyy*gx^2) / (gx^2 + gy^2 + eps).

    `m` is an optional per-pixel modulation gate in [0, 1].
    """
    g = geometry_gradient(phi)
    num = g.gxx * g.gy ** 2 - 2.0 * g.gy * g.gx * g.gxy + g.gyy * g.gx ** 2
    kappa = weight * num / (g.gx ** 2 + g.gy ** 2 + EPS_DEN)
    if m is not None:
        kappa = kappa * np.asarray(m, dtype=np.float64)
    return kappa


def heaviside(phi):
    """Hard Heaviside: 1 where phi >= 0, else 0 (binary grid)."""
    return (_phi_array(phi) >= 0.0).astype(np.uint8)


def ahf(phi, epsilon=0.03):
    """Approximated Heaviside: 0.5 * (1 + (2/pi) * arctan(phi / epsilon))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(_phi_array(phi) / epsilon))


def evolve_step(lsf, dphi_dt, dt):
    """One explicit time step: phi <- clamp(phi + dt * dphi_dt, D_l, D_u)."""
    if dt <= 0:
        raise ValueError("time step must be positive")
    update = np.asarray(dphi_dt, dtype=np.float64)
    if update.shape != lsf.phi.shape:
        raise ValueError("update field dimensions do not match phi")
    bad = ~np.isfinite(update)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise NumericalError(f"non-finite update at pixel (x={x}, y={y})")
    phi = np.clip(lsf.phi + dt * update, lsf.d_lower, lsf.d_upper)
    return LevelSetField(phi, lsf.d_upper, lsf.d_lower)
