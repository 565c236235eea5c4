"""SOCS partially-coherent forward lithography.

Aerial intensity is the weighted sum of squared kernel convolutions; the
resist is either a hard threshold or its sigmoid relaxation.  Process corners
are nominal (focus, dose 1.0), outer (focus, dose 1.02) and inner (defocus,
dose 0.98): higher dose enlarges prints, so +2% gives the outer contour.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from . import fields
from .errors import FormatError

KERNEL_MAGIC = b"DVLK1\x00"

__all__ = [
    "OpticalKernel", "KernelSet", "ProcessCondition", "PrintTriple",
    "NOMINAL", "INNER", "OUTER",
    "aerial_intensity", "resist_hard", "resist_sigmoid", "print_corners",
    "save_kernels", "load_kernels", "gen_synthetic_kernels",
]


@dataclass
class OpticalKernel:
    coeffs: np.ndarray  # K x K complex128
    weight: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.coeffs.shape[1]:
            raise ValueError("kernel coefficients must be a square matrix")
        if self.weight < 0:
            raise ValueError(f"kernel weight must be >= 0, got {self.weight}")
        if not np.isfinite(self.coeffs).all():
            raise ValueError("kernel coefficients must be finite")

    @property
    def side(self):
        return self.coeffs.shape[0]


@dataclass
class KernelSet:
    kernels: list
    condition: str  # "focus" | "defocus"
    _fft_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.kernels:
            raise ValueError("kernel set must contain at least one kernel")
        sides = {k.side for k in self.kernels}
        if len(sides) != 1:
            raise ValueError(f"all kernels must share one side, got {sorted(sides)}")
        if self.condition not in ("focus", "defocus"):
            raise ValueError(f"condition must be focus or defocus, got {self.condition!r}")

    def __len__(self):
        return len(self.kernels)

    @property
    def side(self):
        return self.kernels[0].side

    def weights(self):
        return np.array([k.weight for k in self.kernels])

    def stacked_ffts(self, shape):
        """FFTs of the embedded kernels and their 180-degree rotations,
        cached per grid shape.  Returns (Hf, Hrot_f, sigma) stacks."""
        key = tuple(shape)
        if key not in self._fft_cache:
            embs = [fields.embed_kernel(k.coeffs, shape) for k in self.kernels]
            hf = np.stack([np.fft.fft2(e) for e in embs])
            # h'(u) = h(-u mod N): index-reversed then rolled by one
            rots = [np.roll(e[::-1, ::-1], (1, 1), axis=(0, 1)) for e in embs]
            hrotf = np.stack([np.fft.fft2(r) for r in rots])
            self._fft_cache[key] = (hf, hrotf, self.weights())
        return self._fft_cache[key]


@dataclass(frozen=True)
class ProcessCondition:
    dose: float
    focus_sel: str  # "focus" | "defocus"
    label: str      # "nominal" | "inner" | "outer"

    def __post_init__(self):
        if self.dose <= 0:
            raise ValueError("dose must be positive")
        if self.label == "nominal" and (self.dose != 1.0 or self.focus_sel != "focus"):
            raise ValueError("nominal condition requires dose 1.0 at focus")


NOMINAL = ProcessCondition(1.0, "focus", "nominal")
OUTER = ProcessCondition(1.02, "focus", "outer")
INNER = ProcessCondition(0.98, "defocus", "inner")


@dataclass
class PrintTriple:
    nominal: np.ndarray
    inner: np.ndarray
    outer: np.ndarray

    def __post_init__(self):
        if not (self.nominal.shape == self.inner.shape == self.outer.shape):
            raise ValueError("print triple grids must share dimensions")


def aerial_intensity(mask, kernels, cond=NOMINAL):
    """Aerial image intensity: I = dose * sum_i sigma_i |M (*) h_i|^2."""
    mask = np.asarray(mask, dtype=np.float64)
    if kernels.side > min(mask.shape):
        raise ValueError(f"kernel side {kernels.side} exceeds grid {mask.shape}")
    if kernels.condition != cond.focus_sel:
        raise ValueError(
            f"kernel set condition {kernels.condition!r} does not match "
            f"process condition {cond.focus_sel!r}")
    hf, _, sigma = kernels.stacked_ffts(mask.shape)
    a = np.fft.ifft2(np.fft.fft2(mask)[None, :, :] * hf)
    intensity = cond.dose * np.tensordot(sigma, np.abs(a) ** 2, axes=1)
    return np.maximum(intensity, 0.0)


def resist_hard(intensity, i_th):
    """Constant-threshold resist: printed where I >= I_th (boundary inclusive)."""
    return (np.asarray(intensity) >= i_th).astype(np.uint8)


def resist_sigmoid(intensity, i_th, sigma_z):
    """Sigmoid relaxation of the hard resist; outputs strictly in (0, 1)."""
    if sigma_z <= 0:
        raise ValueError("sigma_z must be positive")
    return 1.0 / (1.0 + np.exp(-sigma_z * (np.asarray(intensity, dtype=np.float64) - i_th)))


def print_corners(mask, focus_kernels, defocus_kernels, cfg, binarize=True):
    """Prints at the three process corners.

    nominal: focus, dose 1.0; outer: focus, dose 1.02; inner: defocus,
    dose 0.98.  Hard resist when binarize, else sigmoid.
    """
    i_nom = aerial_intensity(mask, focus_kernels, NOMINAL)
    i_out = aerial_intensity(mask, focus_kernels, OUTER)
    i_in = aerial_intensity(mask, defocus_kernels, INNER)
    if binarize:
        resist = lambda i: resist_hard(i, cfg.i_th)
    else:
        resist = lambda i: resist_sigmoid(i, cfg.i_th, cfg.sigma_z)
    return PrintTriple(nominal=resist(i_nom), inner=resist(i_in), outer=resist(i_out))


# ---------------------------------------------------------------------------
# DVLK1 kernel file format, little-endian:
#   magic "DVLK1\0", then per section (focus first, defocus second):
#   u32 N_k, u32 K, then per kernel: f64 sigma, K*K (f64 re, f64 im) row-major.


def save_kernels(path, focus, defocus):
    with open(path, "wb") as f:
        f.write(KERNEL_MAGIC)
        for ks in (focus, defocus):
            f.write(struct.pack("<II", len(ks), ks.side))
            for k in ks.kernels:
                f.write(struct.pack("<d", k.weight))
                inter = np.empty(k.coeffs.size * 2, dtype="<f8")
                inter[0::2] = k.coeffs.real.ravel()
                inter[1::2] = k.coeffs.imag.ravel()
                f.write(inter.tobytes())


def load_kernels(path):
    """Load a DVLK1 file; returns (focus, defocus) kernel sets."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:6] != KERNEL_MAGIC:
        raise FormatError(
            f"bad magic {data[:6]!r} at byte 0, expected {KERNEL_MAGIC!r}")
    off = 6
    sets = []
    for condition in ("focus", "defocus"):
        if off + 8 > len(data):
            raise FormatError(f"truncated section header at byte {off}")
        n_k, side = struct.unpack_from("<II", data, off)
        off += 8
        if n_k < 1 or side < 1:
            raise FormatError(f"invalid kernel count/side at byte {off - 8}")
        kernels = []
        for _ in range(n_k):
            rec = 8 + 16 * side * side
            if off + rec > len(data):
                raise FormatError(
                    f"truncated kernel record at byte {off}: "
                    f"need {rec} bytes, have {len(data) - off}")
            (sigma,) = struct.unpack_from("<d", data, off)
            if sigma < 0:
                raise FormatError(f"negative kernel weight at byte {off}")
            inter = np.frombuffer(data, dtype="<f8", count=2 * side * side,
                                  offset=off + 8)
            coeffs = (inter[0::2] + 1j * inter[1::2]).reshape(side, side)
            kernels.append(OpticalKernel(coeffs, sigma))
            off += rec
        sets.append(KernelSet(kernels, condition))
    if off != len(data):
        raise FormatError(f"{len(data) - off} trailing bytes at byte {off}")
    return sets[0], sets[1]


def gen_synthetic_kernels(side, n_k, seed=0, defocus_scale=1.25):
    """Deterministic synthetic SOCS kernels for desk-scale testing.

    Kernel 1 is a dominant low-pass Gaussian; kernels 2..n_k are modulated
    Gaussians with geometrically decaying weights.  The defocus set uses a
    strictly larger Gaussian width so prints blur.  Weights are normalized so
    a fully lit mask yields peak intensity 1.0.
    """
    if side < 3 or side % 2 == 0:
        raise ValueError(f"kernel side must be odd and >= 3, got {side}")
    if n_k < 1:
        raise ValueError(f"kernel count must be >= 1, got {n_k}")
    rng = np.random.default_rng(seed)
    c = side // 2
    y, x = np.mgrid[0:side, 0:side]
    xr, yr = x - c, y - c
    r2 = xr.astype(np.float64) ** 2 + yr.astype(np.float64) ** 2

    # shared modulation parameters so focus/defocus sets pair up
    angles = rng.uniform(0.0, 2 * np.pi, size=n_k)
    phases = rng.uniform(0.0, 2 * np.pi, size=n_k)

    def build(width):
        kernels = []
        for i in range(n_k):
            gauss = np.exp(-r2 / (2.0 * width ** 2))
            if i == 0:
                coeffs = gauss.astype(np.complex128)
            else:
                freq = np.pi * i / side
                carrier = freq * (np.cos(angles[i]) * xr + np.sin(angles[i]) * yr)
                coeffs = gauss * np.exp(1j * (carrier + phases[i]))
            coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
            kernels.append(OpticalKernel(coeffs, 0.45 ** i))
        # peak intensity of a fully lit mask is sum_i sigma_i |sum(h_i)|^2
        peak = sum(k.weight * abs(k.coeffs.sum()) ** 2 for k in kernels)
        for k in kernels:
            k.weight /= peak
        return kernels

    base = side / 6.0
    focus = KernelSet(build(base), "focus")
    defocus = KernelSet(build(base * defocus_scale), "defocus")
    return focus, defocus
