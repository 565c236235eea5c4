"""Dense 2-D grid primitives: shifts and frequency-domain convolution.

Grids are plain numpy arrays indexed [y, x] (row, column).  Binary grids are
uint8 with values 0/1, scalar fields float64, complex fields complex128.
Convolution is circular (periodic): the frequency-domain path makes it exact
and tile patterns carry empty margins, so wraparound never touches content.
"""

import numpy as np

__all__ = ["shift", "embed_kernel", "convolve", "check_finite"]


def check_finite(arr, name="field"):
    """Raise if any entry is NaN or Inf, naming the first offending pixel."""
    bad = ~np.isfinite(arr)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        from .errors import NumericalError
        raise NumericalError(f"{name} is non-finite at pixel (x={x}, y={y})")


def _shift_axis(arr, d, axis, pad):
    if d == 0:
        return arr
    out = np.roll(arr, d, axis=axis)
    # overwrite the wrapped band with the padding rule
    if d > 0:
        band = [slice(None)] * arr.ndim
        band[axis] = slice(0, d)
        edge = [slice(None)] * arr.ndim
        edge[axis] = slice(0, 1)
    else:
        band = [slice(None)] * arr.ndim
        band[axis] = slice(arr.shape[axis] + d, None)
        edge = [slice(None)] * arr.ndim
        edge[axis] = slice(arr.shape[axis] - 1, None)
    if pad == "zero":
        out[tuple(band)] = 0
    elif pad == "replicate":
        out[tuple(band)] = arr[tuple(edge)]
    else:
        raise ValueError(f"unknown pad mode {pad!r}")
    return out


def shift(field, dx, dy, pad="zero"):
    """Translate a grid by (dx, dy) pixels: out(x, y) = in(x - dx, y - dy).

    Out-of-range reads use the padding rule ("zero" or "replicate").  The
    input is never modified.
    """
    field = np.asarray(field)
    h, w = field.shape
    if abs(dx) >= w or abs(dy) >= h:
        raise ValueError(f"shift ({dx}, {dy}) exceeds grid dimensions {w}x{h}")
    out = _shift_axis(field.copy(), dx, axis=1, pad=pad)
    return _shift_axis(out, dy, axis=0, pad=pad)


def embed_kernel(coeffs, shape):
    """Zero-embed a K x K kernel centered in the grid, cyclically rotated so
    its center pixel sits at index (0, 0).  Makes the delta kernel an exact
    identity under circular convolution."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    k = coeffs.shape[0]
    h, w = shape
    if k > h or k > w:
        raise ValueError(f"kernel side {k} exceeds grid {w}x{h}")
    emb = np.zeros(shape, dtype=np.complex128)
    cy, cx = h // 2, w // 2
    y0, x0 = cy - k // 2, cx - k // 2
    emb[y0:y0 + k, x0:x0 + k] = coeffs
    return np.roll(emb, (-cy, -cx), axis=(0, 1))


def convolve(mask, kernel):
    """Circular convolution of a real grid with an optical kernel.

    `kernel` may be an OpticalKernel or a raw K x K complex array.  Returns a
    complex field; identical (to ~1e-9 relative) to direct spatial-domain
    periodic summation.
    """
    coeffs = getattr(kernel, "coeffs", kernel)
    mask = np.asarray(mask, dtype=np.float64)
    emb = embed_kernel(coeffs, mask.shape)
    return np.fft.ifft2(np.fft.fft2(mask) * np.fft.fft2(emb))
