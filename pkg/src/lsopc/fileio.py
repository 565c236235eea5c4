"""File formats: DVLF1 field dumps, PGM (P5) masks, rectangle layouts.

Layout text format: optional "SIZE n" header, lines of "RECT x y w h"
(integers, nm), comments starting with '#'.  An 8-bit binary PGM raster
thresholded at >= 128 is accepted as an alternative target carrier.
"""

import re
import struct

import numpy as np

from .errors import DegenerateInputError, FormatError

FIELD_MAGIC = b"DVLF1\x00"

__all__ = [
    "dump_field", "load_field", "save_pgm", "load_pgm",
    "parse_layout", "load_target", "write_loss_csv", "render_png",
]


def dump_field(path, field):
    """Write a float64 field: magic "DVLF1\\0", u32 width, u32 height, then
    width*height little-endian f64 row-major."""
    arr = np.asarray(field, dtype="<f8")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(FIELD_MAGIC)
        f.write(struct.pack("<II", w, h))
        f.write(arr.tobytes())


def load_field(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:6] != FIELD_MAGIC:
        raise FormatError(f"bad magic {data[:6]!r}, expected {FIELD_MAGIC!r}")
    if len(data) < 14:
        raise FormatError("truncated header: expected at least 14 bytes")
    w, h = struct.unpack_from("<II", data, 6)
    expected = 14 + 8 * w * h
    if len(data) != expected:
        raise FormatError(
            f"payload length mismatch: expected {expected} bytes, got {len(data)}")
    return np.frombuffer(data, dtype="<f8", offset=14).reshape(h, w).copy()


def save_pgm(path, mask):
    """Binary mask as 8-bit binary PGM (P5), lit pixels at 255."""
    arr = (np.asarray(mask) != 0).astype(np.uint8) * 255
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(arr.tobytes())


def load_pgm(path):
    """Read an 8-bit binary PGM and threshold it at >= 128."""
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P5"):
        raise FormatError("not a binary PGM (P5) file")
    # header: magic, width, height, maxval; '#' comments allowed
    tokens = []
    pos = 2
    while len(tokens) < 3:
        m = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", data[pos:])
        if m is None:
            raise FormatError("malformed PGM header")
        tokens.append(int(m.group(1)))
        pos += m.end()
    w, h, maxval = tokens
    if maxval > 255:
        raise FormatError("only 8-bit PGM supported")
    pos += 1  # single whitespace after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    if raster.size != w * h:
        raise FormatError("truncated PGM raster")
    return (raster.reshape(h, w) >= 128).astype(np.uint8)


def parse_layout(text, tile_side=2048):
    """Rasterize a rectangle-list layout onto a square tile.

    A pixel is lit iff its center lies inside some rectangle; with integer
    rects at 1 nm pitch this is the half-open box [x, x+w) x [y, y+h).
    """
    grid = None
    rects = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].upper() == "SIZE":
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormatError(f"line {lineno}: malformed SIZE line: {raw!r}")
            tile_side = int(parts[1])
        elif parts[0].upper() == "RECT":
            try:
                x, y, w, h = (int(p) for p in parts[1:])
            except (TypeError, ValueError):
                raise FormatError(f"line {lineno}: malformed RECT line: {raw!r}")
            if w <= 0 or h <= 0:
                raise ValueError(f"line {lineno}: rect sides must be positive")
            rects.append((lineno, x, y, w, h))
        else:
            raise FormatError(f"line {lineno}: unknown directive {parts[0]!r}")
    grid = np.zeros((tile_side, tile_side), dtype=np.uint8)
    for lineno, x, y, w, h in rects:
        if x < 0 or y < 0 or x + w > tile_side or y + h > tile_side:
            raise ValueError(
                f"line {lineno}: rect ({x}, {y}, {w}, {h}) exceeds tile "
                f"[0, {tile_side})^2")
    for _, x, y, w, h in rects:
        grid[y:y + h, x:x + w] = 1
    return grid


def load_target(path, tile_side=2048):
    """Load a target layout from a rectangle-list file or a PGM raster."""
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"P5":
        return load_pgm(path)
    with open(path, "r") as f:
        return parse_layout(f.read(), tile_side=tile_side)


def write_loss_csv(path, history):
    with open(path, "w") as f:
        f.write("iter,L_ilt,L_pvb,L_DSO,dt,max_v\n")
        for i, rec in enumerate(history):
            f.write(f"{i},{rec.l_ilt!r},{rec.l_pvb!r},{rec.l_dso!r},"
                    f"{rec.dt!r},{rec.max_v!r}\n")


def render_png(path, mask, target=None):
    """Convenience rendering: mask in white, target outline overlaid in red."""
    from PIL import Image
    mask = (np.asarray(mask) != 0).astype(np.uint8)
    rgb = np.repeat(mask[:, :, None] * 255, 3, axis=2).astype(np.uint8)
    if target is not None:
        from .levelset import extract_boundaries
        b_h, b_v = extract_boundaries(np.asarray(target))
        outline = ((b_h | b_v) != 0) & (np.asarray(target) != 0)
        rgb[outline] = (255, 64, 64)
    Image.fromarray(rgb, "RGB").save(path)
