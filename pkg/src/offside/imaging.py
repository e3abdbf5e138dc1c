"""Raster helpers shared by every stage.

Rasters are plain numpy arrays:

* colour image  -- ``uint8`` array of shape ``(height, width, 3)``, RGB order
* gray image    -- ``uint8`` array of shape ``(height, width)``
* binary mask   -- ``bool`` array of shape ``(height, width)``

Coordinates are ``(x, y)`` = (column, row) with the origin at the top-left.
"""

from __future__ import annotations

import math
import re
from typing import NamedTuple, Sequence

import numpy as np


class PPMError(ValueError):
    """Raised when a byte stream is not a P6 / maxval-255 PPM file."""


class PixelHSV(NamedTuple):
    h: float  # degrees, [0, 360)
    s: float  # [0, 1]
    v: float  # [0, 1]


BBox = tuple  # (x0, y0, x1, y1), inclusive


def check_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("image must be a uint8 array of shape (height, width, 3)")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def new_image(width: int, height: int, color=(0, 0, 0)) -> np.ndarray:
    if width < 1 or height < 1:
        raise ValueError("image must be at least 1x1")
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[...] = color
    return img


# ---------------------------------------------------------------------------
# PPM (P6, maxval 255)

_TOKEN = re.compile(rb"\S+")


def _header_tokens(data: bytes, count: int):
    """Yield ``count`` whitespace separated header tokens, skipping '#' comments.

    Returns the tokens and the offset of the single whitespace byte that
    terminates the last token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PPMError("malformed header: unexpected end of data")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise PPMError("malformed header: unterminated comment")
            pos = end + 1
            continue
        m = _TOKEN.match(data, pos)
        tok = m.group(0)
        if b"#" in tok:
            tok = tok[: tok.index(b"#")]
            pos += len(tok)
        else:
            pos = m.end()
        tokens.append(tok)
    return tokens, pos


def decode_ppm(data: bytes) -> np.ndarray:
    """Decode a binary PPM (P6) file with maxval 255 into an RGB array."""
    if not data.startswith(b"P6"):
        raise PPMError("malformed header: missing P6 magic")
    if len(data) > 2 and not data[2:3].isspace() and data[2:3] != b"#":
        raise PPMError("malformed header: missing P6 magic")
    (w_tok, h_tok, max_tok), pos = _header_tokens(data[2:], 3)
    pos += 2
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise PPMError("malformed header: non-numeric field") from None
    if width < 1 or height < 1:
        raise PPMError("malformed header: non-positive dimensions")
    if maxval != 255:
        raise PPMError(f"unsupported maxval {maxval}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PPMError("malformed header: missing separator before payload")
    payload = data[pos + 1:]
    expected = width * height * 3
    if len(payload) < expected:
        raise PPMError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    if len(payload) > expected:
        raise PPMError(f"trailing data: expected {expected} bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def encode_ppm(img: np.ndarray) -> bytes:
    check_image(img)
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())


def write_ppm(path, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ppm(img))


def mask_to_image(mask: np.ndarray) -> np.ndarray:
    """Render a binary mask as a black/white RGB image (for debug dumps)."""
    out = np.zeros(mask.shape + (3,), dtype=np.uint8)
    out[mask] = 255
    return out


# ---------------------------------------------------------------------------
# Colour conversion

def rgb_to_hsv(p: Sequence[int]) -> PixelHSV:
    """Hexcone RGB -> HSV for one 8-bit pixel.

    Hue is in degrees and is 0 for achromatic pixels.
    """
    r, g, b = (int(c) for c in p)
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValueError("RGB channels must be within [0, 255]")
    mx = max(r, g, b)
    mn = min(r, g, b)
    chroma = mx - mn
    v = mx / 255.0
    if mx == 0 or chroma == 0:
        return PixelHSV(0.0, 0.0, v)
    s = chroma / mx
    if mx == r:
        h = 60.0 * (((g - b) / chroma) % 6.0)
    elif mx == g:
        h = 60.0 * ((b - r) / chroma + 2.0)
    else:
        h = 60.0 * ((r - g) / chroma + 4.0)
    if h >= 360.0:
        h -= 360.0
    return PixelHSV(h, s, v)


def hsv_to_rgb(p: Sequence[float]) -> tuple[int, int, int]:
    """Inverse hexcone conversion, rounded to the nearest 8-bit value."""
    h, s, v = p
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1 - abs(hp % 2 - 1))
    sector = int(hp) % 6
    r1, g1, b1 = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    m = v - c
    return tuple(int(math.floor((ch + m) * 255.0 + 0.5)) for ch in (r1, g1, b1))


def hsv_image(img: np.ndarray) -> np.ndarray:
    """Vectorised :func:`rgb_to_hsv` over a whole image; returns float (H, W, 3)."""
    check_image(img)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    c = mx.astype(np.int16) - mn
    ri, gi, bi = r.astype(np.int16), g.astype(np.int16), b.astype(np.int16)
    # hue sector numerator over chroma, one division for the whole image
    num = np.where(mx == r, gi - bi, np.where(mx == g, bi - ri + 2 * c, ri - gi + 4 * c))
    num += np.where(num < 0, 6 * c, 0).astype(np.int16)
    chromatic = c > 0
    # channel-planar storage so per-channel slices downstream are contiguous
    out = np.zeros((3,) + img.shape[:2], dtype=np.float64).transpose(1, 2, 0)
    np.divide(60.0 * num, c, out=out[..., 0], where=chromatic)
    np.divide(c, mx, out=out[..., 1], where=chromatic)
    np.divide(mx, 255.0, out=out[..., 2])
    hue = out[..., 0]
    hue[hue >= 360.0] -= 360.0
    return out


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luma with 0.299/0.587/0.114 weights, rounded half up."""
    check_image(img)
    rgb = img.astype(np.int32)
    # integer arithmetic keeps the half-up rounding exact
    acc = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return np.clip((acc + 500) // 1000, 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Annotation

def bresenham(x0: int, y0: int, x1: int, y1: int):
    """Integer points of the segment from (x0, y0) to (x1, y1), endpoints included."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pts = []
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def clip_segment(p0, p1, xmin, ymin, xmax, ymax):
    """Liang-Barsky clip of a segment to a rectangle; None when fully outside."""
    x0, y0 = float(p0[0]), float(p0[1])
    dx, dy = float(p1[0]) - x0, float(p1[1]) - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0), (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    return (x0 + t0 * dx, y0 + t0 * dy), (x0 + t1 * dx, y0 + t1 * dy)


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def _stamp(out: np.ndarray, pts, color, thickness: int) -> None:
    h, w = out.shape[:2]
    lo = -((thickness - 1) // 2)
    hi = thickness // 2
    for x, y in pts:
        ya, yb = max(y + lo, 0), min(y + hi, h - 1)
        xa, xb = max(x + lo, 0), min(x + hi, w - 1)
        if ya <= yb and xa <= xb:
            out[ya:yb + 1, xa:xb + 1] = color


def draw_overlay(img: np.ndarray, boxes=(), segments=()) -> np.ndarray:
    """Return a copy of ``img`` with box outlines and line segments drawn.

    Parameters
    ----------
    boxes : iterable of ``((x0, y0, x1, y1), (r, g, b))``
        Inclusive rectangles, outlined one pixel wide.
    segments : iterable of ``((x, y), (x, y), (r, g, b), thickness)``
        Bresenham segments; endpoints may be fractional or far outside the
        image, everything is clipped to the raster.
    """
    check_image(img)
    out = img.copy()
    h, w = out.shape[:2]
    for (x0, y0, x1, y1), color in boxes:
        x0, y0, x1, y1 = (_round(v) for v in (x0, y0, x1, y1))
        if x0 > x1:
            x0, x1 = x1, x0
        if y0 > y1:
            y0, y1 = y1, y0
        if x1 < 0 or y1 < 0 or x0 >= w or y0 >= h:
            continue
        xa, xb = max(x0, 0), min(x1, w - 1)
        ya, yb = max(y0, 0), min(y1, h - 1)
        if 0 <= y0 < h:
            out[y0, xa:xb + 1] = color
        if 0 <= y1 < h:
            out[y1, xa:xb + 1] = color
        if 0 <= x0 < w:
            out[ya:yb + 1, x0] = color
        if 0 <= x1 < w:
            out[ya:yb + 1, x1] = color
    for p0, p1, color, thickness in segments:
        thickness = max(int(thickness), 1)
        margin = thickness
        clipped = clip_segment(p0, p1, -margin, -margin, w - 1 + margin, h - 1 + margin)
        if clipped is None:
            continue
        (cx0, cy0), (cx1, cy1) = clipped
        pts = bresenham(_round(cx0), _round(cy0), _round(cx1), _round(cy1))
        _stamp(out, pts, color, thickness)
    return out
