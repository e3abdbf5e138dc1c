"""Binary morphology with flat structuring elements.

Pixels outside the mask are treated as background for both erosion and
dilation, so the usual erosion/dilation duality does not hold at borders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import label_components


@dataclass(frozen=True, eq=False)
class StructuringElement:
    bits: np.ndarray  # bool, odd height x odd width, origin at the centre

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] % 2 == 0 or bits.shape[1] % 2 == 0:
            raise ValueError("structuring element must be 2-D with odd sides")
        if not bits[bits.shape[0] // 2, bits.shape[1] // 2]:
            raise ValueError("structuring element origin must be set")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def box(cls, size: int) -> "StructuringElement":
        return cls(np.ones((size, size), dtype=bool))

    @property
    def offsets(self):
        """(dx, dy) of every set bit relative to the origin."""
        cy, cx = self.bits.shape[0] // 2, self.bits.shape[1] // 2
        ys, xs = np.nonzero(self.bits)
        return [(int(x - cx), int(y - cy)) for y, x in zip(ys, xs)]


def _shifted(m: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """out[y, x] = m[y + dy, x + dx], False where that falls outside."""
    h, w = m.shape
    out = np.zeros_like(m)
    if abs(dx) >= w or abs(dy) >= h:
        return out
    ys, yd = (slice(dy, h), slice(0, h - dy)) if dy >= 0 else (slice(0, h + dy), slice(-dy, h))
    xs, xd = (slice(dx, w), slice(0, w - dx)) if dx >= 0 else (slice(0, w + dx), slice(-dx, w))
    out[yd, xd] = m[ys, xs]
    return out


def erode(m: np.ndarray, se: StructuringElement) -> np.ndarray:
    m = np.asarray(m, dtype=bool)
    out = np.ones_like(m)
    for dx, dy in se.offsets:
        out &= _shifted(m, dx, dy)
    return out


def dilate(m: np.ndarray, se: StructuringElement) -> np.ndarray:
    m = np.asarray(m, dtype=bool)
    out = np.zeros_like(m)
    for dx, dy in se.offsets:
        out |= _shifted(m, -dx, -dy)
    return out


def opening(m: np.ndarray, se: StructuringElement) -> np.ndarray:
    """Erosion followed by dilation; drops blobs the element does not fit in."""
    return dilate(erode(m, se), se)


open = opening  # noqa: A001  (shadows the builtin inside this module only)


def fill_holes(m: np.ndarray) -> np.ndarray:
    """Set every background region that does not touch the border.

    Background is taken 4-connected, so a diagonal chain of foreground
    pixels is enough to seal a hole.
    """
    m = np.asarray(m, dtype=bool)
    labels, comps = label_components(~m, connectivity=4)
    if not comps:
        return m.copy()
    outside = np.zeros(len(comps) + 1, dtype=bool)
    for edge in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        outside[edge] = True
    outside[0] = True  # foreground label
    return m | ~outside[labels]
