"""Colour-similarity masks (field green, jerseys, painted lines)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import PixelHSV, hsv_image, hsv_to_rgb


@dataclass(frozen=True)
class ColorSpec:
    """Reference HSV colour with a box tolerance per channel.

    Hue tolerance is circular, so a red reference at 355 degrees with
    ``h_tol=10`` accepts hues 345..360 and 0..5.
    """

    h: float
    s: float
    v: float
    h_tol: float
    s_tol: float
    v_tol: float

    def __post_init__(self):
        if not 0.0 <= self.h < 360.0:
            raise ValueError(f"h must be in [0, 360), got {self.h}")
        if not (0.0 <= self.s <= 1.0 and 0.0 <= self.v <= 1.0):
            raise ValueError("s and v must be in [0, 1]")
        if not 0.0 < self.h_tol <= 180.0:
            raise ValueError(f"h_tol must be in (0, 180], got {self.h_tol}")
        if not 0.0 < self.s_tol <= 1.0:
            raise ValueError(f"s_tol must be in (0, 1], got {self.s_tol}")
        if not 0.0 < self.v_tol <= 1.0:
            raise ValueError(f"v_tol must be in (0, 1], got {self.v_tol}")

    @property
    def ref(self) -> PixelHSV:
        return PixelHSV(self.h, self.s, self.v)

    def rgb(self) -> tuple[int, int, int]:
        return hsv_to_rgb(self.ref)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("h", "s", "v", "h_tol", "s_tol", "v_tol")}


def circular_hue_distance(a, b):
    """Angular distance between two hues in degrees; result in [0, 180].

    Works elementwise on arrays as well as on scalars.
    """
    d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) % 360.0
    d = np.minimum(d, 360.0 - d)
    return float(d) if d.ndim == 0 else d


def color_mask_hsv(hsv: np.ndarray, spec: ColorSpec) -> np.ndarray:
    """Mask from a precomputed HSV image (see :func:`offside.imaging.hsv_image`)."""
    m = np.abs(hsv[..., 2] - spec.v) <= spec.v_tol
    m &= np.abs(hsv[..., 1] - spec.s) <= spec.s_tol
    if spec.h_tol < 180.0:
        # both hues lie in [0, 360), so one fold gives the circular distance
        dh = np.abs(hsv[..., 0] - spec.h)
        m &= np.minimum(dh, 360.0 - dh) <= spec.h_tol
    return m


def color_mask(img: np.ndarray, spec: ColorSpec) -> np.ndarray:
    return color_mask_hsv(hsv_image(img), spec)


def hue_ranges_disjoint(a: ColorSpec, b: ColorSpec) -> bool:
    return circular_hue_distance(a.h, b.h) > a.h_tol + b.h_tol
