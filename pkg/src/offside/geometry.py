"""Vanishing point from field lines and selection of the offside line."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .hough import HoughLine


class GeometryError(ValueError):
    pass


class Line2D(NamedTuple):
    """``a*x + b*y + c = 0`` with ``a**2 + b**2 == 1``."""

    a: float
    b: float
    c: float

    @classmethod
    def through(cls, p, q) -> "Line2D":
        dx, dy = q[0] - p[0], q[1] - p[1]
        n = math.hypot(dx, dy)
        if n == 0:
            raise GeometryError("degenerate line: identical points")
        a, b = -dy / n, dx / n
        return cls(a, b, -(a * p[0] + b * p[1]))

    @classmethod
    def from_point_angle(cls, p, angle_deg: float) -> "Line2D":
        """Line through ``p`` with direction ``(cos angle, sin angle)``."""
        t = math.radians(angle_deg)
        a, b = -math.sin(t), math.cos(t)
        return cls(a, b, -(a * p[0] + b * p[1]))

    def distance(self, p) -> float:
        return abs(self.a * p[0] + self.b * p[1] + self.c)


@dataclass(frozen=True)
class VPParams:
    min_angle_sep: float = 2.0  # degrees
    max_abs_coord: float = 1e5  # pixels

    def __post_init__(self):
        if self.min_angle_sep <= 0:
            raise ValueError("min_angle_sep must be > 0")
        if self.max_abs_coord <= 0:
            raise ValueError("max_abs_coord must be > 0")


@dataclass(frozen=True)
class OffsideLine:
    vp: tuple
    defender_anchor: tuple
    bottom_x: float
    defender_index: int
    bottom_row: int

    @property
    def segment(self):
        """Endpoints of the drawn line: vanishing point to the bottom row."""
        return (self.vp, (self.bottom_x, float(self.bottom_row)))


def from_hough(line: HoughLine) -> Line2D:
    t = math.radians(line.theta)
    return Line2D(math.cos(t), math.sin(t), -line.rho)


def intersect(l1: Line2D, l2: Line2D, min_angle_sep: float = VPParams.min_angle_sep):
    det = l1.a * l2.b - l2.a * l1.b
    if abs(det) < math.sin(math.radians(min_angle_sep)):
        raise GeometryError("no stable intersection")
    x = (l1.b * l2.c - l2.b * l1.c) / det
    y = (l2.a * l1.c - l1.a * l2.c) / det
    return (x, y)


def pairwise_intersections(lines, p: VPParams = VPParams()):
    """Surviving intersections in (i < j) order and the number of rejected pairs."""
    pts = []
    rejected = 0
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            try:
                x, y = intersect(lines[i], lines[j], p.min_angle_sep)
            except GeometryError:
                rejected += 1
                continue
            if abs(x) > p.max_abs_coord or abs(y) > p.max_abs_coord:
                rejected += 1
                continue
            pts.append((x, y))
    return pts, rejected


def estimate_vanishing_point(lines, p: VPParams = VPParams()):
    """Mean of all stable pairwise intersections of ``lines``."""
    if len(lines) < 2:
        raise GeometryError("vanishing point undetermined: fewer than two lines")
    pts, _ = pairwise_intersections(lines, p)
    if not pts:
        raise GeometryError("vanishing point undetermined")
    sx = sy = 0.0
    for x, y in pts:
        sx += x
        sy += y
    return (sx / len(pts), sy / len(pts))


def bottom_intercept(vp, anchor, bottom_row: float) -> float:
    """Column where the ray from ``vp`` through ``anchor`` crosses ``bottom_row``."""
    dy = anchor[1] - vp[1]
    if dy == 0:
        raise GeometryError("no bottom intercept")
    return vp[0] + (anchor[0] - vp[0]) * (bottom_row - vp[1]) / dy


def bbox_anchor(bbox) -> tuple:
    """Foot position of a player box: bottom-centre."""
    x0, _, x1, y1 = bbox
    return ((x0 + x1) / 2.0, float(y1))


def defender_intercepts(vp, defenders, bottom_row):
    """(index, bottom_x) for every defender with a valid intercept."""
    out = []
    for i, anchor in enumerate(defenders):
        try:
            out.append((i, bottom_intercept(vp, anchor, bottom_row)))
        except GeometryError:
            continue
    return out


def select_last_defender(vp, defenders, bottom_row: int, defend_side: str = "left") -> OffsideLine:
    if defend_side not in ("left", "right"):
        raise ValueError("defend_side must be 'left' or 'right'")
    cands = defender_intercepts(vp, defenders, bottom_row)
    if not cands:
        raise GeometryError("no defender with a valid intercept")
    sign = 1.0 if defend_side == "left" else -1.0
    # min over (signed x, index) gives the smallest index on ties
    idx, bx = min(cands, key=lambda c: (sign * c[1], c[0]))
    return OffsideLine(
        vp=(float(vp[0]), float(vp[1])),
        defender_anchor=tuple(float(v) for v in defenders[idx]),
        bottom_x=bx,
        defender_index=idx,
        bottom_row=int(bottom_row),
    )
