"""Normal-form Hough transform for straight lines.

Convention: ``x*cos(theta) + y*sin(theta) = rho`` with x = column and
y = row (pointing down), so horizontal image lines have theta = 90 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class HoughError(ValueError):
    pass


@dataclass(frozen=True)
class HoughParams:
    rho_res: float = 1.0
    theta_res: float = 1.0
    threshold_frac: float = 0.3
    max_lines: int = 12
    nms_radius: int = 2

    def __post_init__(self):
        if self.rho_res <= 0 or self.theta_res <= 0:
            raise ValueError("rho_res and theta_res must be positive")
        if not 0.0 < self.threshold_frac <= 1.0:
            raise ValueError("threshold_frac must be in (0, 1]")
        if self.max_lines < 1:
            raise ValueError("max_lines must be >= 1")
        if self.nms_radius < 0:
            raise ValueError("nms_radius must be >= 0")


class HoughLine(NamedTuple):
    rho: float
    theta: float  # degrees, [0, 180)
    votes: int


def accumulate(mask: np.ndarray, p: HoughParams):
    """Vote every True pixel into a (theta, rho) accumulator.

    Returns ``(acc, thetas_deg, rhos)`` with ``acc`` of shape
    ``(len(thetas_deg), len(rhos))``.
    """
    h, w = mask.shape
    diag = math.ceil(math.hypot(w, h))
    thetas = np.arange(0.0, 180.0, p.theta_res)
    thetas = thetas[thetas < 180.0]
    n_rho = int(math.floor(2 * diag / p.rho_res)) + 1
    rhos = np.arange(n_rho) * p.rho_res - diag

    ys, xs = np.nonzero(mask)
    rad = np.deg2rad(thetas)
    cos_t, sin_t = np.cos(rad), np.sin(rad)
    acc = np.zeros(len(thetas) * n_rho, dtype=np.int64)
    base = np.arange(len(thetas)) * n_rho
    # chunk over pixels to bound the temporary (pixels x thetas) array
    chunk = max(1, 2_000_000 // max(len(thetas), 1))
    for i in range(0, len(xs), chunk):
        x = xs[i:i + chunk, None].astype(np.float64)
        y = ys[i:i + chunk, None].astype(np.float64)
        # nearest rho bin, halves rounded up
        idx = np.floor((x * cos_t + y * sin_t + diag) / p.rho_res + 0.5).astype(np.int64)
        np.clip(idx, 0, n_rho - 1, out=idx)
        idx += base
        acc += np.bincount(idx.ravel(), minlength=acc.size)
    return acc.reshape(len(thetas), n_rho), thetas, rhos


def hough_lines(mask: np.ndarray, p: HoughParams = HoughParams()) -> list[HoughLine]:
    """Strongest lines in ``mask``, strongest first.

    Peaks are taken greedily in order of (-votes, theta, rho); each accepted
    peak suppresses accumulator cells within ``nms_radius`` bins, wrapping
    across theta = 0/180 with rho mirrored. A short segment votes equally
    into several neighbouring cells; such a flat-topped peak is reported
    once, at its central cell.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise HoughError("no evidence pixels")
    return find_peaks(*accumulate(mask, p), p)


def find_peaks(acc: np.ndarray, thetas: np.ndarray, rhos: np.ndarray,
               p: HoughParams = HoughParams()) -> list[HoughLine]:
    """Peak extraction of :func:`hough_lines` on a ready accumulator.

    Accumulators are plain vote counts, so callers may add or subtract the
    accumulators of disjoint pixel sets before extracting peaks.
    """
    n_theta, n_rho = acc.shape
    top = int(acc.max()) if acc.size else 0
    if top <= 0:
        return []
    threshold = p.threshold_frac * top
    ti, ri = np.nonzero(acc >= threshold)
    votes = acc[ti, ri]
    order = np.lexsort((ri, ti, -votes))
    wraps = abs(n_theta * p.theta_res - 180.0) < 1e-9

    suppressed = np.zeros_like(acc, dtype=bool)
    r = p.nms_radius
    out: list[HoughLine] = []
    for k in order:
        t, q = int(ti[k]), int(ri[k])
        if suppressed[t, q]:
            continue
        plateau = _plateau(acc, suppressed, t, q, wraps)
        t, q = _plateau_centre(plateau)
        out.append(HoughLine(float(rhos[q]), float(thetas[t]), int(votes[k])))
        for cell in plateau:
            suppressed[cell] = True
        if len(out) >= p.max_lines:
            break
        for dt in range(-r, r + 1):
            tt, mirror = t + dt, False
            if tt < 0 or tt >= n_theta:
                if not wraps:
                    continue
                tt, mirror = tt % n_theta, True
            qc = (n_rho - 1 - q) if mirror else q
            suppressed[tt, max(qc - r, 0):min(qc + r, n_rho - 1) + 1] = True
    return out


def _plateau(acc, suppressed, t0, q0, wraps):
    """Unsuppressed cells 8-connected to (t0, q0) holding the same vote count.

    Maps each cell to its position unwrapped relative to the seed, so a
    plateau straddling theta 0/180 keeps a consistent geometry.
    """
    n_theta, n_rho = acc.shape
    v = acc[t0, q0]
    cells = {(t0, q0): (t0, q0)}
    stack = [(t0, q0, t0, q0)]
    while stack:
        t, q, tu, qu = stack.pop()
        for dt in (-1, 0, 1):
            for dq in (-1, 0, 1):
                if not (dt or dq):
                    continue
                tt, qq, tu2, qu2 = t + dt, q + dq, tu + dt, qu + dq
                if tt < 0 or tt >= n_theta:
                    if not wraps:
                        continue
                    # crossing the seam flips the sign of rho
                    tt, qq = tt % n_theta, n_rho - 1 - qq
                if not 0 <= qq < n_rho or (tt, qq) in cells or acc[tt, qq] != v or suppressed[tt, qq]:
                    continue
                cells[(tt, qq)] = (tu2, qu2)
                stack.append((tt, qq, tu2, qu2))
    return cells


def _plateau_centre(cells):
    """Member closest to the plateau mean; ties go to the smaller (theta, rho)."""
    if len(cells) == 1:
        return next(iter(cells))
    mt = sum(u[0] for u in cells.values()) / len(cells)
    mq = sum(u[1] for u in cells.values()) / len(cells)
    return min(cells, key=lambda c: ((cells[c][0] - mt) ** 2 + (cells[c][1] - mq) ** 2, c))


def angle_distance(a: float, b: float) -> float:
    """Distance between two line orientations (period 180 degrees)."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def filter_by_angle(lines, center: float, tol: float) -> list[HoughLine]:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return [ln for ln in lines if angle_distance(ln.theta, center) <= tol]


def top_boundary_row(lines, img_width: int, img_height: int | None = None) -> int:
    """Mean row of the strongest (near-horizontal) line across the image width."""
    if not lines:
        raise HoughError("no boundary line")
    best = max(lines, key=lambda ln: ln.votes)
    t = math.radians(best.theta)
    s = math.sin(t)
    if abs(s) < 1e-12:
        raise HoughError("boundary line is vertical")
    # mean over x in [0, width) of (rho - x cos)/sin
    mean_row = (best.rho - math.cos(t) * (img_width - 1) / 2.0) / s
    row = int(math.floor(mean_row + 0.5))
    row = max(row, 0)
    if img_height is not None:
        row = min(row, img_height - 1)
    return row
