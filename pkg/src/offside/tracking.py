"""Minimum-eigenvalue corners and pyramidal Lucas-Kanade tracking.

All tracking is translational. Points are processed as one batch per
pyramid level so the per-frame cost does not depend on Python loops over
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np


class Corner(NamedTuple):
    x: float
    y: float
    min_eig: float


@dataclass(frozen=True)
class LKParams:
    window: int = 15
    max_iter: int = 20
    epsilon: float = 0.01
    pyramid_levels: int = 2
    # threshold on the minimum eigenvalue of the window-averaged gradient matrix
    min_eig_threshold: float = 1e-2

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")


@dataclass
class TrackState:
    bbox: tuple  # (x0, y0, x1, y1), float
    points: list = field(default_factory=list)  # list[Corner]
    team: str = "a"
    alive: bool = True


def gradients(img: np.ndarray):
    """Central differences, zero on the one-pixel border."""
    f = np.asarray(img, dtype=np.float64)
    ix = np.zeros_like(f)
    iy = np.zeros_like(f)
    ix[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / 2.0
    iy[1:-1, :] = (f[2:, :] - f[:-2, :]) / 2.0
    return ix, iy


def box_sum(a: np.ndarray, window: int) -> np.ndarray:
    """Sum over a window x window neighbourhood, zero outside the array."""
    r = window // 2
    h, w = a.shape
    c = np.zeros((h + 2 * r + 1, w + 2 * r + 1), dtype=np.float64)
    c[r + 1:r + 1 + h, r + 1:r + 1 + w] = a
    c = c.cumsum(axis=0).cumsum(axis=1)
    return (
        c[window:window + h, window:window + w]
        - c[:h, window:window + w]
        - c[window:window + h, :w]
        + c[:h, :w]
    )


def min_eig_map(g: np.ndarray, window: int = 3) -> np.ndarray:
    """Smallest eigenvalue of the window-summed structure tensor at every pixel."""
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    g = np.asarray(g)
    if g.shape[0] < window or g.shape[1] < window:
        raise ValueError("image smaller than window")
    ix, iy = gradients(g)
    a = box_sum(ix * ix, window)
    b = box_sum(ix * iy, window)
    c = box_sum(iy * iy, window)
    score = (a + c) / 2.0 - np.sqrt(((a - c) / 2.0) ** 2 + b * b)
    # rank-1 tensors can come out a hair below zero
    return np.maximum(score, 0.0)


def _roi_bounds(roi, shape):
    x0, y0, x1, y1 = (int(round(v)) for v in roi)
    h, w = shape
    if x1 < x0 or y1 < y0:
        raise ValueError("degenerate roi")
    if x0 < 0 or y0 < 0 or x1 >= w or y1 >= h:
        raise ValueError("roi outside image")
    return x0, y0, x1, y1


def detect_corners(g, roi, max_n: int = 10, quality: float = 0.05, min_dist: float = 3.0,
                   window: int = 3, score=None) -> list[Corner]:
    """Strongest local maxima of :func:`min_eig_map` inside ``roi``.

    ``score`` may carry a precomputed map for the whole image so several
    boxes in one frame share the work.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    x0, y0, x1, y1 = _roi_bounds(roi, np.shape(g))
    if score is None:
        score = min_eig_map(g, window)
    padded = np.pad(score, 1, constant_values=-np.inf)
    sub = score[y0:y1 + 1, x0:x1 + 1]
    local_max = np.ones_like(sub, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            nb = padded[1 + y0 + dy:2 + y1 + dy, 1 + x0 + dx:2 + x1 + dx]
            local_max &= sub >= nb
    best = sub.max()
    if best <= 0:
        return []
    cand = local_max & (sub > 0) & (sub >= quality * best)
    ys, xs = np.nonzero(cand)
    vals = sub[ys, xs]
    order = np.lexsort((xs, ys, -vals))
    chosen: list[Corner] = []
    d2 = min_dist * min_dist
    for k in order:
        x, y = float(xs[k] + x0), float(ys[k] + y0)
        if all((x - c.x) ** 2 + (y - c.y) ** 2 >= d2 for c in chosen):
            chosen.append(Corner(x, y, float(vals[k])))
            if len(chosen) >= max_n:
                break
    return chosen


# ---------------------------------------------------------------------------
# Lucas-Kanade

_BINOMIAL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _smooth_decimate(img: np.ndarray) -> np.ndarray:
    """5-tap binomial smoothing evaluated only at even rows and columns."""
    mode = "reflect" if min(img.shape) > 2 else "edge"
    p = np.pad(img, 2, mode=mode)
    h, w = img.shape
    ho, wo = (h + 1) // 2, (w + 1) // 2
    rows = sum(_BINOMIAL[k] * p[k:k + 2 * ho - 1:2, :] for k in range(5))
    return sum(_BINOMIAL[k] * rows[:, k:k + 2 * wo - 1:2] for k in range(5))


def build_pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    """Level 0 is the input; each further level is smoothed and halved."""
    pyr = [np.asarray(img, dtype=np.float64)]
    for _ in range(1, levels):
        pyr.append(_smooth_decimate(pyr[-1]))
    return pyr


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample with border replication."""
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    xa = np.minimum(np.floor(x).astype(np.int64), w - 2) if w > 1 else np.zeros_like(x, dtype=np.int64)
    ya = np.minimum(np.floor(y).astype(np.int64), h - 2) if h > 1 else np.zeros_like(y, dtype=np.int64)
    fx = x - xa
    fy = y - ya
    xb = np.minimum(xa + 1, w - 1)
    yb = np.minimum(ya + 1, h - 1)
    top = img[ya, xa] * (1 - fx) + img[ya, xb] * fx
    bot = img[yb, xa] * (1 - fx) + img[yb, xb] * fx
    return top * (1 - fy) + bot * fy


def lk_track(prev: np.ndarray, nxt: np.ndarray, pts, p: LKParams = LKParams(),
             prev_pyr=None, next_pyr=None):
    """Track ``pts`` from ``prev`` to ``nxt``.

    Returns a list of ``((x, y), ok)`` aligned with ``pts``. Each level
    solves ``G d = e`` by Newton-Raphson iterations on bilinearly sampled
    windows, coarse to fine. A point is lost when its gradient matrix at
    full resolution is near singular, when it diverges (a level moves it
    further than one window), or when it lands outside the image.
    """
    prev = np.asarray(prev)
    nxt = np.asarray(nxt)
    if prev.shape != nxt.shape:
        raise ValueError("prev and next must have the same dimensions")
    n = len(pts)
    if n == 0:
        return []
    h, w = prev.shape
    xy = np.array([(pt[0], pt[1]) for pt in pts], dtype=np.float64)

    levels = p.pyramid_levels
    prev_pyr = prev_pyr or build_pyramid(prev, levels)
    next_pyr = next_pyr or build_pyramid(nxt, levels)
    r = p.window // 2
    oy, ox = np.mgrid[-r:r + 1, -r:r + 1]
    ox = ox.ravel()[None, :].astype(np.float64)
    oy = oy.ravel()[None, :].astype(np.float64)
    area = float(p.window * p.window)

    guess = np.zeros((n, 2))
    ok = np.ones(n, dtype=bool)
    for lvl in range(levels - 1, -1, -1):
        scale = 2.0 ** lvl
        img_i, img_j = prev_pyr[lvl], next_pyr[lvl]
        px = xy[:, :1] / scale + ox
        py = xy[:, 1:] / scale + oy
        wi = _bilinear(img_i, px, py)
        # central differences of the interpolated image; away from the border this
        # equals interpolating the central-difference maps, without building them
        wx = (_bilinear(img_i, px + 1.0, py) - _bilinear(img_i, px - 1.0, py)) / 2.0
        wy = (_bilinear(img_i, px, py + 1.0) - _bilinear(img_i, px, py - 1.0)) / 2.0
        gxx = (wx * wx).sum(axis=1) / area
        gxy = (wx * wy).sum(axis=1) / area
        gyy = (wy * wy).sum(axis=1) / area
        det = gxx * gyy - gxy * gxy
        min_eig = (gxx + gyy) / 2.0 - np.sqrt(((gxx - gyy) / 2.0) ** 2 + gxy * gxy)
        solvable = (min_eig >= p.min_eig_threshold) & (det > 0)
        if lvl == 0:
            ok &= solvable

        d = np.zeros((n, 2))
        active = solvable.copy()
        safe_det = np.where(det > 0, det, 1.0)
        for _ in range(p.max_iter):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            sx = guess[idx, :1] + d[idx, :1]
            sy = guess[idx, 1:] + d[idx, 1:]
            wj = _bilinear(img_j, px[idx] + sx, py[idx] + sy)
            diff = wi[idx] - wj
            ex = (diff * wx[idx]).sum(axis=1) / area
            ey = (diff * wy[idx]).sum(axis=1) / area
            step_x = (gyy[idx] * ex - gxy[idx] * ey) / safe_det[idx]
            step_y = (gxx[idx] * ey - gxy[idx] * ex) / safe_det[idx]
            d[idx, 0] += step_x
            d[idx, 1] += step_y
            done = np.hypot(step_x, step_y) < p.epsilon
            active[idx[done]] = False
        diverged = ~np.isfinite(d).all(axis=1) | (np.hypot(d[:, 0], d[:, 1]) > p.window)
        ok &= ~diverged
        d[diverged] = 0.0
        guess = guess + d
        if lvl > 0:
            guess *= 2.0

    new = xy + guess
    inside = (new[:, 0] >= 0) & (new[:, 0] <= w - 1) & (new[:, 1] >= 0) & (new[:, 1] <= h - 1)
    ok &= inside & np.isfinite(new).all(axis=1)
    return [((float(new[i, 0]), float(new[i, 1])), bool(ok[i])) for i in range(n)]


def advance_bbox(t: TrackState, tracked, shape, min_points: int = 3) -> TrackState:
    """Move the box by the median displacement of the points that survived."""
    if len(tracked) != len(t.points):
        raise ValueError("tracked results must align with the track's points")
    kept = []
    disp = []
    for old, ((nx, ny), good) in zip(t.points, tracked):
        if good:
            kept.append(Corner(nx, ny, old.min_eig))
            disp.append((nx - old.x, ny - old.y))
    if len(kept) < min_points:
        return replace(t, points=kept, alive=False)
    dx, dy = np.median(np.array(disp), axis=0)
    h, w = shape[:2]
    x0, y0, x1, y1 = t.bbox
    bw, bh = x1 - x0, y1 - y0
    # translate, then slide back inside the frame without changing size
    nx0 = min(max(x0 + dx, 0.0), max(w - 1.0 - bw, 0.0))
    ny0 = min(max(y0 + dy, 0.0), max(h - 1.0 - bh, 0.0))
    nx1 = min(nx0 + bw, w - 1.0)
    ny1 = min(ny0 + bh, h - 1.0)
    return replace(t, bbox=(float(nx0), float(ny0), float(nx1), float(ny1)), points=kept, alive=True)
