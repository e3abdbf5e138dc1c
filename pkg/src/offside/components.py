"""Connected-component labelling of binary masks.

Labelling works on horizontal runs: runs are extracted per row with numpy,
runs in adjacent rows that touch are joined with a union-find, and the label
image is painted back from the runs. Work is proportional to the number of
runs, not pixels, which keeps large field masks cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Component:
    label: int
    area: int
    bbox: tuple  # (x0, y0, x1, y1) inclusive
    anchor: tuple  # (x, y) of the first pixel in row-major order


def _runs(mask: np.ndarray):
    """Row, start and end (inclusive) of every run of True, row-major."""
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded, axis=1)
    rr, cc = np.nonzero(d)
    # transitions alternate start/end within each row
    return rr[0::2], cc[0::2], cc[1::2] - 1


def _touching_pairs(rows, starts, ends, width, connectivity):
    """Index pairs (upper run, lower run) for runs in adjacent rows that touch."""
    k = 1 if connectivity == 8 else 0
    stride = width + 4
    start_key = rows * stride + starts
    end_key = rows * stride + ends
    # run j in row r+1 touches run i in row r iff end_i >= start_j - k and start_i <= end_j + k;
    # such i form a contiguous block in the row-major run order
    lo = np.searchsorted(end_key, (rows - 1) * stride + starts - k, side="left")
    hi = np.searchsorted(start_key, (rows - 1) * stride + ends + k, side="right")
    counts = np.maximum(hi - lo, 0)
    lower = np.repeat(np.arange(len(rows)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    upper = np.repeat(lo, counts) + offsets
    ok = rows[upper] == rows[lower] - 1
    return upper[ok], lower[ok]


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def label_components(mask: np.ndarray, connectivity: int = 8):
    """Label the connected components of ``mask``.

    Returns ``(labels, components)`` where ``labels`` is an int32 image with
    0 on background and 1..K on foreground. Labels follow the row-major order
    of each component's first pixel.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    rows, starts, ends = _runs(mask)
    n = len(rows)
    if n == 0:
        return labels, []

    upper, lower = _touching_pairs(rows, starts, ends, w, connectivity)
    parent = list(range(n))
    for a, b in zip(upper.tolist(), lower.tolist()):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            # keep the earlier run as root so roots are component anchors
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    roots = np.fromiter((_find(parent, i) for i in range(n)), dtype=np.int64, count=n)

    # roots are the first run of each component, so sorted unique roots are in anchor order
    uniq, run_label = np.unique(roots, return_inverse=True)
    run_label = run_label.astype(np.int32) + 1
    k = len(uniq)

    lengths = ends - starts + 1
    flat_start = rows * w + starts
    pos = np.repeat(flat_start - (np.cumsum(lengths) - lengths), lengths) + np.arange(lengths.sum())
    labels.ravel()[pos] = np.repeat(run_label, lengths)

    area = np.bincount(run_label, weights=lengths, minlength=k + 1)[1:].astype(np.int64)
    x0 = np.full(k + 1, w, dtype=np.int64)
    x1 = np.full(k + 1, -1, dtype=np.int64)
    y0 = np.full(k + 1, h, dtype=np.int64)
    y1 = np.full(k + 1, -1, dtype=np.int64)
    np.minimum.at(x0, run_label, starts)
    np.maximum.at(x1, run_label, ends)
    np.minimum.at(y0, run_label, rows)
    np.maximum.at(y1, run_label, rows)

    comps = [
        Component(
            label=i + 1,
            area=int(area[i]),
            bbox=(int(x0[i + 1]), int(y0[i + 1]), int(x1[i + 1]), int(y1[i + 1])),
            anchor=(int(starts[uniq[i]]), int(rows[uniq[i]])),
        )
        for i in range(k)
    ]
    return labels, comps


def largest_component(mask: np.ndarray, connectivity: int = 8) -> np.ndarray:
    """Keep only the largest component; ties go to the earliest anchor."""
    labels, comps = label_components(mask, connectivity)
    if not comps:
        return np.zeros(labels.shape, dtype=bool)
    # components are already in anchor order and max() keeps the first maximum
    best = max(comps, key=lambda c: c.area)
    return labels == best.label


def remove_small(mask: np.ndarray, min_area: int, connectivity: int = 8) -> np.ndarray:
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    labels, comps = label_components(mask, connectivity)
    keep = np.zeros(len(comps) + 1, dtype=bool)
    for c in comps:
        keep[c.label] = c.area >= min_area
    return keep[labels]
