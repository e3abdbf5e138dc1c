"""Per-frame offside-line pipeline.

play area -> players (detect or track) -> vanishing point -> offside line.

Detection runs on frames whose index is a multiple of ``detect_interval``;
frames in between only move the detected boxes with the KLT tracker. Player
sets are frozen between detections, and a box whose corners are lost stays
dead until the next detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .components import label_components, largest_component
from .config import PipelineConfig
from .geometry import (
    GeometryError,
    OffsideLine,
    bbox_anchor,
    defender_intercepts,
    estimate_vanishing_point,
    from_hough,
    pairwise_intersections,
    select_last_defender,
)
from .hough import accumulate, angle_distance, filter_by_angle, find_peaks, top_boundary_row
from .imaging import check_image, draw_overlay, hsv_image, to_grayscale
from .morphology import StructuringElement, dilate, fill_holes, opening
from .segmentation import ColorSpec, color_mask_hsv
from .tracking import (
    TrackState,
    advance_bbox,
    build_pyramid,
    detect_corners,
    lk_track,
    min_eig_map,
)

TEAMS = ("a", "b")
OFFSIDE_RGB = (255, 255, 0)


class PipelineError(RuntimeError):
    pass


@dataclass
class PlayArea:
    top_row: int
    field_mask: np.ndarray


@dataclass
class FrameResult:
    frame_index: int
    mode: str  # "detect" | "track"
    top_row: int
    players: dict  # team -> list of (x0, y0, x1, y1)
    vanishing_point: tuple | None = None
    offside: OffsideLine | None = None
    diagnostics: dict = field(default_factory=dict)
    masks: dict = field(default_factory=dict, repr=False)  # debug only, never serialised

    def to_dict(self) -> dict:
        off = None
        if self.offside is not None:
            (vx, vy), (bx, by) = self.offside.segment
            off = {
                "defender_index": self.offside.defender_index,
                "bottom_x": _num(bx),
                "line": [[_num(vx), _num(vy)], [_num(bx), _num(by)]],
            }
        return {
            "frame_index": self.frame_index,
            "mode": self.mode,
            "top_row": self.top_row,
            "players": {t: [[int(v) for v in b] for b in self.players.get(t, [])] for t in TEAMS},
            "vanishing_point": None if self.vanishing_point is None
            else [_num(v) for v in self.vanishing_point],
            "offside": off,
            "diagnostics": self.diagnostics,
        }


def _num(v: float) -> float:
    return round(float(v), 3)


def _round_box(b) -> tuple:
    return tuple(int(math.floor(v + 0.5)) for v in b)


@dataclass
class PipelineState:
    cfg: PipelineConfig
    next_index: int = 0
    shape: tuple | None = None
    prev_pyr: list | None = None
    tracks: dict = field(default_factory=lambda: {t: [] for t in TEAMS})
    last_vp: tuple | None = None
    keep_masks: bool = False


def new_state(cfg: PipelineConfig, keep_masks: bool = False) -> PipelineState:
    return PipelineState(cfg=cfg, keep_masks=keep_masks)


# ---------------------------------------------------------------------------
# Stages

class _WhiteVotes:
    """Hough accumulator of the white mask, shared by both line stages of a frame."""

    def __init__(self, white: np.ndarray, cfg: PipelineConfig):
        self.white = white
        self.cfg = cfg
        self.acc, self.thetas, self.rhos = accumulate(white, cfg.hough)

    def lines(self, exclude: np.ndarray | None = None):
        acc = self.acc
        if exclude is not None:
            off = self.white & exclude
            if off.any():
                acc = acc - accumulate(off, self.cfg.hough)[0]
        return find_peaks(acc, self.thetas, self.rhos, self.cfg.hough)


def detect_play_area(img: np.ndarray, cfg: PipelineConfig, hsv=None, white=None, votes=None) -> PlayArea:
    """Top boundary from the white horizontal line, then the largest pitch blob.

    The pitch evidence is field green together with painted white, since
    lines that run to the frame edge would otherwise cut the green into
    separate pieces.
    """
    check_image(img)
    if hsv is None:
        hsv = hsv_image(img)
    if white is None:
        white = color_mask_hsv(hsv, cfg.line_white)
    if votes is None:
        votes = _WhiteVotes(white, cfg)
    h, w = white.shape
    horizontal = filter_by_angle(votes.lines(), 90.0, cfg.horizontal_tol)
    top_row = top_boundary_row(horizontal, w, h) if horizontal else 0

    evidence = color_mask_hsv(hsv, cfg.field_color) | white
    evidence[:top_row] = False
    se = StructuringElement.box(cfg.open_size)
    field_mask = largest_component(fill_holes(opening(evidence, se)), 8)
    if not field_mask.any():
        raise PipelineError("no field found")
    return PlayArea(top_row=top_row, field_mask=field_mask)


def team_mask(img: np.ndarray, area: PlayArea, spec: ColorSpec, cfg: PipelineConfig, hsv=None):
    if hsv is None:
        hsv = hsv_image(img)
    m = color_mask_hsv(hsv, spec) & area.field_mask
    m = fill_holes(m)
    m = opening(m, StructuringElement.box(cfg.open_size))
    return dilate(m, StructuringElement.box(cfg.dilate_size))


def detect_team_players(img, area: PlayArea, spec: ColorSpec, cfg: PipelineConfig, hsv=None, mask=None):
    """Boxes of jersey-coloured blobs on the pitch, in row-major anchor order."""
    if mask is None:
        mask = team_mask(img, area, spec, cfg, hsv)
    _, comps = label_components(mask, 8)
    return [c.bbox for c in comps if c.area >= cfg.min_area]


def field_lines(white: np.ndarray, area: PlayArea, cfg: PipelineConfig, votes=None):
    """Non-horizontal painted lines on the pitch, as :class:`Line2D`."""
    if votes is None:
        votes = _WhiteVotes(white, cfg)
    lines = votes.lines(exclude=~area.field_mask)
    return [from_hough(ln) for ln in lines if angle_distance(ln.theta, 90.0) > cfg.horizontal_tol]


# ---------------------------------------------------------------------------
# Frame loop

def _start_tracks(gray, boxes, team, cfg: PipelineConfig, score):
    tracks = []
    cp = cfg.corners
    for b in boxes:
        pts = detect_corners(gray, b, cp.max_n, cp.quality, cp.min_dist, cp.window, score=score)
        tracks.append(TrackState(bbox=tuple(float(v) for v in b), points=pts, team=team, alive=bool(pts)))
    return tracks


def _advance_tracks(state: PipelineState, pyr, shape):
    cfg = state.cfg
    live = [(t, tr) for t in TEAMS for tr in state.tracks[t] if tr.alive]
    pts = [p for _, tr in live for p in tr.points]
    tracked = lk_track(state.prev_pyr[0], pyr[0], pts, cfg.lk, prev_pyr=state.prev_pyr, next_pyr=pyr)
    out = {t: [] for t in TEAMS}
    k = 0
    moved = {}
    for team, tr in live:
        n = len(tr.points)
        moved[id(tr)] = advance_bbox(tr, tracked[k:k + n], shape)
        k += n
    for t in TEAMS:
        out[t] = [moved.get(id(tr), tr) for tr in state.tracks[t]]
    return out


def process_frame(state: PipelineState, img: np.ndarray, frame_index: int | None = None):
    """Run one frame through the pipeline; returns ``(new_state, FrameResult)``."""
    check_image(img)
    cfg = state.cfg
    if frame_index is None:
        frame_index = state.next_index
    if frame_index != state.next_index:
        raise PipelineError(f"out-of-order frame index {frame_index}, expected {state.next_index}")
    if state.shape is not None and img.shape != state.shape:
        raise PipelineError(f"frame dimensions changed from {state.shape[:2]} to {img.shape[:2]}")
    h, w = img.shape[:2]

    hsv = hsv_image(img)
    white = color_mask_hsv(hsv, cfg.line_white)
    votes = _WhiteVotes(white, cfg)
    area = detect_play_area(img, cfg, hsv=hsv, white=white, votes=votes)
    gray = to_grayscale(img)
    need_tracking = cfg.detect_interval > 1
    pyr = build_pyramid(gray, cfg.lk.pyramid_levels) if need_tracking else None

    masks = {}
    if state.keep_masks:
        masks["field"] = area.field_mask
        masks["white"] = white

    if frame_index % cfg.detect_interval == 0:
        mode = "detect"
        score = min_eig_map(gray, cfg.corners.window) if need_tracking else None
        tracks = {}
        for t in TEAMS:
            m = team_mask(img, area, cfg.team_color(t), cfg, hsv)
            if state.keep_masks:
                masks[f"team_{t}"] = m
            boxes = detect_team_players(img, area, cfg.team_color(t), cfg, mask=m)
            tracks[t] = (_start_tracks(gray, boxes, t, cfg, score) if need_tracking
                         else [TrackState(bbox=tuple(float(v) for v in b), team=t) for b in boxes])
        # detection frames report the detected boxes, whether or not they carry corners
        players_f = {t: [tr.bbox for tr in tracks[t]] for t in TEAMS}
    else:
        mode = "track"
        tracks = _advance_tracks(state, pyr, img.shape)
        players_f = {t: [tr.bbox for tr in tracks[t] if tr.alive] for t in TEAMS}

    lost = sum(1 for t in TEAMS for tr in tracks[t] if not tr.alive)

    # vanishing point, with fallback to the last good one
    lines = field_lines(white, area, cfg, votes)
    vp, vp_source, rejected = None, "none", 0
    if len(lines) >= 2:
        _, rejected = pairwise_intersections(lines, cfg.vp)
        try:
            vp = estimate_vanishing_point(lines, cfg.vp)
            vp_source = "estimated"
        except GeometryError:
            vp = None
    if vp is None and state.last_vp is not None:
        vp, vp_source = state.last_vp, "reused"

    offside = None
    anchors = [bbox_anchor(b) for b in players_f[cfg.defending_team]]
    intercepts = []
    if vp is not None and anchors:
        intercepts = defender_intercepts(vp, anchors, h - 1)
        try:
            offside = select_last_defender(vp, anchors, h - 1, cfg.defend_side)
        except GeometryError:
            offside = None

    diagnostics = {
        "field_pixels": int(area.field_mask.sum()),
        "field_lines": len(lines),
        "rejected_line_pairs": rejected,
        "vp_source": vp_source,
        "lost_tracks": lost,
        "defender_intercepts": [[i, _num(x)] for i, x in sorted(intercepts, key=lambda c: (c[1], c[0]))],
    }
    result = FrameResult(
        frame_index=frame_index,
        mode=mode,
        top_row=area.top_row,
        players={t: [_round_box(b) for b in players_f[t]] for t in TEAMS},
        vanishing_point=vp,
        offside=offside,
        diagnostics=diagnostics,
        masks=masks,
    )
    new = replace(
        state,
        next_index=frame_index + 1,
        shape=img.shape,
        prev_pyr=pyr,
        tracks=tracks,
        last_vp=vp if vp_source == "estimated" else state.last_vp,
    )
    return new, result


def annotate_frame(img: np.ndarray, r: FrameResult, cfg: PipelineConfig) -> np.ndarray:
    """Team boxes in jersey colours and the offside line down to the bottom row."""
    boxes = [(b, cfg.team_color(t).rgb()) for t in TEAMS for b in r.players.get(t, [])]
    segments = []
    if r.offside is not None:
        p0, p1 = r.offside.segment
        segments.append((p0, p1, OFFSIDE_RGB, 2))
    return draw_overlay(img, boxes, segments)
