"""Synthetic broadcast frames with analytic ground truth.

A scene is a crowd band of seeded colour noise, a one-pixel white boundary
line, a uniform green pitch with white lines converging on a vanishing
point, and players drawn as solid jersey-coloured rectangles. The camera
pans horizontally: frame ``k`` is the world translated by ``k * pan_dx``.

Ground truth is computed here from the scene description alone and never
calls into the detection code.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .imaging import bresenham, encode_ppm, rgb_to_hsv

FIELD_RGB = (40, 150, 40)
LINE_RGB = (255, 255, 255)
TEAM_RGB = {"a": (200, 30, 30), "b": (30, 60, 200)}

# crowd hues are drawn from these bands, which keep clear of field green and both jerseys
_CROWD_HUE_BANDS = [(35.0, 80.0), (160.0, 205.0), (275.0, 325.0)]


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class PlayerSpec:
    team: str
    foot: tuple  # (x, y) bottom-centre in world coordinates at frame 0
    width: int
    height: int
    has_logo_hole: bool = False
    shoe_blobs: int = 0

    def rect(self, shift: float = 0.0):
        """Inclusive (x0, y0, x1, y1) of the jersey rectangle after a pan shift."""
        fx, fy = int(round(self.foot[0] + shift)), int(round(self.foot[1]))
        x0 = fx - self.width // 2
        return (x0, fy - self.height + 1, x0 + self.width - 1, fy)


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    vp: tuple
    boundary_row: int
    crowd_seed: int = 0
    field_lines: tuple = ()
    players: tuple = ()
    pan_dx: float = 0.0
    frames: int = 1
    defending_team: str = "a"
    defend_side: str = "left"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SceneError("width and height must be positive")
        if not 0 <= self.boundary_row < self.height:
            raise SceneError("boundary_row must satisfy 0 <= boundary_row < height")
        if self.frames < 1:
            raise SceneError("frames must be >= 1")
        if self.defending_team not in TEAM_RGB:
            raise SceneError("defending_team must be 'a' or 'b'")
        if self.defend_side not in ("left", "right"):
            raise SceneError("defend_side must be 'left' or 'right'")
        angles = sorted(float(a) for a in self.field_lines)
        for a in angles:
            if not 0.0 < a < 180.0:
                raise SceneError("field line angles must lie strictly between 0 and 180 degrees")
        for a, b in zip(angles, angles[1:]):
            if b - a < 3.0:
                raise SceneError("field line angles must be pairwise at least 3 degrees apart")
        if angles and angles[0] + 180.0 - angles[-1] < 3.0:
            raise SceneError("field line angles must be pairwise at least 3 degrees apart")
        for p in self.players:
            if p.team not in TEAM_RGB:
                raise SceneError(f"unknown team {p.team!r}")
            if p.width < 1 or p.height < 1:
                raise SceneError("player width and height must be positive")
            if p.has_logo_hole and (p.width < 4 or p.height < 4):
                raise SceneError("a player with a logo hole must be at least 4x4")
            if p.rect()[1] <= self.boundary_row:
                raise SceneError("player rectangles must lie below boundary_row")

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        d = dict(d)
        try:
            players = tuple(
                PlayerSpec(
                    team=p["team"],
                    foot=tuple(p["foot"]),
                    width=int(p["width"]),
                    height=int(p["height"]),
                    has_logo_hole=bool(p.get("has_logo_hole", False)),
                    shoe_blobs=int(p.get("shoe_blobs", 0)),
                )
                for p in d.pop("players", [])
            )
            kwargs = dict(
                width=int(d.pop("width")),
                height=int(d.pop("height")),
                vp=tuple(float(v) for v in d.pop("vp")),
                boundary_row=int(d.pop("boundary_row")),
                crowd_seed=int(d.pop("crowd_seed", 0)),
                field_lines=tuple(float(a) for a in d.pop("field_lines", [])),
                pan_dx=float(d.pop("pan_dx", 0.0)),
                frames=int(d.pop("frames", 1)),
                defending_team=d.pop("defending_team", "a"),
                defend_side=d.pop("defend_side", "left"),
            )
        except KeyError as exc:
            raise SceneError(f"scene spec missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise SceneError(f"invalid scene spec value: {exc}") from None
        if d:
            raise SceneError(f"unknown scene spec keys: {sorted(d)}")
        return cls(players=players, **kwargs)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "vp": list(self.vp),
            "boundary_row": self.boundary_row,
            "crowd_seed": self.crowd_seed,
            "field_lines": list(self.field_lines),
            "players": [
                {
                    "team": p.team,
                    "foot": list(p.foot),
                    "width": p.width,
                    "height": p.height,
                    "has_logo_hole": p.has_logo_hole,
                    "shoe_blobs": p.shoe_blobs,
                }
                for p in self.players
            ],
            "pan_dx": self.pan_dx,
            "frames": self.frames,
            "defending_team": self.defending_team,
            "defend_side": self.defend_side,
        }


@dataclass
class GroundTruth:
    frame_index: int
    players: dict = field(default_factory=dict)  # team -> list of bboxes, anchor order
    vanishing_point: tuple = (0.0, 0.0)
    last_defender_index: int | None = None
    bottom_x: float | None = None

    def to_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "players": {t: [list(b) for b in boxes] for t, boxes in self.players.items()},
            "vanishing_point": list(self.vanishing_point),
            "last_defender_index": self.last_defender_index,
            "bottom_x": self.bottom_x,
        }


def _shift(s: SceneSpec, frame_index: int) -> float:
    return frame_index * s.pan_dx


def _crowd_canvas(s: SceneSpec):
    """World-coordinate crowd band covering every frame of the pan."""
    shifts = [_shift(s, k) for k in (0, s.frames - 1)]
    x_lo = int(math.floor(min(-v for v in shifts)))
    x_hi = int(math.ceil(max(-v for v in shifts))) + s.width
    rng = np.random.default_rng(s.crowd_seed)
    n = s.boundary_row * (x_hi - x_lo)
    widths = np.array([b - a for a, b in _CROWD_HUE_BANDS])
    band = rng.choice(len(widths), size=n, p=widths / widths.sum())
    lo = np.array([a for a, _ in _CROWD_HUE_BANDS])[band]
    hue = lo + rng.random(n) * widths[band]
    sat = 0.5 + 0.5 * rng.random(n)
    val = 0.3 + 0.7 * rng.random(n)
    c = val * sat
    hp = hue / 60.0
    x = c * (1 - np.abs(hp % 2 - 1))
    m = val - c
    sector = hp.astype(int) % 6
    zero = np.zeros(n)
    table = [(c, x, zero), (x, c, zero), (zero, c, x), (zero, x, c), (x, zero, c), (c, zero, x)]
    rgb = np.zeros((n, 3))
    for k, (r1, g1, b1) in enumerate(table):
        sel = sector == k
        rgb[sel, 0], rgb[sel, 1], rgb[sel, 2] = r1[sel], g1[sel], b1[sel]
    rgb = np.floor((rgb + m[:, None]) * 255.0 + 0.5).clip(0, 255).astype(np.uint8)
    return rgb.reshape(s.boundary_row, x_hi - x_lo, 3), x_lo


def field_line_pixels(s: SceneSpec, frame_index: int):
    """Integer pixels of each rendered pitch line, one list per angle."""
    vx = s.vp[0] + _shift(s, frame_index)
    vy = s.vp[1]
    top, bottom = s.boundary_row + 1, s.height - 1
    out = []
    if top > bottom:
        return [[] for _ in s.field_lines]
    for ang in s.field_lines:
        t = math.radians(ang)
        dx, dy = math.cos(t), math.sin(t)
        # x at a given row along the ray from the vanishing point
        x_top = vx + (top - vy) * dx / dy
        x_bot = vx + (bottom - vy) * dx / dy
        pts = bresenham(int(round(x_top)), top, int(round(x_bot)), bottom)
        out.append([(x, y) for x, y in pts if 0 <= x < s.width and top <= y <= bottom])
    return out


def _truth(s: SceneSpec, frame_index: int) -> GroundTruth:
    shift = _shift(s, frame_index)
    vp = (s.vp[0] + shift, s.vp[1])
    players: dict = {"a": [], "b": []}
    for p in s.players:
        x0, y0, x1, y1 = p.rect(shift)
        cx0, cy0 = max(x0, 0), max(y0, 0)
        cx1, cy1 = min(x1, s.width - 1), min(y1, s.height - 1)
        if cx0 > cx1 or cy0 > cy1:
            continue
        players[p.team].append((cx0, cy0, cx1, cy1))
    for team in players:
        players[team].sort(key=lambda b: (b[1], b[0]))
    gt = GroundTruth(frame_index=frame_index, players=players, vanishing_point=vp)
    bottom = s.height - 1
    best = None
    for i, (x0, _, x1, y1) in enumerate(players[s.defending_team]):
        ax, ay = (x0 + x1) / 2.0, float(y1)
        if ay == vp[1]:
            continue
        bx = vp[0] + (ax - vp[0]) * (bottom - vp[1]) / (ay - vp[1])
        key = bx if s.defend_side == "left" else -bx
        if best is None or key < best[0]:
            best = (key, i, bx)
    if best is not None:
        gt.last_defender_index, gt.bottom_x = best[1], best[2]
    return gt


def render_scene(s: SceneSpec, frame_index: int):
    """Render one frame; returns ``(image, GroundTruth)``."""
    if not 0 <= frame_index < s.frames:
        raise SceneError(f"frame_index {frame_index} outside [0, {s.frames})")
    h, w = s.height, s.width
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[...] = FIELD_RGB
    shift = _shift(s, frame_index)
    if s.boundary_row > 0:
        canvas, x_lo = _crowd_canvas(s)
        start = int(round(-shift)) - x_lo
        img[:s.boundary_row] = canvas[:, start:start + w]
    img[s.boundary_row] = LINE_RGB
    for pts in field_line_pixels(s, frame_index):
        if pts:
            xs, ys = zip(*pts)
            img[list(ys), list(xs)] = LINE_RGB

    for p in s.players:
        color = TEAM_RGB[p.team]
        x0, y0, x1, y1 = p.rect(shift)
        _fill(img, x0, y0, x1, y1, color)
        if p.has_logo_hole:
            hx = x0 + p.width // 2 - 1
            hy = y0 + p.height // 2 - 1
            _fill(img, hx, hy, hx + 1, hy + 1, FIELD_RGB)
        for k in range(p.shoe_blobs):
            sx = x0 + 4 * k
            _fill(img, sx, y1 + 3, sx + 1, y1 + 3, color)
    return img, _truth(s, frame_index)


def _fill(img, x0, y0, x1, y1, color):
    h, w = img.shape[:2]
    xa, xb = max(x0, 0), min(x1, w - 1)
    ya, yb = max(y0, 0), min(y1, h - 1)
    if xa <= xb and ya <= yb:
        img[ya:yb + 1, xa:xb + 1] = color


def emit_sequence(s: SceneSpec, out_dir) -> int:
    """Write ``frame_NNNN.ppm`` files and ``truth.jsonl``; returns the frame count."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "truth.jsonl"), "w", encoding="utf-8") as truth:
        for k in range(s.frames):
            img, gt = render_scene(s, k)
            with open(os.path.join(out_dir, f"frame_{k:04d}.ppm"), "wb") as fh:
                fh.write(encode_ppm(img))
            truth.write(json.dumps(gt.to_dict(), sort_keys=True) + "\n")
    return s.frames


def palette_hsv():
    """HSV of the rendered colours, handy for building matching configs."""
    return {
        "field": rgb_to_hsv(FIELD_RGB),
        "line": rgb_to_hsv(LINE_RGB),
        **{f"team_{t}": rgb_to_hsv(c) for t, c in TEAM_RGB.items()},
    }
