"""Pipeline configuration and its flat JSON form.

The JSON document must contain exactly the keys of :class:`PipelineConfig`;
missing and unknown keys are both errors so a typo in a threshold name
cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources

from .geometry import VPParams
from .hough import HoughParams
from .segmentation import ColorSpec, hue_ranges_disjoint
from .tracking import LKParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CornerParams:
    max_n: int = 12
    quality: float = 0.01
    min_dist: float = 3.0
    window: int = 3

    def __post_init__(self):
        if self.max_n < 1:
            raise ValueError("max_n must be >= 1")
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError("quality must be in [0, 1]")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")


@dataclass(frozen=True)
class PipelineConfig:
    field_color: ColorSpec
    team_a_color: ColorSpec
    team_b_color: ColorSpec
    line_white: ColorSpec
    defending_team: str = "a"
    defend_side: str = "left"
    detect_interval: int = 30
    open_size: int = 3
    dilate_size: int = 5
    min_area: int = 20
    hough: HoughParams = field(default_factory=HoughParams)
    horizontal_tol: float = 5.0
    vp: VPParams = field(default_factory=VPParams)
    lk: LKParams = field(default_factory=LKParams)
    corners: CornerParams = field(default_factory=CornerParams)

    def __post_init__(self):
        if self.defending_team not in ("a", "b"):
            raise ConfigError("defending_team must be 'a' or 'b'")
        if self.defend_side not in ("left", "right"):
            raise ConfigError("defend_side must be 'left' or 'right'")
        if self.detect_interval < 1:
            raise ConfigError("detect_interval must be >= 1")
        for name in ("open_size", "dilate_size"):
            v = getattr(self, name)
            if v < 1 or v % 2 == 0:
                raise ConfigError(f"{name} must be a positive odd integer")
        if self.min_area < 1:
            raise ConfigError("min_area must be >= 1")
        if self.horizontal_tol < 0:
            raise ConfigError("horizontal_tol must be >= 0")
        if not hue_ranges_disjoint(self.team_a_color, self.team_b_color):
            raise ConfigError("team_a_color and team_b_color hue ranges overlap")

    def team_color(self, team: str) -> ColorSpec:
        return self.team_a_color if team == "a" else self.team_b_color

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = asdict(v) if hasattr(v, "__dataclass_fields__") else v
        return out


_NESTED = {
    "field_color": ColorSpec,
    "team_a_color": ColorSpec,
    "team_b_color": ColorSpec,
    "line_white": ColorSpec,
    "hough": HoughParams,
    "vp": VPParams,
    "lk": LKParams,
    "corners": CornerParams,
}


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config key '{where}' must be an object")
    names = [f.name for f in fields(cls)]
    for k in names:
        if k not in data:
            raise ConfigError(f"missing config key '{where}.{k}'")
    for k in data:
        if k not in names:
            raise ConfigError(f"unknown config key '{where}.{k}'")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config key '{where}': {exc}") from None


def config_from_dict(data: dict) -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    names = [f.name for f in fields(PipelineConfig)]
    for k in names:
        if k not in data:
            raise ConfigError(f"missing config key '{k}'")
    for k in data:
        if k not in names:
            raise ConfigError(f"unknown config key '{k}'")
    kwargs = {}
    for k in names:
        kwargs[k] = _build(_NESTED[k], data[k], k) if k in _NESTED else data[k]
    try:
        return PipelineConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)


def default_config_dict() -> dict:
    """Defaults tuned to the colours rendered by :mod:`offside.synthgen`."""
    text = resources.files("offside").joinpath("data/default_config.json").read_text("utf-8")
    return json.loads(text)


def default_config(**overrides) -> PipelineConfig:
    d = default_config_dict()
    d.update(overrides)
    return config_from_dict(d)
