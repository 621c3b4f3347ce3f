"""Strict JSON configuration for scenarios and bargaining base points.

Schema (every key optional, unknown keys rejected)::

    {
      "scenario": {<ScenarioConfig field>: value, ...},
      "bargain":  {"r_s", "r_b", "delta_s", "delta_eta_b", "p1", "p2",
                   "alpha", "tau"},
      "sweep":    {"r0": float, "delta_b": float}
    }

Missing scenario keys take the experimental defaults (p1 = 0.9, budgets
U(600, 1000), reserves U(200, 400), margins U(0, 1), k in {7, 10, 15, 20}).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bargain import BargainError, BargainParams
from .market import (SWEEP_BASE, SWEEP_BASE_DELTA_B, SWEEP_BASE_R0, ScenarioConfig,
                     ScenarioError)

SECTIONS = ("scenario", "bargain", "sweep")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    bargain: BargainParams = SWEEP_BASE
    r0: float = SWEEP_BASE_R0
    delta_b: float = SWEEP_BASE_DELTA_B


def _check_keys(section: str, given: dict, allowed) -> None:
    if not isinstance(given, dict):
        raise ConfigError(f"{section}: expected an object, got {type(given).__name__}")
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}: unknown key (allowed: {', '.join(sorted(allowed))})")


def _number(path: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float, list)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return value


def build_config(doc: dict, overrides: dict | None = None) -> Config:
    _check_keys("<root>", doc, SECTIONS)
    scen = dict(doc.get("scenario", {}))
    _check_keys("scenario", scen, [f.name for f in dataclasses.fields(ScenarioConfig)])
    scen.update(overrides or {})
    for key, value in scen.items():
        if key != "oracle":
            _number(f"scenario.{key}", value)
    try:
        scenario = ScenarioConfig(**scen)
    except (ScenarioError, TypeError) as exc:
        key = next((k for k in scen if k in str(exc)), "")
        raise ConfigError(f"scenario{'.' + key if key else ''}: {exc}") from None

    bg = doc.get("bargain", {})
    _check_keys("bargain", bg, [f.name for f in dataclasses.fields(BargainParams)])
    for key, value in bg.items():
        _number(f"bargain.{key}", value)
    try:
        bargain = dataclasses.replace(SWEEP_BASE, **bg)
    except BargainError as exc:
        key = next((k for k in bg if k in str(exc)), "")
        raise ConfigError(f"bargain{'.' + key if key else ''}: {exc}") from None

    sw = doc.get("sweep", {})
    _check_keys("sweep", sw, ("r0", "delta_b"))
    r0 = float(_number("sweep.r0", sw.get("r0", bargain.r_s if "r_s" in bg else SWEEP_BASE_R0)))
    delta_b = float(_number("sweep.delta_b", sw.get(
        "delta_b", bargain.delta_eta_b if "delta_eta_b" in bg else SWEEP_BASE_DELTA_B)))
    if r0 < 0:
        raise ConfigError(f"sweep.r0: must be nonnegative, got {r0}")
    if not 0 <= delta_b < 1:
        raise ConfigError(f"sweep.delta_b: must lie in [0, 1), got {delta_b}")
    return Config(scenario, bargain, r0, delta_b)


def parse_config(path: str | Path | None, overrides: dict | None = None) -> Config:
    """Load and validate a config file; ``None`` or an empty file gives defaults."""
    if path is None:
        return build_config({}, overrides)
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return build_config(doc, overrides)
