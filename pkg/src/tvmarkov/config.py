"""Scenario configuration: schema, YAML loading and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigValidationError
from .presets import PRESET_NAMES

EXPERIMENTS = ("bounds", "rates", "clt", "mixing", "certify")


@dataclass
class ScenarioConfig:
    """One experiment run: model preset, sizes, smoothing rule and seeds.

    bandwidth_rule (c, exponent) means b = c * n^(-exponent).
    """

    experiment: str
    model: dict
    n_list: list
    u_grid: list
    bandwidth_rule: tuple = (1.0, 0.2)
    replicates: int = 1
    seed: int = 0
    output_dir: str = "out"
    j_max: int = 40
    figures: bool = True

    def bandwidth(self, n: int) -> float:
        c, exponent = self.bandwidth_rule
        return float(c) * float(n) ** (-float(exponent))

    def preset(self) -> str:
        return self.model.get("preset", "")


def load_config(path, strict: bool = True) -> ScenarioConfig:
    """Parse a YAML scenario; with strict=True any diagnostic is fatal."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigValidationError("config root must be a mapping")
    known = {"experiment", "model", "n_list", "u_grid", "bandwidth_rule",
             "replicates", "seed", "output_dir", "j_max", "figures"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigValidationError(f"unknown config keys: {sorted(unknown)}")
    missing = {"experiment", "model", "n_list"} - set(raw)
    if missing:
        raise ConfigValidationError(f"missing required keys: {sorted(missing)}")
    raw.setdefault("u_grid", [round(0.05 * t, 10) for t in range(21)])
    if "bandwidth_rule" in raw:
        raw["bandwidth_rule"] = tuple(raw["bandwidth_rule"])
    cfg = ScenarioConfig(**raw)
    if strict:
        problems = validate(cfg)
        if problems:
            raise ConfigValidationError("; ".join(problems))
    return cfg


def validate(cfg: ScenarioConfig) -> list:
    """Structural diagnostics; an empty list means the config is runnable."""
    problems = []
    if cfg.experiment not in EXPERIMENTS:
        problems.append(f"experiment: {cfg.experiment!r} not in {EXPERIMENTS}")
    if not isinstance(cfg.model, dict) or "preset" not in cfg.model:
        problems.append("model: must be a mapping with a 'preset' key")
    elif cfg.model["preset"] not in PRESET_NAMES:
        problems.append(f"model.preset: {cfg.model['preset']!r} not in {PRESET_NAMES}")
    if not cfg.n_list or any(int(n) < 2 for n in cfg.n_list):
        problems.append("n_list: must be a nonempty list of integers >= 2")
    elif list(cfg.n_list) != sorted(set(int(n) for n in cfg.n_list)):
        problems.append("n_list: must be strictly increasing")
    for t, u in enumerate(cfg.u_grid):
        if not 0.0 <= float(u) <= 1.0:
            problems.append(f"u_grid[{t}]: {u} outside [0, 1]")
    if int(cfg.replicates) < 1:
        problems.append("replicates: must be >= 1")
    c, exponent = cfg.bandwidth_rule
    if float(c) <= 0 or not 0 <= float(exponent) < 1:
        problems.append("bandwidth_rule: need c > 0 and exponent in [0, 1)")
    if cfg.model.get("preset") == "inar1":
        problems.extend(_inar_diagnostics(cfg.model))
    return problems


def _inar_diagnostics(model: dict) -> list:
    from .errors import ModelInvalidError
    from .presets import make_inar1
    try:
        kwargs = {}
        if "alpha" in model:
            kwargs["alpha_spec"] = model["alpha"]
        if "lambda" in model:
            kwargs["lambda_spec"] = model["lambda"]
        make_inar1(**kwargs)
    except (ModelInvalidError, ConfigValidationError) as exc:
        return [f"model: {exc}"]
    return []
