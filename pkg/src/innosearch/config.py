"""Run configuration: defaults, flat key = value config files, CLI overrides.

Config files are flat text: one `key = value` per line, # starts a comment,
blank lines are fine. Keys match the CLI flag names with underscores.
Unknown or duplicate keys are hard errors so typos cannot silently fall
back to defaults. Precedence is CLI flag over file over default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, List, Optional

from .model import CostModel, ModelParams
from .solver import SolverConfig


class ConfigError(ValueError):
    """Bad configuration: unknown key, unparseable or out-of-range value."""


@dataclass
class RunConfig:
    # instance
    p: float = 0.5
    v: float = 2.0
    delta: float = 0.9
    cost_family: str = "reciprocal"
    c0: float = 0.0
    k: float = 1.0
    # solver
    grid_size: int = 2048
    tol: float = 1e-9
    max_iters: int = 100_000
    inner_tol: float = 1e-10
    # simulation
    runs: int = 100_000
    seed: int = 12345
    # horizon is command-specific: path length for solve, censoring cap for
    # simulate, number of periods for oracle. None picks the command default.
    horizon: Optional[int] = None
    # discrete benchmark
    slots: int = 8
    budget: int = 10_000_000
    # output
    out: str = "out"
    format: str = "csv,json"

    def model_params(self) -> ModelParams:
        try:
            cost = CostModel(self.cost_family, self.c0, self.k)
            return ModelParams(self.p, self.v, self.delta, cost)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(
                grid_size=self.grid_size,
                tol=self.tol,
                max_iters=self.max_iters,
                inner_tol=self.inner_tol,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def validated(self) -> "RunConfig":
        self.model_params()
        self.solver_config()
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.slots < 1:
            raise ConfigError(f"slots must be >= 1, got {self.slots}")
        if self.budget < 1:
            raise ConfigError(f"budget must be >= 1, got {self.budget}")
        tokens = {t.strip() for t in self.format.split(",") if t.strip()}
        unknown = tokens - {"csv", "json", "svg"}
        if unknown:
            raise ConfigError(f"unknown output format(s): {', '.join(sorted(unknown))}")
        if not tokens:
            raise ConfigError("format must name at least one of csv, json, svg")
        return self

    def formats(self) -> set:
        return {t.strip() for t in self.format.split(",") if t.strip()}


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    typ = _FIELDS[key].type
    raw = raw.strip()
    try:
        if typ == "float":
            return float(raw)
        if typ in ("int", "Optional[int]"):
            x = float(raw)
            if x != int(x):
                raise ValueError
            return int(x)
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r}") from None


def parse_config_file(path: str) -> Dict[str, object]:
    """Read a flat key = value file into typed values, rejecting unknown keys."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
            key, _, raw = text.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def load_run_config(path: Optional[str], overrides: Dict[str, object]) -> RunConfig:
    """Defaults, then file values, then non-None CLI overrides; validates the result."""
    config = RunConfig()
    if path is not None:
        for key, value in parse_config_file(path).items():
            setattr(config, key, value)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown override {key!r}")
        setattr(config, key, value)
    return config.validated()


SWEEP_PARAMETERS = ("p", "v", "delta", "c0", "k", "scale")


@dataclass
class SweepSpec:
    """One-dimensional parameter sweep.

    `scale` multiplies v, c0, and k jointly, and scales the solver tolerance
    with them: tol is an absolute quantity in value units, so holding it fixed
    would solve larger instances to a worse relative accuracy and break the
    exact-homogeneity comparison the sweep exists to demonstrate.
    """

    parameter: str
    values: List[float]

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}, got {self.parameter!r}"
            )
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        for x in self.values:
            self._check_value(float(x))

    def _check_value(self, x: float):
        par = self.parameter
        if par in ("p", "delta") and not (0.0 < x < 1.0):
            raise ConfigError(f"sweep value {x} out of range for {par}: need (0, 1)")
        if par in ("v", "k", "scale") and not (x > 0.0):
            raise ConfigError(f"sweep value {x} out of range for {par}: need > 0")
        if par == "c0" and not (x >= 0.0):
            raise ConfigError(f"sweep value {x} out of range for c0: need >= 0")

    def apply(self, base: RunConfig, value: float) -> RunConfig:
        variant = dataclasses.replace(base)
        if self.parameter == "scale":
            variant.v = base.v * value
            variant.c0 = base.c0 * value
            variant.k = base.k * value
            variant.tol = base.tol * value
        else:
            setattr(variant, self.parameter, value)
        return variant.validated()
