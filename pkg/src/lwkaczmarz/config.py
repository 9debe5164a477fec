"""Experiment settings, the three presets and the flat config format.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment.  Keys are the field names of :class:`ExperimentSpec`.  The
``preset`` key (default ``Custom``) is applied first, then every other key
overrides the preset value, regardless of the order in the file.

``mu0`` left unset means "derive from the preset formula", so overriding
``beta`` or ``tau`` also changes the step parameter.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .penalty import KINDS
from .solver import STEP_RULES, STOP_RULES

PRESETS = ("PAT", "EllipticID", "Schlieren", "Custom")
OPERATORS = ("circular_mean", "elliptic", "schlieren")
NOISE_MODES = ("relative", "absolute")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentSpec:
    preset: str = "Custom"
    operator: str = "circular_mean"
    # cells per side; for the elliptic problem the number of squares per side
    grid: int = 32
    measurements: int = 10
    radius: float = 0.96
    penalty: str = "tvl2"
    beta: float = 1.0
    tau: float = 1.2
    mu0: float | None = None
    mu1: float = 1000.0
    r: float = 2.0
    step_rule: str = "scaled"
    stop_rule: str = "all_skipped"
    max_sweeps: int = 10000
    noise_mode: str = "relative"
    noise_percent: float = 2.0
    # nominal noise level; the absolute noise norm when noise_mode = absolute
    delta: float = 0.01
    seed: int = 0
    xi0: float = 0.0
    eta: float | None = None
    tv_iters: int = 100
    tv_tol: float = 1e-6
    phantom: str = ""
    out: str = "out"

    def __post_init__(self):
        checks = [
            (self.preset in PRESETS, f"preset must be one of {PRESETS}"),
            (self.operator in OPERATORS, f"operator must be one of {OPERATORS}"),
            (self.grid >= 2, "grid must satisfy grid >= 2"),
            (self.measurements >= 1, "measurements must satisfy N >= 1"),
            (self.operator != "elliptic" or self.measurements == 1,
             "the elliptic problem has a single equation: measurements must be 1"),
            (0 < self.radius, "radius must satisfy radius > 0"),
            (self.penalty in KINDS, f"penalty must be one of {KINDS}"),
            (self.beta > 0, "beta must satisfy beta > 0"),
            (self.tau > 1, "tau must satisfy tau > 1"),
            (self.mu0 is None or self.mu0 > 0, "mu0 must satisfy mu0 > 0"),
            (self.mu1 > 0, "mu1 must satisfy mu1 > 0"),
            (1 < self.r < math.inf, "r must satisfy 1 < r < inf"),
            (self.step_rule in STEP_RULES, f"step_rule must be one of {STEP_RULES}"),
            (self.stop_rule in STOP_RULES, f"stop_rule must be one of {STOP_RULES}"),
            (self.max_sweeps >= 0, "max_sweeps must satisfy max_sweeps >= 0"),
            (self.noise_mode in NOISE_MODES, f"noise_mode must be one of {NOISE_MODES}"),
            (self.noise_percent >= 0, "noise_percent must satisfy noise_percent >= 0"),
            (self.delta >= 0, "delta must satisfy delta >= 0"),
            (0 <= self.seed < 2**64, "seed must satisfy 0 <= seed < 2^64"),
            (self.eta is None or 0 <= self.eta < 1, "eta must satisfy 0 <= eta < 1"),
            (self.tv_iters >= 1, "tv_iters must satisfy tv_iters >= 1"),
            (self.tv_tol > 0, "tv_tol must satisfy tv_tol > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    @property
    def mu0_formula(self) -> str:
        if self.operator == "circular_mean":
            return "(1-1/tau)/(beta*sqrt(pi))"
        return "(1-1/tau)/beta"

    @property
    def mu0_value(self) -> float:
        if self.mu0 is not None:
            return self.mu0
        base = (1.0 - 1.0 / self.tau) / self.beta
        if self.operator == "circular_mean":
            return base / math.sqrt(math.pi)
        return base

    @property
    def eta_value(self) -> float:
        if self.eta is not None:
            return self.eta
        return 0.0 if self.operator == "circular_mean" else 0.2

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)

    def echo(self) -> str:
        """``key = value`` lines that :func:`parse_config_text` reads back to the same spec."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "mu0" and v is None:
                lines.append(f"# mu0 = {self.mu0_formula} = {self.mu0_value!r}")
                continue
            if v is None:
                continue
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


PRESET_VALUES = {
    "PAT": dict(operator="circular_mean", grid=160, measurements=80, radius=0.96,
                penalty="tvl2", beta=1.0, tau=1.2, r=2.0, step_rule="scaled",
                noise_mode="relative", noise_percent=2.0, delta=0.01, xi0=0.0),
    "EllipticID": dict(operator="elliptic", grid=100, measurements=1, penalty="tvl2", beta=1.0,
                       tau=1.1, r=2.0, step_rule="adaptive", mu1=4000.0,
                       noise_mode="absolute", delta=0.5e-4, xi0=0.0),
    "Schlieren": dict(operator="schlieren", grid=120, measurements=100, penalty="tvl2",
                      beta=1.0, tau=1.5, r=2.0, step_rule="adaptive", mu1=1000.0,
                      noise_mode="absolute", delta=0.002, xi0=0.01),
    "Custom": {},
}


def preset(name: str, **overrides) -> ExperimentSpec:
    if name not in PRESET_VALUES:
        raise ConfigError(f"preset must be one of {PRESETS}, got {name!r}")
    vals = dict(PRESET_VALUES[name], preset=name)
    vals.update(overrides)
    return ExperimentSpec(**vals)


_FIELDS = {f.name: f for f in fields(ExperimentSpec)}
_INT_FIELDS = {"grid", "measurements", "max_sweeps", "seed", "tv_iters"}
_OPTIONAL_FLOATS = {"mu0", "eta"}
_STR_FIELDS = {"preset", "operator", "penalty", "step_rule", "stop_rule", "noise_mode",
               "phantom", "out"}


def _convert(key: str, raw: str):
    if key in _STR_FIELDS:
        return raw
    if key in _OPTIONAL_FLOATS and raw.lower() in ("none", "auto", ""):
        return None
    if key in _INT_FIELDS:
        return int(raw)
    return float(raw)


def parse_config_text(text: str, source: str = "<config>", **overrides) -> ExperimentSpec:
    """Parse flat ``key = value`` text into a validated :class:`ExperimentSpec`.

    ``overrides`` (already typed) take precedence over the file.
    """
    values: dict = {}
    where: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {raw!r} for key {key!r}") from None
        where[key] = lineno
    values.update({k: v for k, v in overrides.items() if v is not None})
    name = values.pop("preset", "Custom")
    try:
        return preset(name, **values)
    except ConfigError as exc:
        culprit = next((k for k in where if str(exc).startswith(k + " ")), None)
        if culprit is not None:
            raise ConfigError(f"{source}:{where[culprit]}: key {culprit!r}: {exc}") from None
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path, **overrides) -> ExperimentSpec:
    path = Path(path)
    return parse_config_text(path.read_text(), str(path), **overrides)
