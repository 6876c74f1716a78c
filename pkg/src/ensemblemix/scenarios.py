"""Flat run configuration, key=value parsing and the figure presets.

Every rate and frequency is in units of gamma_1 and every time in 1/gamma_1,
so gamma_1 itself is not configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .fock import HPOrder, MixParams, ModeSpec
from .integrator import EvolveConfig, Method


class ConfigError(ValueError):
    """Invalid configuration file, flag or parameter combination."""


def _float_list(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    items = [s for s in str(text).replace(" ", "").split(",") if s]
    return tuple(float(x) for x in items)


def _cutoff(value):
    if value is None or str(value).lower() == "auto":
        return None
    return int(value)


def _optional_float(value):
    if value is None or str(value).lower() in ("none", "off", ""):
        return None
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    N1: int = 100
    N2: int = 100
    gamma2: float = 1.0
    beta1: float = 10.0
    beta2: float = 10.0
    delta1: float = 0.0
    delta2: float = 0.0
    omega1: float = 30.0
    omega2: float = 30.0
    eta: float = 0.5
    delta_omega: float = 50.0
    phi0: float = 0.0
    order: int = 1
    cutoff1: int | None = 10         # None selects the cutoff by pilot runs
    cutoff2: int | None = 10
    t_end: float = 3.5
    dt: float | None = None          # None uses the integrator default
    sample_interval: float | None = 0.0025
    method: str = "rk4"
    cutoff_guard: float | None = 1e-6
    validity_guard: float | None = 0.1
    probe_times: tuple[float, ...] | None = None
    eta_grid: tuple[float, ...] = (0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 1.0)

    def __post_init__(self):
        try:
            self.params()
            self.evolve_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.order not in (0, 1):
            raise ConfigError("order must be 0 or 1")
        for eta in self.eta_grid:
            if not 0.0 <= eta <= 1.0:
                raise ConfigError(f"eta grid value {eta} outside [0, 1]")
        for t in self.resolved_probe_times():
            if not 0.0 <= t <= self.t_end * (1 + 1e-12):
                raise ConfigError(f"probe time {t} outside [0, t_end]")
            if self.sample_interval is not None:
                k = t / self.sample_interval
                if abs(k - round(k)) > 1e-6:
                    raise ConfigError(f"probe time {t} is not a multiple of sample_interval")

    # -- conversions ----------------------------------------------------------

    def params(self, cutoffs: tuple[int, int] | None = None) -> MixParams:
        c1, c2 = cutoffs or (self.cutoff1 or 4, self.cutoff2 or 4)
        return MixParams(
            ModeSpec(c1, self.N1, 1.0, self.beta1, self.delta1, self.omega1),
            ModeSpec(c2, self.N2, self.gamma2, self.beta2, self.delta2, self.omega2),
            eta=self.eta,
            delta_omega=self.delta_omega,
            phi0=self.phi0,
            hp_order=HPOrder(self.order),
        )

    def evolve_config(self, snapshot_times=(), backend: str | None = None) -> EvolveConfig:
        return EvolveConfig(
            t_end=self.t_end,
            dt=self.dt,
            sample_interval=self.sample_interval,
            method=Method(self.method),
            cutoff_guard=self.cutoff_guard,
            validity_guard=self.validity_guard,
            snapshot_times=tuple(snapshot_times),
            backend=backend,
        )

    def resolved_probe_times(self) -> tuple[float, ...]:
        """Explicit probe times, or a quarter, half, three quarters and all of t_end."""
        if self.probe_times:
            return tuple(self.probe_times)
        times = tuple(f * self.t_end for f in (0.25, 0.5, 0.75, 1.0))
        if self.sample_interval:
            times = tuple(round(t / self.sample_interval) * self.sample_interval for t in times)
        return times

    def with_updates(self, updates: dict) -> "RunConfig":
        try:
            return replace(self, **coerce(updates))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> list[str]:
        """key=value lines echoing every setting, for CSV headers."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            out.append(f"{f.name}={v}")
        return out


_CONVERTERS = {
    "N1": int, "N2": int, "order": int,
    "cutoff1": _cutoff, "cutoff2": _cutoff,
    "dt": _optional_float, "sample_interval": _optional_float,
    "cutoff_guard": _optional_float, "validity_guard": _optional_float,
    "method": str,
    "probe_times": lambda v: None if v is None else (_float_list(v) or None),
    "eta_grid": _float_list,
}

# keys that set both ensembles at once
_PAIRS = {"N": ("N1", "N2"), "beta": ("beta1", "beta2"), "delta": ("delta1", "delta2"),
          "omega": ("omega1", "omega2"), "cutoff": ("cutoff1", "cutoff2")}

KNOWN_KEYS = {f.name for f in fields(RunConfig)} | set(_PAIRS)


def coerce(raw: dict) -> dict:
    """Expand paired keys and convert values to the field types."""
    out = {}
    for key, value in raw.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        for name in _PAIRS.get(key, (key,)):
            conv = _CONVERTERS.get(name, float)
            try:
                out[name] = conv(value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value {value!r} for {key}") from None
            if isinstance(out[name], float) and not math.isfinite(out[name]):
                raise ConfigError(f"{key} must be finite")
    return out


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    return raw


def load_config_file(path) -> dict:
    try:
        return parse_config_text(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


@dataclass(frozen=True)
class Scenario:
    name: str
    base: RunConfig
    variants: tuple[tuple[str, dict], ...] = ()
    distribution: bool = False
    description: str = ""

    def configs(self, overrides: dict | None = None, variant: str | None = None):
        """(label, RunConfig) pairs; flag/config overrides apply on top of each variant."""
        overrides = overrides or {}
        variants = self.variants or (("", {}),)
        if variant is not None:
            variants = tuple(v for v in variants if v[0] == variant)
            if not variants:
                raise ConfigError(f"scenario {self.name} has no variant {variant!r}")
        return [(label, self.base.with_updates({**extra, **overrides})) for label, extra in variants]


_FIG2 = RunConfig()
# At N = 1000 the excitation peaks within the first laser-difference period
# (about 3.7 excitations at eta = 0.95, t = 0.06), which would need M ~ 17.
# The presets stop at t = 0.025, where M = 11 keeps the top level below 1e-6
# up to eta = 0.95.
_LARGE = _FIG2.with_updates(dict(N=1000, order=0, cutoff=11, t_end=0.025, sample_interval=0.0025, eta=0.9))

PRESETS: dict[str, Scenario] = {
    "fig2": Scenario(
        "fig2", _FIG2,
        description="N=100 per ensemble, first-order expansion; oscillation at the laser difference",
    ),
    "fig3": Scenario(
        "fig3", _FIG2.with_updates(dict(t_end=5.0)),
        variants=(("N100", dict(N=100, cutoff=10)), ("N200", dict(N=200, cutoff=6)),
                  ("N500", dict(N=500, cutoff=5))),
        description="particle-number dependence of the long-time oscillation",
    ),
    "fig4": Scenario(
        "fig4", _LARGE,
        description="N=1000, zeroth order; excitation versus cross-coupling (use sweep)",
    ),
    "fig5": Scenario(
        "fig5", _LARGE.with_updates(dict(probe_times="0.025")),
        variants=(("eta0.85", dict(eta=0.85)), ("eta0.95", dict(eta=0.95))),
        distribution=True,
        description="excitation-number distribution of ensemble 1 at two cross-couplings, t = 0.025",
    ),
    "custom": Scenario("custom", _FIG2, description="fig2 defaults; override anything"),
}


def get_scenario(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(PRESETS)}") from None
