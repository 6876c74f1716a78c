"""Execute configured runs, eta sweeps and oracle comparisons."""

from __future__ import annotations

import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fock import HPOrder, vacuum_state
from .integrator import SimulationError, auto_cutoff, evolve
from .model import build_generator
from .observables import ExcitationDistribution, excitation_distribution, poisson_distance
from .scenarios import ConfigError, RunConfig
from .series import UNITS_LINE, TimeSeries, format_float

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: RunConfig
    series: TimeSeries
    cutoffs: tuple[int, int]
    distributions: dict[float, tuple[ExcitationDistribution, ExcitationDistribution]] = field(
        default_factory=dict
    )
    error: SimulationError | None = None

    def header(self, scenario: str = "custom", label: str = "") -> list[str]:
        lines = [f"scenario={scenario}" + (f" variant={label}" if label else "")]
        lines += self.config.echo()
        lines.append(f"resolved_cutoffs={self.cutoffs[0]},{self.cutoffs[1]}")
        for key, value in sorted(self.series.meta.items()):
            lines.append(f"run_{key}={value}")
        if self.error is not None:
            lines.append(f"aborted: {type(self.error).__name__}: {self.error}")
        return lines


def resolve_cutoffs(cfg: RunConfig, backend: str | None = None) -> tuple[int, int]:
    if cfg.cutoff1 is not None and cfg.cutoff2 is not None:
        return cfg.cutoff1, cfg.cutoff2
    m1, m2 = auto_cutoff(cfg.params(), cfg.evolve_config(backend=backend))
    return cfg.cutoff1 or m1, cfg.cutoff2 or m2


def run_config(cfg: RunConfig, distribution: bool = False, backend: str | None = None,
               raise_errors: bool = True) -> RunResult:
    """Evolve from the joint ground state and collect the requested outputs.

    With ``raise_errors=False`` a tripped guard is stored on the result along
    with the partial series instead of propagating.
    """
    cutoffs = resolve_cutoffs(cfg, backend)
    params = cfg.params(cutoffs)
    gen = build_generator(params)
    probes = cfg.resolved_probe_times() if distribution else ()
    try:
        series = evolve(vacuum_state(params), cfg.evolve_config(probes, backend), gen)
        error = None
    except SimulationError as exc:
        if raise_errors:
            raise
        series, error = exc.series, exc
    series.meta["dropped_constant_energy"] = gen.metadata["dropped_constant_energy"]
    result = RunResult(cfg, series, cutoffs, error=error)
    for t, rho in sorted(series.snapshots.items()):
        result.distributions[t] = (
            excitation_distribution(rho, 1, params),
            excitation_distribution(rho, 2, params),
        )
    return result


def distribution_csv(result: RunResult, header: list[str] | None = None) -> str:
    """Long-format table t_probe, i, P1, P2 with Poisson distances in the header."""
    buf = io.StringIO()
    buf.write(f"# {UNITS_LINE}\n")
    for line in header or []:
        buf.write(f"# {line}\n")
    for t, (d1, d2) in sorted(result.distributions.items()):
        buf.write(f"# t_probe={format_float(t)} mean1={format_float(d1.mean)} "
                  f"poisson_distance1={format_float(poisson_distance(d1))} "
                  f"mean2={format_float(d2.mean)} poisson_distance2={format_float(poisson_distance(d2))}\n")
    buf.write("t_probe,i,P1,P2\n")
    for t, (d1, d2) in sorted(result.distributions.items()):
        n = max(len(d1.probabilities), len(d2.probabilities))
        p1 = np.zeros(n)
        p2 = np.zeros(n)
        p1[: len(d1.probabilities)] = d1.probabilities
        p2[: len(d2.probabilities)] = d2.probabilities
        for i in range(n):
            buf.write(f"{format_float(t)},{i},{format_float(p1[i])},{format_float(p2[i])}\n")
    return buf.getvalue()


# -- eta sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    eta: float
    t_probe: float
    Ne1: float


def _sweep_one(cfg: RunConfig, eta: float, probes: tuple[float, ...], backend, keep_going: bool):
    point_cfg = cfg.with_updates({"eta": eta})
    result = run_config(point_cfg, backend=backend, raise_errors=not keep_going)
    series = result.series
    t_last = series.t[-1] if len(series) else -math.inf
    rows = []
    for t in probes:
        # after an aborted run, probe times past the last good sample are unknown
        ne1 = series.value_at("Ne1", t) if t <= t_last + 1e-9 else math.nan
        rows.append(SweepPoint(eta, t, ne1))
    return rows, result.error


def sweep_eta(cfg: RunConfig, grid=None, probe_times=None, jobs: int = 1, backend: str | None = None,
              keep_going: bool = False) -> tuple[list[SweepPoint], dict[float, SimulationError]]:
    """One evolve per eta; N_e1 recorded at every probe time, sorted by (eta, t_probe).

    Without ``keep_going`` the first tripped guard propagates.  Otherwise the
    failure is returned per eta and unreachable probe values are NaN.
    """
    grid = tuple(sorted(cfg.eta_grid if grid is None else grid))
    for eta in grid:
        if not 0.0 <= eta <= 1.0:
            raise ConfigError(f"eta {eta} outside [0, 1]")
    probes = tuple(sorted(probe_times or cfg.resolved_probe_times()))
    cfg.with_updates({"probe_times": probes})  # validates probe times against the grid
    args = [(cfg, eta, probes, backend, keep_going) for eta in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_sweep_one, *zip(*args)))
    else:
        outs = [_sweep_one(*a) for a in args]
    points: list[SweepPoint] = []
    errors: dict[float, SimulationError] = {}
    for eta, (rows, err) in zip(grid, outs):
        points.extend(rows)
        if err is not None:
            errors[eta] = err
    points.sort(key=lambda p: (p.eta, p.t_probe))
    return points, errors


def sweep_csv(points: list[SweepPoint], header: list[str] | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# {UNITS_LINE}\n")
    for line in header or []:
        buf.write(f"# {line}\n")
    buf.write("eta,t_probe,Ne1\n")
    for p in points:
        buf.write(f"{format_float(p.eta)},{format_float(p.t_probe)},{format_float(p.Ne1)}\n")
    return buf.getvalue()


# -- oracle comparisons -----------------------------------------------------------


@dataclass
class OracleReport:
    oracle: str
    t: np.ndarray
    main: tuple[np.ndarray, np.ndarray]
    reference: tuple[np.ndarray, np.ndarray]

    @property
    def max_abs_diff(self) -> float:
        return float(max(np.max(np.abs(a - b)) for a, b in zip(self.main, self.reference)))

    def to_csv(self, header: list[str] | None = None) -> str:
        buf = io.StringIO()
        buf.write(f"# {UNITS_LINE}\n")
        for line in header or []:
            buf.write(f"# {line}\n")
        buf.write(f"# oracle={self.oracle} max_abs_diff={format_float(self.max_abs_diff)}\n")
        buf.write("t,Ne1,Ne2,Ne1_oracle,Ne2_oracle,diff1,diff2\n")
        (m1, m2), (r1, r2) = self.main, self.reference
        for row in zip(self.t, m1, m2, r1, r2, m1 - r1, m2 - r2):
            buf.write(",".join(format_float(v) for v in row) + "\n")
        return buf.getvalue()


def oracle_compare(cfg: RunConfig, oracle: str, result: RunResult | None = None,
                   max_excitation: int | None = None) -> OracleReport:
    """Re-run the configuration through an independent oracle on the same time grid."""
    from .oracles.dicke import dicke_evolve
    from .oracles.moments import MomentClosureError, moment_evolve

    result = result or run_config(cfg)
    series = result.series
    params = cfg.params(result.cutoffs)
    interval = series.sample_interval
    t_end = float(series.t[-1])
    if oracle == "moments":
        if params.hp_order is not HPOrder.ZEROTH:
            raise ConfigError("the moment oracle needs order=0")
        dt = series.meta["dt"]
        try:
            ref = moment_evolve(params, t_end, dt, interval)
        except MomentClosureError as exc:
            raise ConfigError(str(exc)) from None
    elif oracle == "dicke":
        try:
            ref = dicke_evolve(params, t_end, interval, max_excitation=max_excitation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        raise ConfigError(f"unknown oracle {oracle!r}")
    n = min(len(series), len(ref))
    return OracleReport(
        oracle,
        series.t[:n],
        (series["Ne1"][:n], series["Ne2"][:n]),
        (ref["Ne1"][:n], ref["Ne2"][:n]),
    )
