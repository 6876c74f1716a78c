"""Time stepping of the master equation with truncation and validity monitors."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .fock import MixParams, hermiticity_error, min_diagonal, min_eigenvalue, validate_density_matrix
from .model import GeneratorParts, apply_rhs, build_generator, phase
from .observables import AsymmetricParams, excitations, intensity, populations
from .series import COLUMNS, TimeSeries

logger = logging.getLogger(__name__)

MAX_CUTOFF = 64


class SimulationError(RuntimeError):
    exit_code = 1


class CutoffExceeded(SimulationError):
    """Population of the highest retained Fock level went above the guard."""

    exit_code = 3

    def __init__(self, mode: int, t: float, population: float, message: str | None = None):
        self.mode, self.t, self.population = mode, t, population
        super().__init__(
            message
            or f"mode {mode}: top Fock level population {population:.3e} exceeds guard at t={t:.6g}"
        )


class ValidityViolated(SimulationError):
    """Mean excitation per atom too large for the low-excitation expansion."""

    exit_code = 4

    def __init__(self, mode: int, t: float, ratio: float):
        self.mode, self.t, self.ratio = mode, t, ratio
        super().__init__(f"mode {mode}: <n>/N = {ratio:.3e} exceeds validity guard at t={t:.6g}")


class NumericalBlowup(SimulationError):
    exit_code = 5

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite density matrix at t={t:.6g}; reduce dt")


class Method(enum.Enum):
    FIXED_RK4 = "rk4"
    ADAPTIVE_EMBEDDED = "dopri5"


@dataclass(frozen=True)
class EvolveConfig:
    t_end: float
    dt: float | None = None
    sample_interval: float | None = None
    method: Method = Method.FIXED_RK4
    rel_tol: float = 1e-7
    abs_tol: float = 1e-8
    cutoff_guard: float | None = 1e-6
    validity_guard: float | None = 0.1
    track_eigenvalues: bool = True
    snapshot_times: tuple[float, ...] = ()
    backend: str | None = None

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.sample_interval is not None:
            if not self.sample_interval > 0:
                raise ValueError("sample_interval must be positive")
            if self.dt is not None and self.sample_interval < self.dt * (1 - 1e-12):
                raise ValueError("sample_interval must be >= dt")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "method", Method(self.method))


def stability_bound(gen: GeneratorParts) -> float:
    """Upper bound on the spectral radius of the Liouvillian (row-sum norms)."""
    p = gen.params
    l1, l2 = gen.l1, gen.l2
    S = p.mode2.dim
    n1, n2 = np.divmod(np.arange(p.dim), S)
    c = abs(complex(p.beta12, gen.cross_rate))
    rows = (
        np.abs(gen.kdiag)
        + abs(p.mode1.omega_rabi) * (l1[n1 + 1] + l1[n1])
        + abs(p.mode2.omega_rabi) * (l2[n2 + 1] + l2[n2])
        + c * (l1[n1] * l2[n2 + 1] + l1[n1 + 1] * l2[n2])
    )
    jumps = 2 * (gen.gamma1 * l1.max() ** 2 + gen.gamma2 * l2.max() ** 2 + 2 * gen.cross_rate * l1.max() * l2.max())
    return float(2 * rows.max() + jumps)


def default_dt(params: MixParams, gen: GeneratorParts | None = None) -> float:
    """1/40 of the fastest collective time scale, capped by RK4 stability.

    Scales: phase rotation 2 pi/|delta_omega|, collective drive 1/(Omega sqrt N),
    collective decay 1/(gamma N) and collective shift 1/max(|Delta_bar|, beta12 sqrt(N1 N2)).
    """
    scales = []
    if params.delta_omega and params.eta:
        scales.append(2 * math.pi / abs(params.delta_omega))
    rabi = max(abs(m.collective_rabi) for m in params.modes)
    decay = max(m.gamma * m.atom_number for m in params.modes)
    shift = max(
        max(abs(m.effective_detuning) for m in params.modes),
        params.beta12 * math.sqrt(params.mode1.atom_number * params.mode2.atom_number),
    )
    for s in (rabi, decay, shift):
        if s > 0:
            scales.append(1.0 / s)
    dt = min(scales) / 40.0 if scales else 1e-2
    gen = gen or build_generator(params)
    bound = stability_bound(gen)
    if bound > 0:
        dt = min(dt, 2.0 / bound)
    return dt


def _step_grid(config: EvolveConfig, params: MixParams, gen: GeneratorParts) -> tuple[float, int, int]:
    """(dt, steps per sample, number of samples) on a uniform grid ending at t_end."""
    dt = config.dt if config.dt is not None else default_dt(params, gen)
    interval = config.sample_interval
    if interval is None:
        interval = max(dt, config.t_end / 1000.0)
    per = max(1, math.ceil(interval / dt - 1e-9))
    interval = per * dt if config.sample_interval is None else interval
    n_samples = int(round(config.t_end / interval))
    if n_samples < 1:
        raise ValueError("t_end shorter than one sample interval")
    return interval / per, per, n_samples


def step(rho: np.ndarray, t: float, dt: float, gen: GeneratorParts, params: MixParams | None = None,
         backend: str | None = None) -> np.ndarray:
    """One classical RK4 step followed by re-hermitization."""
    out = np.array(rho, dtype=complex, order="C", copy=True)
    ok = kernels.get_backend(backend).rk4_advance(
        out, t, dt, 1, phi0=gen.params.phi0, dw=gen.params.delta_omega, **gen.kernel_args()
    )
    if not ok or not np.all(np.isfinite(out)):
        raise NumericalBlowup(t + dt)
    return out


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


class _Dopri:
    def __init__(self, gen: GeneratorParts, config: EvolveConfig, h0: float):
        self.gen, self.config = gen, config
        self.h = h0
        self.args = gen.kernel_args()
        self.backend = kernels.get_backend(config.backend)

    def f(self, rho, t):
        out = np.empty_like(rho)
        self.backend.rhs(rho, out, phi=phase(t, self.gen.params), **self.args)
        return out

    def advance(self, rho: np.ndarray, t: float, t_target: float) -> np.ndarray:
        cfg = self.config
        while t < t_target - 1e-14 * max(1.0, abs(t_target)):
            h = min(self.h, t_target - t)
            ks = []
            for i in range(7):
                y = rho.copy()
                for a, k in zip(_DP_A[i], ks):
                    if a:
                        y += (h * a) * k
                ks.append(self.f(y, t + _DP_C[i] * h))
            new = rho + h * sum(b * k for b, k in zip(_DP_B, ks) if b)
            err = h * sum(e * k for e, k in zip(_DP_E, ks) if e)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(rho), np.abs(new))
            norm = float(np.max(np.abs(err) / scale))
            if not np.isfinite(norm):
                raise NumericalBlowup(t)
            if norm <= 1.0:
                t += h
                rho = 0.5 * (new + new.conj().T)
            factor = 0.9 * norm ** -0.2 if norm > 0 else 5.0
            self.h = h * min(5.0, max(0.2, factor))
        return rho


def _record(rho, t, params, rows, eigs, track_eigs):
    ne1, ne2 = excitations(rho, params)
    try:
        imix = intensity(rho, t, params)
    except AsymmetricParams:
        imix = float("nan")
    pops = populations(rho, params)
    rows.append(
        (
            t,
            ne1,
            ne2,
            imix,
            abs(np.trace(rho) - 1.0),
            hermiticity_error(rho),
            min_diagonal(rho),
            float(pops[-1, :].sum()),
            float(pops[:, -1].sum()),
            phase(t, params),
        )
    )
    if track_eigs:
        eigs.append(min_eigenvalue(rho))


def _check_guards(row, params: MixParams, config: EvolveConfig):
    t = row[0]
    if config.cutoff_guard is not None:
        for mode, top in ((1, row[7]), (2, row[8])):
            if top > config.cutoff_guard:
                raise CutoffExceeded(mode, t, top)
    if config.validity_guard is not None:
        for mode, ne in ((1, row[1]), (2, row[2])):
            ratio = ne / params.mode(mode).atom_number
            if ratio > config.validity_guard:
                raise ValidityViolated(mode, t, ratio)


def evolve(rho0: np.ndarray, config: EvolveConfig, gen: GeneratorParts | None = None,
           params: MixParams | None = None) -> TimeSeries:
    """Integrate from t = 0 to config.t_end, sampling on a uniform grid.

    Raises CutoffExceeded, ValidityViolated or NumericalBlowup when a guard
    trips; the partial series is attached to the exception as ``series``.
    """
    if gen is None:
        if params is None:
            raise ValueError("need a generator or parameters")
        gen = build_generator(params)
    params = gen.params
    validate_density_matrix(rho0, params)
    dt, per, n_samples = _step_grid(config, params, gen)
    interval = dt * per
    rho = np.array(rho0, dtype=complex, order="C", copy=True)
    rows: list[tuple] = []
    eigs: list[float] = []
    snapshots: dict[float, np.ndarray] = {}
    snap_idx = {int(round(ts / interval)): ts for ts in config.snapshot_times}
    backend = kernels.get_backend(config.backend)
    args = gen.kernel_args()
    dopri = _Dopri(gen, config, dt) if config.method is Method.ADAPTIVE_EMBEDDED else None

    def finish(exc=None):
        data = {c: np.array([r[i] for r in rows], dtype=float) for i, c in enumerate(COLUMNS)}
        series = TimeSeries(
            data,
            min_eig=np.array(eigs) if config.track_eigenvalues else None,
            snapshots=snapshots,
            meta={"dt": dt, "steps_per_sample": per, "method": config.method.value,
                  "backend": getattr(backend, "__name__", str(backend)).rsplit(".", 1)[-1]},
        )
        if exc is not None:
            exc.series = series
            raise exc
        return series

    for i in range(n_samples + 1):
        t = i * interval
        if i > 0:
            t_prev = (i - 1) * interval
            if dopri is None:
                ok = backend.rk4_advance(rho, t_prev, dt, per, phi0=params.phi0,
                                         dw=params.delta_omega, **args)
            else:
                rho = np.ascontiguousarray(dopri.advance(rho, t_prev, t))
                ok = True
            if not ok or not np.all(np.isfinite(rho)):
                finish(NumericalBlowup(t))
        _record(rho, t, params, rows, eigs, config.track_eigenvalues)
        if i in snap_idx:
            snapshots[snap_idx[i]] = rho.copy()
        try:
            _check_guards(rows[-1], params, config)
        except SimulationError as exc:
            finish(exc)
    return finish()


def auto_cutoff(params: MixParams, config: EvolveConfig, start: int = 4, ceiling: int = MAX_CUTOFF,
                pilot_t_end: float | None = None) -> tuple[int, int]:
    """Smallest doubled cutoff pair whose pilot run keeps the top levels below the guard."""
    guard = config.cutoff_guard if config.cutoff_guard is not None else 1e-6
    pilot = EvolveConfig(
        t_end=pilot_t_end or config.t_end,
        dt=config.dt,
        sample_interval=None,
        method=config.method,
        rel_tol=config.rel_tol,
        abs_tol=config.abs_tol,
        cutoff_guard=None,
        validity_guard=config.validity_guard,
        track_eigenvalues=False,
        backend=config.backend,
    )
    M = start
    worst = float("nan")
    while M <= ceiling:
        m1 = min(M, params.mode1.atom_number)
        m2 = min(M, params.mode2.atom_number)
        trial = params.with_cutoffs(m1, m2)
        series = evolve(_vacuum(trial), pilot, build_generator(trial))
        worst = float(max(series["top1"].max(), series["top2"].max()))
        logger.info("auto_cutoff: M=(%d, %d) top-level population %.3e", m1, m2, worst)
        if worst < guard:
            return m1, m2
        if m1 == params.mode1.atom_number and m2 == params.mode2.atom_number:
            break
        M *= 2
    raise CutoffExceeded(
        0, pilot.t_end, worst,
        f"no cutoff up to {ceiling} keeps the top-level population below {guard:g} "
        f"(last pilot: {worst:.3e})",
    )


def _vacuum(params: MixParams) -> np.ndarray:
    rho = np.zeros((params.dim, params.dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


__all__ = [
    "CutoffExceeded",
    "EvolveConfig",
    "Method",
    "NumericalBlowup",
    "SimulationError",
    "TimeSeries",
    "ValidityViolated",
    "apply_rhs",
    "auto_cutoff",
    "default_dt",
    "evolve",
    "stability_bound",
    "step",
]
