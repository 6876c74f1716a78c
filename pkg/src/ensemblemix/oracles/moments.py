"""Closed first- and second-moment equations of the linear (zeroth-order) model.

At zeroth order every collective operator is linear in the bosonic modes,
S-_a = sqrt(N_a) a_a, and S+_a S-_a = N_a a_a^dag a_a.  The generator is then
quadratic, so <a_i>, <a_i^dag a_j> and <a_i a_j> obey a closed linear system.
With the single-particle matrix

    A(t) = i Hm(t) + G(t),
    Hm = [[Dbar_1, b e^{i phi}], [b e^{-i phi}, Dbar_2]],      b = beta12 sqrt(N1 N2)
    G  = [[gamma_1 N1, c e^{i phi}], [c e^{-i phi}, gamma_2 N2]], c = eta gamma12 sqrt(N1 N2)

and Wbar = (Omega_1 sqrt N1, Omega_2 sqrt N2), the moments evolve as

    d<a>/dt = -A <a> - i Wbar
    dC/dt   = -A^* C - C A^T + i Wbar <a>^T - i <a>^* Wbar^T,     C_ij = <a_i^dag a_j>
    dP/dt   = -A P - P A^T - i (Wbar <a>^T + <a> Wbar^T),         P_ij = <a_i a_j>

Normally ordered moments pick up no vacuum-noise terms.  See
docs/moment_equations.md for the derivation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import astuple, dataclass

import numpy as np

from ..fock import HPOrder, MixParams
from ..model import phase
from ..series import TimeSeries


class MomentClosureError(ValueError):
    """Moments close only for the zeroth-order (linear) model."""


@dataclass(frozen=True)
class MomentState:
    a1: complex = 0j
    a2: complex = 0j
    n1: complex = 0j      # <a1^dag a1>
    n2: complex = 0j      # <a2^dag a2>
    c12: complex = 0j     # <a1^dag a2>
    p12: complex = 0j     # <a1 a2>
    s1: complex = 0j      # <a1 a1>
    s2: complex = 0j      # <a2 a2>

    @classmethod
    def vacuum(cls) -> "MomentState":
        return cls()

    @classmethod
    def from_vector(cls, v) -> "MomentState":
        return cls(*(complex(x) for x in v))

    def to_vector(self) -> np.ndarray:
        return np.array(astuple(self), dtype=complex)

    def excitations(self) -> tuple[float, float]:
        return self.n1.real, self.n2.real

    def cauchy_schwarz_gap(self) -> float:
        """<n1><n2> - |<a1^dag a2>|^2; non-negative for a physical state."""
        return self.n1.real * self.n2.real - abs(self.c12) ** 2


def _require_zeroth(params: MixParams) -> None:
    if params.hp_order is not HPOrder.ZEROTH:
        raise MomentClosureError("moment equations are closed only at zeroth HP order")


class _Coefficients:
    """Time-independent pieces of A(t) and the drive, precomputed once."""

    def __init__(self, params: MixParams):
        m1, m2 = params.mode1, params.mode2
        root = math.sqrt(m1.atom_number * m2.atom_number)
        self.a11 = complex(m1.gamma * m1.atom_number, m1.effective_detuning)
        self.a22 = complex(m2.gamma * m2.atom_number, m2.effective_detuning)
        # off-diagonal of A before the phase: i b + c
        self.cross = complex(params.eta * params.gamma12 * root, params.beta12 * root)
        self.w1 = m1.collective_rabi
        self.w2 = m2.collective_rabi
        self.params = params

    def rhs(self, y: tuple, t: float) -> tuple:
        a1, a2, n1, n2, c12, p12, s1, s2 = y
        e = cmath.exp(1j * phase(t, self.params))
        A11, A22 = self.a11, self.a22
        A12 = self.cross * e
        A21 = self.cross / e
        cA11, cA22, cA12, cA21 = A11.conjugate(), A22.conjugate(), A12.conjugate(), A21.conjugate()
        w1, w2 = self.w1, self.w2
        c21 = c12.conjugate()

        da1 = -(A11 * a1 + A12 * a2) - 1j * w1
        da2 = -(A21 * a1 + A22 * a2) - 1j * w2

        ca1, ca2 = a1.conjugate(), a2.conjugate()
        # C = [[n1, c12], [c21, n2]];  -A^* C - C A^T
        dn1 = -(cA11 * n1 + cA12 * c21) - (n1 * A11 + c12 * A12) + 1j * w1 * a1 - 1j * ca1 * w1
        dn2 = -(cA21 * c12 + cA22 * n2) - (c21 * A21 + n2 * A22) + 1j * w2 * a2 - 1j * ca2 * w2
        dc12 = -(cA11 * c12 + cA12 * n2) - (n1 * A21 + c12 * A22) + 1j * w1 * a2 - 1j * ca1 * w2

        # P = [[s1, p12], [p12, s2]];  -A P - P A^T
        ds1 = -2 * (A11 * s1 + A12 * p12) - 2j * w1 * a1
        ds2 = -2 * (A21 * p12 + A22 * s2) - 2j * w2 * a2
        dp12 = -(A11 * p12 + A12 * s2) - (s1 * A21 + p12 * A22) - 1j * (w1 * a2 + a1 * w2)
        return (da1, da2, dn1, dn2, dc12, dp12, ds1, ds2)


def moment_rhs(state: MomentState, t: float, params: MixParams) -> MomentState:
    """Time derivative of the moment vector at time t."""
    _require_zeroth(params)
    return MomentState(*_Coefficients(params).rhs(astuple(state), t))


def _rk4(f, y, t, dt):
    k1 = f(y, t)
    y2 = tuple(a + 0.5 * dt * b for a, b in zip(y, k1))
    k2 = f(y2, t + 0.5 * dt)
    y3 = tuple(a + 0.5 * dt * b for a, b in zip(y, k2))
    k3 = f(y3, t + 0.5 * dt)
    y4 = tuple(a + dt * b for a, b in zip(y, k3))
    k4 = f(y4, t + dt)
    return tuple(a + dt / 6.0 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4))


def moment_evolve(params: MixParams, t_end: float, dt: float, sample_interval: float | None = None,
                  initial: MomentState | None = None) -> TimeSeries:
    """Classical RK4 on the moment equations, sampled on a uniform grid.

    The returned series fills Ne1, Ne2, phi and (for symmetric parameters)
    the scattered intensity; density-matrix diagnostics are NaN.  The final
    state is stored in ``meta['final_state']``.
    """
    _require_zeroth(params)
    if not (t_end > 0 and dt > 0):
        raise ValueError("t_end and dt must be positive")
    interval = dt if sample_interval is None else sample_interval
    per = max(1, math.ceil(interval / dt - 1e-9))
    step = interval / per
    n_samples = int(round(t_end / interval))
    coeffs = _Coefficients(params)
    y = astuple(initial or MomentState.vacuum())

    symmetric = (params.mode1.atom_number == params.mode2.atom_number
                 and params.mode1.gamma == params.mode2.gamma)
    t_col, ne1, ne2, imix, phis, states = [], [], [], [], [], []
    for i in range(n_samples + 1):
        t = i * interval
        if i > 0:
            t0 = (i - 1) * interval
            for j in range(per):
                y = _rk4(coeffs.rhs, y, t0 + j * step, step)
        phi = phase(t, params)
        t_col.append(t)
        ne1.append(y[2].real)
        ne2.append(y[3].real)
        phis.append(phi)
        if symmetric:
            # same phase convention as observables.intensity
            cross = y[4] * cmath.exp(-1j * phi)
            imix.append(y[2].real + y[3].real + 2 * params.eta * cross.real)
        else:
            imix.append(float("nan"))
        states.append(y)
    series = TimeSeries.from_columns(t=t_col, Ne1=ne1, Ne2=ne2, Imix_over_Ngamma=imix, phi=phis)
    series.meta["final_state"] = MomentState(*y)
    series.meta["moments"] = np.array(states, dtype=complex)
    return series
