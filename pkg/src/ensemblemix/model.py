"""Time-dependent generator of the bosonized two-ensemble master equation.

The collective operators are mapped onto bosonic modes by the
Holstein-Primakoff transformation, expanded to zeroth or first order in
a^dag a / N.  The Hamiltonian (interaction picture, hbar = 1) is

    H(t) = sum_a [(Delta_a - beta_a) n_a + Omega_a (S+_a + S-_a) + beta_a S+_a S-_a]
           + beta12 (S+_1 S-_2 e^{i phi(t)} + S+_2 S-_1 e^{-i phi(t)})

with phi(t) = -phi0 + delta_omega * t, and the master equation reads
rho' = -i[H, rho] - D(rho) with

    D = sum_a gamma_a ([S+_a, S-_a rho] + [rho S+_a, S-_a])
        + eta gamma12 ([S+_1, S-_2 rho] e^{i phi} + [S+_2, S-_1 rho] e^{-i phi} + h.c.).

The constant -N_a/2 from S_z = n - N/2 is dropped from H; it only adds a
global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fock import HPOrder, MixParams, ModeSpec, embed, number_op


def phase(t: float, params: MixParams) -> float:
    """Relative laser phase phi(t) = -phi0 + delta_omega * t (not wrapped)."""
    return -params.phi0 + params.delta_omega * t


def lowering_elements(order: HPOrder, mode: ModeSpec) -> np.ndarray:
    """<m-1|S-|m> for m = 0..M (entry 0 is zero)."""
    m = np.arange(mode.cutoff + 1, dtype=float)
    N = float(mode.atom_number)
    vals = math.sqrt(N) * np.sqrt(m)
    if HPOrder(order) is HPOrder.FIRST:
        vals = vals * (1.0 - (m - 1.0) / (2.0 * N))
    vals[0] = 0.0
    return vals


def hp_lowering(order: HPOrder, mode: ModeSpec) -> sp.csr_matrix:
    """Single-mode S- in the Fock basis; S+ is its conjugate transpose."""
    return sp.diags(lowering_elements(order, mode)[1:], 1, format="csr", dtype=complex)


def number_interaction(mode: ModeSpec) -> sp.csr_matrix:
    """S+ S- = N a^dag a - a^dag^2 a^2, diagonal N m - m (m - 1)."""
    m = np.arange(mode.cutoff + 1, dtype=float)
    return sp.diags(mode.atom_number * m - m * (m - 1.0), 0, format="csr", dtype=complex)


def _pair_interaction(order: HPOrder, mode: ModeSpec) -> sp.csr_matrix:
    # Zeroth order keeps S+S- = N a^dag a so the model stays linear; the exact
    # identity would add a Kerr term -beta m (m - 1).
    if HPOrder(order) is HPOrder.ZEROTH:
        return mode.atom_number * number_op(mode.cutoff)
    return number_interaction(mode)


@dataclass(frozen=True)
class GeneratorParts:
    params: MixParams
    h_static: sp.csr_matrix
    h_cross: sp.csr_matrix
    lowering: tuple[sp.csr_matrix, sp.csr_matrix]
    gamma1: float
    gamma2: float
    cross_rate: float
    # banded data consumed by the kernels
    l1: np.ndarray
    l2: np.ndarray
    kdiag: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.params.dim

    def hamiltonian(self, t: float) -> sp.csr_matrix:
        e = np.exp(1j * phase(t, self.params))
        return (self.h_static + e * self.h_cross + np.conj(e) * self.h_cross.conj().T).tocsr()

    def kernel_args(self) -> dict:
        p = self.params
        return dict(
            M1=p.mode1.cutoff,
            M2=p.mode2.cutoff,
            kdiag=self.kdiag,
            l1=self.l1,
            l2=self.l2,
            om1=float(p.mode1.omega_rabi),
            om2=float(p.mode2.omega_rabi),
            coupling=complex(p.beta12, -self.cross_rate),
            j11=2.0 * self.gamma1,
            j22=2.0 * self.gamma2,
            jx=2.0 * self.cross_rate,
        )


def build_generator(params: MixParams) -> GeneratorParts:
    order = params.hp_order
    h_static = sp.csr_matrix((params.dim, params.dim), dtype=complex)
    lowerings = []
    for which, mode in ((1, params.mode1), (2, params.mode2)):
        s_minus = hp_lowering(order, mode)
        s_plus = s_minus.conj().T.tocsr()
        single = (
            (mode.delta - mode.beta) * number_op(mode.cutoff)
            + mode.omega_rabi * (s_plus + s_minus)
            + mode.beta * _pair_interaction(order, mode)
        )
        h_static = h_static + embed(single, which, params)
        lowerings.append(embed(s_minus, which, params))
    L1, L2 = lowerings
    h_cross = (params.beta12 * (L1.conj().T @ L2)).tocsr()
    h_static = h_static.tocsr()
    diag = h_static.diagonal().real

    l1 = np.zeros(params.mode1.cutoff + 2)
    l2 = np.zeros(params.mode2.cutoff + 2)
    l1[: params.mode1.cutoff + 1] = lowering_elements(order, params.mode1)
    l2[: params.mode2.cutoff + 1] = lowering_elements(order, params.mode2)
    S = params.mode2.dim
    n1, n2 = np.divmod(np.arange(params.dim), S)
    decay = params.mode1.gamma * l1[n1] ** 2 + params.mode2.gamma * l2[n2] ** 2
    kdiag = diag - 1j * decay

    dropped = -0.5 * sum((m.delta - m.beta) * m.atom_number for m in params.modes)
    return GeneratorParts(
        params=params,
        h_static=h_static,
        h_cross=h_cross,
        lowering=(L1, L2),
        gamma1=params.mode1.gamma,
        gamma2=params.mode2.gamma,
        cross_rate=params.eta * params.gamma12,
        l1=l1,
        l2=l2,
        kdiag=np.ascontiguousarray(kdiag, dtype=complex),
        metadata={"dropped_constant_energy": dropped, "hp_order": order.name},
    )


def _check_shape(rho: np.ndarray, gen: GeneratorParts) -> None:
    if rho.shape != (gen.dim, gen.dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match generator dim {gen.dim}")


def apply_rhs(rho: np.ndarray, t: float, gen: GeneratorParts, params: MixParams | None = None,
              backend: str | None = None) -> np.ndarray:
    """Time derivative of a Hermitian density matrix at time t."""
    _check_shape(rho, gen)
    if params is not None and params != gen.params:
        raise ValueError("params do not match the generator")
    out = np.empty((gen.dim, gen.dim), dtype=complex)
    args = gen.kernel_args()
    kernels.get_backend(backend).rhs(
        np.ascontiguousarray(rho, dtype=complex), out, phi=phase(t, gen.params), **args
    )
    return out


def literal_rhs(rho: np.ndarray, t: float, gen: GeneratorParts) -> np.ndarray:
    """Reference right-hand side written term by term from the commutator form.

    Slow (sparse-dense products); used to cross-check the banded kernels.
    """
    _check_shape(rho, gen)
    p = gen.params
    e = np.exp(1j * phase(t, p))
    H = gen.hamiltonian(t)
    L1, L2 = gen.lowering
    P1, P2 = L1.conj().T.tocsr(), L2.conj().T.tocsr()

    def right(a, op):
        # dense @ sparse without densifying op
        return (op.T @ a.T).T

    d = np.zeros_like(rho, dtype=complex)
    for gamma, Sp, Sm in ((gen.gamma1, P1, L1), (gen.gamma2, P2, L2)):
        Smr = Sm @ rho
        rSp = right(rho, Sp)
        d += gamma * ((Sp @ Smr - right(Smr, Sp)) + (right(rSp, Sm) - Sm @ rSp))
    if gen.cross_rate:
        L2r, L1r = L2 @ rho, L1 @ rho
        c = (P1 @ L2r - right(L2r, P1)) * e + (P2 @ L1r - right(L1r, P2)) / e
        d += gen.cross_rate * (c + c.conj().T)
    unitary = -1j * (H @ rho - right(rho, H))
    return unitary - d
