"""Truncated two-mode Fock space: parameters, index maps, ladder operators.

Basis states |m1, m2> are flattened row-major with mode 2 running fastest,
``k = m1 * (M2 + 1) + m2``, so the rows belonging to one value of ``m1`` are
contiguous.  Density matrices are plain ``(D, D)`` complex128 arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp


class HPOrder(enum.IntEnum):
    """Order of the Holstein-Primakoff expansion of the collective operators."""

    ZEROTH = 0
    FIRST = 1


@dataclass(frozen=True)
class ModeSpec:
    """One atomic ensemble and its bosonic truncation.

    All rates are in units of the decay rate of ensemble 1.
    """

    cutoff: int
    atom_number: int
    gamma: float = 1.0
    beta: float = 0.0
    delta: float = 0.0
    omega_rabi: float = 0.0

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff}")
        if int(self.atom_number) != self.atom_number or self.atom_number < 1:
            raise ValueError(f"atom_number must be an integer >= 1, got {self.atom_number}")
        if self.cutoff > self.atom_number:
            raise ValueError(
                f"cutoff {self.cutoff} exceeds the physical excitation bound N={self.atom_number}"
            )
        for name in ("gamma", "beta", "delta", "omega_rabi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @property
    def effective_detuning(self) -> float:
        """Detuning shifted by the mean intra-ensemble dipole-dipole interaction."""
        return self.delta + (self.atom_number - 1) * self.beta

    @property
    def collective_rabi(self) -> float:
        return self.omega_rabi * math.sqrt(self.atom_number)


@dataclass(frozen=True)
class MixParams:
    """Full parameter set of the two-ensemble mixture.

    ``delta_omega`` is the laser frequency difference omega_1 - omega_2 that
    drives the cross-coupling phase; its sign only flips the rotation sense.
    """

    mode1: ModeSpec
    mode2: ModeSpec
    eta: float = 0.0
    delta_omega: float = 0.0
    phi0: float = 0.0
    hp_order: HPOrder = HPOrder.FIRST

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not (math.isfinite(self.delta_omega) and math.isfinite(self.phi0)):
            raise ValueError("delta_omega and phi0 must be finite")
        object.__setattr__(self, "hp_order", HPOrder(self.hp_order))

    @property
    def beta12(self) -> float:
        return self.eta * math.sqrt(self.mode1.beta * self.mode2.beta)

    @property
    def gamma12(self) -> float:
        return math.sqrt(self.mode1.gamma * self.mode2.gamma)

    @property
    def modes(self) -> tuple[ModeSpec, ModeSpec]:
        return (self.mode1, self.mode2)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.mode1.dim, self.mode2.dim)

    @property
    def dim(self) -> int:
        return self.mode1.dim * self.mode2.dim

    def mode(self, which: int) -> ModeSpec:
        if which == 1:
            return self.mode1
        if which == 2:
            return self.mode2
        raise ValueError(f"mode must be 1 or 2, got {which}")

    def replace(self, **changes) -> "MixParams":
        return replace(self, **changes)

    def with_cutoffs(self, m1: int, m2: int | None = None) -> "MixParams":
        m2 = m1 if m2 is None else m2
        return replace(
            self,
            mode1=replace(self.mode1, cutoff=m1),
            mode2=replace(self.mode2, cutoff=m2),
        )


def flat_index(m1: int, m2: int, params: MixParams) -> int:
    M1, M2 = params.mode1.cutoff, params.mode2.cutoff
    if not (0 <= m1 <= M1 and 0 <= m2 <= M2):
        raise IndexError(f"Fock levels ({m1}, {m2}) outside [0..{M1}] x [0..{M2}]")
    return m1 * (M2 + 1) + m2


def unflatten(k: int, params: MixParams) -> tuple[int, int]:
    if not 0 <= k < params.dim:
        raise IndexError(f"flat index {k} outside [0, {params.dim})")
    return divmod(k, params.mode2.cutoff + 1)


def ladder_ops(cutoff: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Truncated annihilation and creation operators on levels 0..cutoff."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    a = sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr", dtype=complex)
    return a, a.conj().T.tocsr()


def number_op(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.arange(cutoff + 1, dtype=complex), 0, format="csr")


def embed(op, which_mode: int, params: MixParams) -> sp.csr_matrix:
    """Lift a single-mode operator onto the joint space (op x 1 or 1 x op)."""
    mode = params.mode(which_mode)
    op = sp.csr_matrix(op)
    if op.shape != (mode.dim, mode.dim):
        raise ValueError(
            f"operator shape {op.shape} does not match mode {which_mode} dimension {mode.dim}"
        )
    other = params.mode(3 - which_mode).dim
    eye = sp.identity(other, dtype=complex, format="csr")
    if which_mode == 1:
        return sp.kron(op, eye, format="csr")
    return sp.kron(eye, op, format="csr")


# -- density matrices ---------------------------------------------------------


def fock_state(m1: int, m2: int, params: MixParams) -> np.ndarray:
    rho = np.zeros((params.dim, params.dim), dtype=complex)
    k = flat_index(m1, m2, params)
    rho[k, k] = 1.0
    return rho


def vacuum_state(params: MixParams) -> np.ndarray:
    return fock_state(0, 0, params)


def product_state(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    return np.kron(rho1, rho2)


def partial_trace(rho: np.ndarray, params: MixParams, keep: int) -> np.ndarray:
    d1, d2 = params.shape
    r = rho.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    if keep == 2:
        return np.einsum("ijil->jl", r)
    raise ValueError("keep must be 1 or 2")


def trace_error(rho: np.ndarray) -> float:
    return abs(np.trace(rho) - 1.0)


def hermiticity_error(rho: np.ndarray) -> float:
    return float(np.max(np.abs(rho - rho.conj().T)))


def min_diagonal(rho: np.ndarray) -> float:
    return float(np.min(rho.diagonal().real))


def min_eigenvalue(rho: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])


def validate_density_matrix(rho: np.ndarray, params: MixParams, tol: float = 1e-8) -> None:
    if rho.shape != (params.dim, params.dim):
        raise ValueError(f"density matrix shape {rho.shape} != ({params.dim}, {params.dim})")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if hermiticity_error(rho) > tol:
        raise ValueError("density matrix is not Hermitian")
    if trace_error(rho) > tol:
        raise ValueError("density matrix does not have unit trace")
    if min_diagonal(rho) < -tol:
        raise ValueError("density matrix has negative populations")
