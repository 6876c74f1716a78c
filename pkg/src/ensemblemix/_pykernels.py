"""NumPy implementation of the banded Lindblad kernels.

Same call signatures as the compiled ``_ckernels`` module; used when the
extension is not built or ``ENSEMBLEMIX_PURE_PYTHON`` is set.
"""

import numpy as np


def column_factors(M1, M2, l1, l2):
    S = M2 + 1
    n1, n2 = np.divmod(np.arange((M1 + 1) * S), S)
    return np.asarray(l1)[n1 + 1].astype(float), np.asarray(l2)[n2 + 1].astype(float)


def _row_coefficients(M1, M2, l1, l2, om1, om2):
    S = M2 + 1
    n1, n2 = np.divmod(np.arange((M1 + 1) * S), S)
    up1 = om1 * l1[n1 + 1]          # row k couples to k + S
    dn1 = om1 * l1[n1]              # row k couples to k - S
    up2 = om2 * l2[n2 + 1]          # k + 1
    dn2 = om2 * l2[n2]              # k - 1
    fwd = l1[n1] * l2[n2 + 1]       # k - S + 1, times the phased coupling
    bwd = l1[n1 + 1] * l2[n2]       # k + S - 1
    return up1, dn1, up2, dn2, fwd, bwd


class _Plan:
    __slots__ = ("M1", "M2", "S", "D", "rows", "col1", "col2", "l1", "l2")

    def __init__(self, M1, M2, l1, l2, om1, om2):
        self.M1, self.M2 = M1, M2
        self.S = M2 + 1
        self.D = (M1 + 1) * self.S
        self.l1 = np.asarray(l1, dtype=float)
        self.l2 = np.asarray(l2, dtype=float)
        self.rows = [c[:, None] for c in _row_coefficients(M1, M2, self.l1, self.l2, om1, om2)]
        self.col1, self.col2 = column_factors(M1, M2, self.l1, self.l2)


def _apply(plan, rho, out, kdiag, coupling, j11, j22, jx, phi):
    S, D = plan.S, plan.D
    up1, dn1, up2, dn2, fwd, bwd = plan.rows
    eip = np.exp(1j * phi)
    x = kdiag[:, None] * rho
    x[:-S] += up1[:-S] * rho[S:]
    x[S:] += dn1[S:] * rho[:-S]
    x[:-1] += up2[:-1] * rho[1:]
    x[1:] += dn2[1:] * rho[:-1]
    x[S - 1:] += (coupling * eip) * fwd[S - 1:] * rho[: D - S + 1]
    x[: D - S + 1] += (coupling / eip) * bwd[: D - S + 1] * rho[S - 1:]

    out[...] = -1j * x
    out += 1j * x.conj().T
    lr1 = plan.l1[np.arange(D) // S + 1][:, None]
    lr2 = plan.l2[np.arange(D) % S + 1][:, None]
    c1, c2 = plan.col1, plan.col2
    out[:-S, :-S] += (j11 * lr1[:-S]) * c1[:-S] * rho[S:, S:]
    out[:-1, :-1] += (j22 * lr2[:-1]) * c2[:-1] * rho[1:, 1:]
    out[:-1, :-S] += (jx * eip * lr2[:-1]) * c1[:-S] * rho[1:, S:]
    out[:-S, :-1] += (jx / eip * lr1[:-S]) * c2[:-1] * rho[S:, 1:]
    return out


def rhs(rho, out, M1, M2, kdiag, l1, l2, om1, om2, coupling, j11, j22, jx, phi):
    plan = _Plan(M1, M2, l1, l2, om1, om2)
    _apply(plan, np.asarray(rho), out, np.asarray(kdiag), coupling, j11, j22, jx, phi)


def rk4_advance(rho, t0, dt, nsteps, M1, M2, kdiag, l1, l2, om1, om2, coupling,
                j11, j22, jx, phi0, dw):
    plan = _Plan(M1, M2, l1, l2, om1, om2)
    kdiag = np.asarray(kdiag)
    k = np.empty_like(rho)
    args = (kdiag, coupling, j11, j22, jx)
    for n in range(nsteps):
        t = t0 + n * dt
        k1 = _apply(plan, rho, k, *args, -phi0 + dw * t).copy()
        k2 = _apply(plan, rho + 0.5 * dt * k1, k, *args, -phi0 + dw * (t + 0.5 * dt)).copy()
        k3 = _apply(plan, rho + 0.5 * dt * k2, k, *args, -phi0 + dw * (t + 0.5 * dt)).copy()
        k4 = _apply(plan, rho + dt * k3, k, *args, -phi0 + dw * (t + dt))
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho[...] = 0.5 * (rho + rho.conj().T)
        if not (np.isfinite(rho[0, 0]) and np.isfinite(rho[-1, -1])):
            return False
    return True
