# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled banded Lindblad right-hand side and fixed-step RK4 driver.

Every operator in the two-ensemble generator moves each Fock label by at
most one, so a row of K = H - i sum G L^dag L has at most seven entries and the
jump terms couple each density-matrix element to a single shifted element.
The arrays ``l1``/``l2`` hold the lowering-matrix elements <m-1|S^-|m> at
index m, padded with zeros at 0 and M+1.
"""

import numpy as np
cimport numpy as cnp

from libc.math cimport cos, sin, isfinite

cnp.import_array()

ctypedef double complex cplx


cdef inline void _axpy(double* y, const double* x, double cr, double ci,
                       Py_ssize_t n) noexcept nogil:
    # y += (cr + i ci) * x over n complex entries stored as (re, im) pairs
    cdef Py_ssize_t i
    cdef double xr, xi
    for i in range(n):
        xr = x[2 * i]
        xi = x[2 * i + 1]
        y[2 * i] += cr * xr - ci * xi
        y[2 * i + 1] += cr * xi + ci * xr


cdef inline void _axpy_scaled(double* y, const double* x, const double* w,
                              double cr, double ci, Py_ssize_t n) noexcept nogil:
    # y += (cr + i ci) * w * x with a real per-column weight w
    cdef Py_ssize_t i
    cdef double xr, xi, wr, wi
    for i in range(n):
        xr = x[2 * i]
        xi = x[2 * i + 1]
        wr = w[i] * cr
        wi = w[i] * ci
        y[2 * i] += wr * xr - wi * xi
        y[2 * i + 1] += wr * xi + wi * xr


cdef void _rhs(const cplx[:, ::1] rho, cplx[:, ::1] out, cplx[:, ::1] x,
               int M1, int M2, const cplx[::1] kdiag,
               const double[::1] l1, const double[::1] l2,
               const double[::1] col1, const double[::1] col2,
               double om1, double om2, cplx coupling,
               double j11, double j22, double jx, double phi) noexcept nogil:
    cdef Py_ssize_t S = M2 + 1
    cdef Py_ssize_t D = (M1 + 1) * S
    cdef Py_ssize_t k, l, m1, m2
    cdef const double* r = <const double*> &rho[0, 0]
    cdef double* xp = <double*> &x[0, 0]
    cdef double* op = <double*> &out[0, 0]
    cdef const double* c1 = &col1[0]
    cdef const double* c2 = &col2[0]
    cdef double* xrow
    cdef double* orow
    cdef double cphi = cos(phi), sphi = sin(phi)
    # coupling * e^{+-i phi}
    cdef double cfr = coupling.real * cphi - coupling.imag * sphi
    cdef double cfi = coupling.real * sphi + coupling.imag * cphi
    cdef double cbr = coupling.real * cphi + coupling.imag * sphi
    cdef double cbi = coupling.imag * cphi - coupling.real * sphi
    cdef double a, kr, ki

    # x = K rho, one row at a time
    for k in range(D):
        m1 = k // S
        m2 = k - m1 * S
        xrow = xp + 2 * k * D
        kr = kdiag[k].real
        ki = kdiag[k].imag
        for l in range(D):
            xrow[2 * l] = kr * r[2 * (k * D + l)] - ki * r[2 * (k * D + l) + 1]
            xrow[2 * l + 1] = kr * r[2 * (k * D + l) + 1] + ki * r[2 * (k * D + l)]
        if m1 < M1:
            _axpy(xrow, r + 2 * (k + S) * D, om1 * l1[m1 + 1], 0.0, D)
        if m1 > 0:
            _axpy(xrow, r + 2 * (k - S) * D, om1 * l1[m1], 0.0, D)
        if m2 < M2:
            _axpy(xrow, r + 2 * (k + 1) * D, om2 * l2[m2 + 1], 0.0, D)
        if m2 > 0:
            _axpy(xrow, r + 2 * (k - 1) * D, om2 * l2[m2], 0.0, D)
        if m1 > 0 and m2 < M2:
            a = l1[m1] * l2[m2 + 1]
            _axpy(xrow, r + 2 * (k - S + 1) * D, a * cfr, a * cfi, D)
        if m1 < M1 and m2 > 0:
            a = l1[m1 + 1] * l2[m2]
            _axpy(xrow, r + 2 * (k + S - 1) * D, a * cbr, a * cbi, D)

    # out = -i x + i x^dag + jump terms
    for k in range(D):
        m1 = k // S
        m2 = k - m1 * S
        orow = op + 2 * k * D
        for l in range(D):
            # -i (xr + i xi) = xi - i xr ; i conj(x_lk) = x_lk.imag + i x_lk.real
            orow[2 * l] = xp[2 * (k * D + l) + 1] + xp[2 * (l * D + k) + 1]
            orow[2 * l + 1] = -xp[2 * (k * D + l)] + xp[2 * (l * D + k)]
        if m1 < M1:
            a = l1[m1 + 1]
            _axpy_scaled(orow, r + 2 * ((k + S) * D + S), c1, j11 * a, 0.0, D - S)
            _axpy_scaled(orow, r + 2 * ((k + S) * D + 1), c2,
                         jx * a * cphi, -jx * a * sphi, D - 1)
        if m2 < M2:
            a = l2[m2 + 1]
            _axpy_scaled(orow, r + 2 * ((k + 1) * D + 1), c2, j22 * a, 0.0, D - 1)
            _axpy_scaled(orow, r + 2 * ((k + 1) * D + S), c1,
                         jx * a * cphi, jx * a * sphi, D - S)


def column_factors(int M1, int M2, const double[::1] l1, const double[::1] l2):
    """Per-column factors l1[n1+1] and l2[n2+1] used by the jump terms."""
    cdef Py_ssize_t S = M2 + 1
    cdef Py_ssize_t D = (M1 + 1) * S
    col1 = np.zeros(D)
    col2 = np.zeros(D)
    cdef double[::1] c1 = col1
    cdef double[::1] c2 = col2
    cdef Py_ssize_t l, n1, n2
    for l in range(D):
        n1 = l // S
        n2 = l - n1 * S
        c1[l] = l1[n1 + 1]
        c2[l] = l2[n2 + 1]
    return col1, col2


def rhs(const cplx[:, ::1] rho, cplx[:, ::1] out, int M1, int M2,
        const cplx[::1] kdiag, const double[::1] l1, const double[::1] l2,
        double om1, double om2, cplx coupling,
        double j11, double j22, double jx, double phi):
    cdef Py_ssize_t D = rho.shape[0]
    x = np.empty((D, D), dtype=np.complex128)
    col1, col2 = column_factors(M1, M2, l1, l2)
    cdef cplx[:, ::1] xv = x
    cdef double[::1] c1 = col1
    cdef double[::1] c2 = col2
    with nogil:
        _rhs(rho, out, xv, M1, M2, kdiag, l1, l2, c1, c2,
             om1, om2, coupling, j11, j22, jx, phi)


cdef void _hermitize(cplx[:, ::1] rho) noexcept nogil:
    cdef Py_ssize_t D = rho.shape[0]
    cdef Py_ssize_t k, l
    cdef cplx a, b
    cdef double re, im
    for k in range(D):
        rho[k, k] = rho[k, k].real
        for l in range(k + 1, D):
            a = rho[k, l]
            b = rho[l, k]
            re = 0.5 * (a.real + b.real)
            im = 0.5 * (a.imag - b.imag)
            rho[k, l] = re + 1j * im
            rho[l, k] = re - 1j * im


def rk4_advance(cplx[:, ::1] rho, double t0, double dt, long nsteps, int M1, int M2,
                const cplx[::1] kdiag, const double[::1] l1, const double[::1] l2,
                double om1, double om2, cplx coupling,
                double j11, double j22, double jx, double phi0, double dw):
    """Advance ``rho`` in place by ``nsteps`` classical RK4 steps.

    The cross-coupling phase is evaluated at t, t + dt/2 and t + dt of each
    step; the state is re-hermitized after every step.  Returns False if a
    non-finite entry appeared.
    """
    cdef Py_ssize_t D = rho.shape[0]
    cdef Py_ssize_t k, l
    cdef long n
    cdef double t, h2 = 0.5 * dt, h6 = dt / 6.0
    x = np.empty((D, D), dtype=np.complex128)
    kk = np.empty((D, D), dtype=np.complex128)
    acc = np.empty((D, D), dtype=np.complex128)
    tmp = np.empty((D, D), dtype=np.complex128)
    col1, col2 = column_factors(M1, M2, l1, l2)
    cdef cplx[:, ::1] xv = x
    cdef cplx[:, ::1] kv = kk
    cdef cplx[:, ::1] av = acc
    cdef cplx[:, ::1] tv = tmp
    cdef double[::1] c1 = col1
    cdef double[::1] c2 = col2
    cdef bint ok = True

    with nogil:
        for n in range(nsteps):
            t = t0 + n * dt
            _rhs(rho, kv, xv, M1, M2, kdiag, l1, l2, c1, c2,
                 om1, om2, coupling, j11, j22, jx, -phi0 + dw * t)
            for k in range(D):
                for l in range(D):
                    av[k, l] = kv[k, l]
                    tv[k, l] = rho[k, l] + h2 * kv[k, l]
            _rhs(tv, kv, xv, M1, M2, kdiag, l1, l2, c1, c2,
                 om1, om2, coupling, j11, j22, jx, -phi0 + dw * (t + h2))
            for k in range(D):
                for l in range(D):
                    av[k, l] = av[k, l] + 2.0 * kv[k, l]
                    tv[k, l] = rho[k, l] + h2 * kv[k, l]
            _rhs(tv, kv, xv, M1, M2, kdiag, l1, l2, c1, c2,
                 om1, om2, coupling, j11, j22, jx, -phi0 + dw * (t + h2))
            for k in range(D):
                for l in range(D):
                    av[k, l] = av[k, l] + 2.0 * kv[k, l]
                    tv[k, l] = rho[k, l] + dt * kv[k, l]
            _rhs(tv, kv, xv, M1, M2, kdiag, l1, l2, c1, c2,
                 om1, om2, coupling, j11, j22, jx, -phi0 + dw * (t + dt))
            for k in range(D):
                for l in range(D):
                    rho[k, l] = rho[k, l] + h6 * (av[k, l] + kv[k, l])
            _hermitize(rho)
            if not (isfinite(rho[0, 0].real) and isfinite(rho[D - 1, D - 1].real)):
                ok = False
                break
    return ok
