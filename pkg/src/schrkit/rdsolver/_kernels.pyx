# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Same contract and parameter-vector layout as _kernels_py; see that module
for the authoritative description.  Expressions are associated exactly as
in the NumPy fallback so the two backends agree to rounding noise.
"""

from libc.math cimport exp, isfinite

import numpy as np

cdef enum:
    _OK = 0
    _NEGATIVE = 1
    _NONFINITE = 2

STATUS_OK = _OK
STATUS_NEGATIVE = _NEGATIVE
STATUS_NONFINITE = _NONFINITE

PVEC_SIZE = 17

cdef enum:
    P_LAM = 0
    P_BETA = 1
    P_ETA1 = 2
    P_ETA2 = 3
    P_ETA3 = 4
    P_ETA4 = 5
    P_SIGMA = 6
    P_G1 = 7
    P_G2 = 8
    P_ETA5 = 9
    P_ETA6 = 10
    P_G3 = 11
    P_G4 = 12
    P_MU1 = 13
    P_MU2 = 14
    P_K1 = 15
    P_K2 = 16


cdef void _raw_copy(double[:, ::1] dst, double[:, ::1] src) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(src.shape[0]):
        for j in range(src.shape[1]):
            dst[i, j] = src[i, j]


cdef int _accept(double[:, ::1] u, double[:, ::1] b, double clamp_tol,
                 double* min_seen) noexcept nogil:
    """Validate the candidate state b, clamp roundoff negatives, move into u."""
    cdef Py_ssize_t ncomp = b.shape[0], n = b.shape[1]
    cdef Py_ssize_t i, j
    cdef double v
    cdef double m = b[0, 0]
    for i in range(ncomp):
        for j in range(n):
            v = b[i, j]
            if not isfinite(v):
                _raw_copy(u, b)
                return _NONFINITE
            if v < m:
                m = v
    if m < min_seen[0]:
        min_seen[0] = m
    if m < -clamp_tol:
        _raw_copy(u, b)
        return _NEGATIVE
    for i in range(ncomp):
        for j in range(n):
            v = b[i, j]
            u[i, j] = 0.0 if v < 0.0 else v
    return _OK


cdef void _explicit_basic(double[:, ::1] u, double[:, ::1] b, double[::1] pv,
                          double d, double idx2, double dt) noexcept nogil:
    cdef Py_ssize_t n = u.shape[1]
    cdef Py_ssize_t j, jm, jp
    cdef double S, C, H, R, bSC, lap
    cdef double lam = pv[P_LAM], beta = pv[P_BETA]
    cdef double eta1 = pv[P_ETA1], eta4 = pv[P_ETA4]
    cdef double sigma = pv[P_SIGMA], g1 = pv[P_G1], g2 = pv[P_G2]
    cdef double a2 = pv[P_ETA2] + pv[P_SIGMA] + pv[P_G1]
    cdef double a3 = pv[P_ETA3] + pv[P_G2]
    for j in range(n):
        jm = 1 if j == 0 else j - 1
        jp = n - 2 if j == n - 1 else j + 1
        S = u[0, j]
        C = u[1, j]
        H = u[2, j]
        R = u[3, j]
        bSC = beta * S * C
        lap = ((u[0, jp] - 2.0 * u[0, j]) + u[0, jm]) * idx2
        b[0, j] = S + dt * (d * lap + ((lam - bSC) - eta1 * S))
        lap = ((u[1, jp] - 2.0 * u[1, j]) + u[1, jm]) * idx2
        b[1, j] = C + dt * (d * lap + (bSC - a2 * C))
        lap = ((u[2, jp] - 2.0 * u[2, j]) + u[2, jm]) * idx2
        b[2, j] = H + dt * (d * lap + ((-a3) * H + sigma * C))
        lap = ((u[3, jp] - 2.0 * u[3, j]) + u[3, jm]) * idx2
        b[3, j] = R + dt * (d * lap + ((g1 * C + g2 * H) - eta4 * R))


cdef void _explicit_extended(double[:, ::1] u, double[:, ::1] b, double[::1] pv,
                             double d, double idx2, double dt) noexcept nogil:
    cdef Py_ssize_t n = u.shape[1]
    cdef Py_ssize_t j, jm, jp
    cdef double S, C, Uc, H, Uh, R, bSC, lap
    cdef double lam = pv[P_LAM], beta = pv[P_BETA]
    cdef double eta1 = pv[P_ETA1], eta4 = pv[P_ETA4]
    cdef double sigma = pv[P_SIGMA], g1 = pv[P_G1], g2 = pv[P_G2]
    cdef double g3 = pv[P_G3], g4 = pv[P_G4]
    cdef double mu1 = pv[P_MU1], mu2 = pv[P_MU2]
    cdef double k1 = pv[P_K1], k2 = pv[P_K2]
    cdef double a2 = pv[P_ETA2] + pv[P_SIGMA] + pv[P_G1]
    cdef double aH = pv[P_ETA3] + pv[P_G2]
    cdef double bUc = pv[P_MU2] + pv[P_ETA5] + pv[P_G3]
    cdef double bUh = pv[P_K2] + pv[P_ETA6] + pv[P_G4]
    for j in range(n):
        jm = 1 if j == 0 else j - 1
        jp = n - 2 if j == n - 1 else j + 1
        S = u[0, j]
        C = u[1, j]
        Uc = u[2, j]
        H = u[3, j]
        Uh = u[4, j]
        R = u[5, j]
        bSC = beta * S * C
        lap = ((u[0, jp] - 2.0 * u[0, j]) + u[0, jm]) * idx2
        b[0, j] = S + dt * (d * lap + ((lam - bSC) - eta1 * S))
        lap = ((u[1, jp] - 2.0 * u[1, j]) + u[1, jm]) * idx2
        b[1, j] = C + dt * (d * lap + (((bSC - a2 * C) + mu2 * Uc) - mu1 * C))
        lap = ((u[2, jp] - 2.0 * u[2, j]) + u[2, jm]) * idx2
        b[2, j] = Uc + dt * (d * lap + (mu1 * C - bUc * Uc))
        lap = ((u[3, jp] - 2.0 * u[3, j]) + u[3, jm]) * idx2
        b[3, j] = H + dt * (d * lap + ((((-aH) * H + sigma * C) + k2 * Uh) - k1 * H))
        lap = ((u[4, jp] - 2.0 * u[4, j]) + u[4, jm]) * idx2
        b[4, j] = Uh + dt * (d * lap + (k1 * H - bUh * Uh))
        lap = ((u[5, jp] - 2.0 * u[5, j]) + u[5, jm]) * idx2
        b[5, j] = R + dt * (d * lap
                            + ((((g1 * C + g2 * H) - eta4 * R) + g3 * Uc) + g4 * Uh))


def run_explicit(double[:, ::1] u, double[::1] pv, double d, double dx,
                 double dt, long nsteps, double clamp_tol):
    """Forward-Euler steps: u += dt * (d * lap_h(u) + rates(u))."""
    cdef Py_ssize_t ncomp = u.shape[0], n = u.shape[1]
    cdef double idx2 = 1.0 / (dx * dx)
    cdef double min_seen = float("inf")
    buf = np.empty((ncomp, n), dtype=np.float64)
    cdef double[:, ::1] b = buf
    cdef long k
    cdef int status
    with nogil:
        for k in range(nsteps):
            if ncomp == 4:
                _explicit_basic(u, b, pv, d, idx2, dt)
            else:
                _explicit_extended(u, b, pv, d, idx2, dt)
            status = _accept(u, b, clamp_tol, &min_seen)
            if status != _OK:
                with gil:
                    return status, k + 1, min_seen
    return _OK, nsteps, min_seen


cdef void _rates_into(double[:, ::1] u, double[:, ::1] b, double[::1] pv,
                      double dt) noexcept nogil:
    """b = u + dt * rates(u); association mirrors the NumPy fallback."""
    cdef Py_ssize_t ncomp = u.shape[0], n = u.shape[1]
    cdef Py_ssize_t j
    cdef double S, C, Uc, H, Uh, R, bSC
    cdef double lam = pv[P_LAM], beta = pv[P_BETA]
    cdef double eta1 = pv[P_ETA1], eta4 = pv[P_ETA4]
    cdef double sigma = pv[P_SIGMA], g1 = pv[P_G1], g2 = pv[P_G2]
    cdef double g3 = pv[P_G3], g4 = pv[P_G4]
    cdef double mu1 = pv[P_MU1], mu2 = pv[P_MU2]
    cdef double k1 = pv[P_K1], k2 = pv[P_K2]
    cdef double a2 = pv[P_ETA2] + pv[P_SIGMA] + pv[P_G1]
    cdef double aH = pv[P_ETA3] + pv[P_G2]
    cdef double bUc = pv[P_MU2] + pv[P_ETA5] + pv[P_G3]
    cdef double bUh = pv[P_K2] + pv[P_ETA6] + pv[P_G4]
    if ncomp == 4:
        for j in range(n):
            S = u[0, j]
            C = u[1, j]
            H = u[2, j]
            R = u[3, j]
            bSC = beta * S * C
            b[0, j] = S + dt * ((lam - bSC) - eta1 * S)
            b[1, j] = C + dt * (bSC - a2 * C)
            b[2, j] = H + dt * ((-aH) * H + sigma * C)
            b[3, j] = R + dt * ((g1 * C + g2 * H) - eta4 * R)
    else:
        for j in range(n):
            S = u[0, j]
            C = u[1, j]
            Uc = u[2, j]
            H = u[3, j]
            Uh = u[4, j]
            R = u[5, j]
            bSC = beta * S * C
            b[0, j] = S + dt * ((lam - bSC) - eta1 * S)
            b[1, j] = C + dt * (((bSC - a2 * C) + mu2 * Uc) - mu1 * C)
            b[2, j] = Uc + dt * (mu1 * C - bUc * Uc)
            b[3, j] = H + dt * ((((-aH) * H + sigma * C) + k2 * Uh) - k1 * H)
            b[4, j] = Uh + dt * (k1 * H - bUh * Uh)
            b[5, j] = R + dt * ((((g1 * C + g2 * H) - eta4 * R) + g3 * Uc) + g4 * Uh)


def run_imex(double[:, ::1] u, double[::1] pv, double d, double dx,
             double dt, long nsteps, double clamp_tol):
    """Implicit diffusion / explicit reaction steps.

    Solves (I - dt*d*lap_h) u_new = u + dt*rates(u) per compartment by the
    Thomas algorithm on the Neumann tridiagonal system (diagonally dominant
    M-matrix: no pivoting needed, elimination cannot break down).
    """
    cdef Py_ssize_t ncomp = u.shape[0], n = u.shape[1]
    cdef double r = dt * d / (dx * dx)
    cdef double diag = 1.0 + 2.0 * r
    cdef double min_seen = float("inf")
    buf = np.empty((ncomp, n), dtype=np.float64)
    cp_arr = np.empty(n, dtype=np.float64)
    dp_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] b = buf
    cdef double[::1] cp = cp_arr
    cdef double[::1] dp = dp_arr
    cdef Py_ssize_t i, j
    cdef long k
    cdef int status
    cdef double denom, lower

    # constant-coefficient Thomas factorisation: cp holds the modified
    # upper diagonal (upper row 0 is -2r, interior -r; lower mirrored)
    with nogil:
        cp[0] = (-2.0 * r) / diag
        for j in range(1, n - 1):
            cp[j] = (-r) / (diag - (-r) * cp[j - 1])
        for k in range(nsteps):
            _rates_into(u, b, pv, dt)
            status = 0
            for i in range(ncomp):
                for j in range(n):
                    if not isfinite(b[i, j]):
                        status = _NONFINITE
                        break
                if status != 0:
                    break
            if status != 0:
                _raw_copy(u, b)
                with gil:
                    return _NONFINITE, k + 1, min_seen
            for i in range(ncomp):
                dp[0] = b[i, 0] / diag
                for j in range(1, n):
                    lower = -2.0 * r if j == n - 1 else -r
                    denom = diag - lower * cp[j - 1]
                    dp[j] = (b[i, j] - lower * dp[j - 1]) / denom
                b[i, n - 1] = dp[n - 1]
                for j in range(n - 2, -1, -1):
                    b[i, j] = dp[j] - cp[j] * b[i, j + 1]
            status = _accept(u, b, clamp_tol, &min_seen)
            if status != _OK:
                with gil:
                    return status, k + 1, min_seen
    return _OK, nsteps, min_seen


def run_forced_heat(double[::1] u, double[::1] g, double d, double dx,
                    double dt, long nsteps, double t0):
    """Forward-Euler scalar diffusion with source exp(-t) * g(x)."""
    cdef Py_ssize_t n = u.shape[0]
    cdef double idx2 = 1.0 / (dx * dx)
    buf = np.empty(n, dtype=np.float64)
    cdef double[::1] b = buf
    cdef Py_ssize_t j, jm, jp
    cdef long k
    cdef double t, e, lap
    cdef int bad
    with nogil:
        for k in range(nsteps):
            t = t0 + k * dt
            e = exp(-t)
            for j in range(n):
                jm = 1 if j == 0 else j - 1
                jp = n - 2 if j == n - 1 else j + 1
                lap = ((u[jp] - 2.0 * u[j]) + u[jm]) * idx2
                b[j] = u[j] + dt * (d * lap + e * g[j])
            bad = 0
            for j in range(n):
                if not isfinite(b[j]):
                    bad = 1
                u[j] = b[j]
            if bad:
                with gil:
                    return _NONFINITE, k + 1, float("inf")
    return _OK, nsteps, float("inf")
