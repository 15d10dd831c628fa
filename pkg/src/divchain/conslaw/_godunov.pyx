# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Godunov sweep for quadratic fluxes; twin of _kernels_py.

The arithmetic mirrors the numpy reference expression-for-expression so the
two paths give bit-identical trajectories.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _f(double a, double b, double u) nogil:
    return a * u * u + b * u


cdef inline double _face_flux(double aL, double bL, double aR, double bR,
                              double uL, double uR, double u_lo, double u_hi) nogil:
    cdef double crit, lo, hi, fl, fr, fc, fmin, fmax
    cdef double critL, critR, D, S
    if aL == aR and bL == bR:
        fl = _f(aL, bL, uL)
        fr = _f(aL, bL, uR)
        if uL <= uR:
            lo = uL; hi = uR
        else:
            lo = uR; hi = uL
        fmin = fl if fl < fr else fr
        fmax = fl if fl > fr else fr
        if aL != 0.0:
            crit = -bL / (2.0 * aL)
            if crit > lo and crit < hi:
                fc = _f(aL, bL, crit)
                if fc < fmin:
                    fmin = fc
                if fc > fmax:
                    fmax = fc
        if uL <= uR:
            return fmin
        return fmax
    D = _f(aL, bL, uL)
    fc = _f(aL, bL, u_lo)
    if fc > D:
        D = fc
    if aL != 0.0:
        critL = -bL / (2.0 * aL)
        if critL > u_lo and critL < uL:
            fc = _f(aL, bL, critL)
            if fc > D:
                D = fc
    S = _f(aR, bR, uR)
    fc = _f(aR, bR, u_hi)
    if fc > S:
        S = fc
    if aR != 0.0:
        critR = -bR / (2.0 * aR)
        if critR > uR and critR < u_hi:
            fc = _f(aR, bR, critR)
            if fc > S:
                S = fc
    return D if D < S else S


def godunov_sweep(cnp.ndarray[cnp.float64_t, ndim=1] u0,
                  cnp.ndarray[cnp.float64_t, ndim=1] alpha,
                  cnp.ndarray[cnp.float64_t, ndim=1] beta,
                  double lam, int nsteps, double u_lo, double u_hi):
    cdef Py_ssize_t n = u0.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nsteps + 1, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = u0.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] F = np.empty(n + 1)
    cdef Py_ssize_t i, step
    cdef double aL, bL, aR, bR, uL, uR
    for i in range(n):
        out[0, i] = u[i]
    with nogil:
        for step in range(nsteps):
            for i in range(n + 1):
                if i == 0:
                    aL = alpha[0]; bL = beta[0]; uL = u[0]
                else:
                    aL = alpha[i - 1]; bL = beta[i - 1]; uL = u[i - 1]
                if i == n:
                    aR = alpha[n - 1]; bR = beta[n - 1]; uR = u[n - 1]
                else:
                    aR = alpha[i]; bR = beta[i]; uR = u[i]
                F[i] = _face_flux(aL, bL, aR, bR, uL, uR, u_lo, u_hi)
            for i in range(n):
                u[i] = u[i] - lam * (F[i + 1] - F[i])
                out[step + 1, i] = u[i]
    return out
