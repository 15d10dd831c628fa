"""Kernel selection: compiled sweep when available, numpy twin otherwise."""

from . import _kernels_py

try:
    from . import _godunov as _compiled
    HAVE_COMPILED = True
except ImportError:          # extension not built; the reference path is complete
    _compiled = None
    HAVE_COMPILED = False


def godunov_sweep(u0, alpha, beta, lam, nsteps, u_lo, u_hi, force_python=False):
    if HAVE_COMPILED and not force_python:
        import numpy as np
        return _compiled.godunov_sweep(
            np.ascontiguousarray(u0, dtype=float), np.ascontiguousarray(alpha, dtype=float),
            np.ascontiguousarray(beta, dtype=float), float(lam), int(nsteps),
            float(u_lo), float(u_hi))
    return _kernels_py.godunov_sweep(u0, alpha, beta, lam, nsteps, u_lo, u_hi)


def backend_name():
    return "compiled" if HAVE_COMPILED else "python"
