"""Pure-numpy Godunov sweep for quadratic fluxes f(u) = alpha u^2 + beta u.

Reference implementation of the hot kernel; the compiled extension in
_godunov.pyx follows the same arithmetic expression-for-expression so both
paths produce bit-identical trajectories.
"""

from __future__ import annotations

import numpy as np


def _f(alpha, beta, u):
    return alpha * u * u + beta * u


def godunov_fluxes(u, alpha, beta, u_lo, u_hi):
    """Numerical fluxes on the n+1 faces of n cells (zero-gradient ghosts).

    Same-coefficient faces use the classical Godunov min/max over the
    Riemann interval; faces where (alpha, beta) jump use the demand/supply
    coupling min(D_left(uL), S_right(uR)).
    """
    uL = np.concatenate([u[:1], u])
    uR = np.concatenate([u, u[-1:]])
    aL = np.concatenate([alpha[:1], alpha])
    aR = np.concatenate([alpha, alpha[-1:]])
    bL = np.concatenate([beta[:1], beta])
    bR = np.concatenate([beta, beta[-1:]])

    same = (aL == aR) & (bL == bR)

    # classical Godunov for the shared flux
    fl = _f(aL, bL, uL)
    fr = _f(aL, bL, uR)
    crit = np.where(aL != 0.0, -bL / np.where(aL == 0.0, 1.0, 2.0 * aL), np.inf)
    lo = np.minimum(uL, uR)
    hi = np.maximum(uL, uR)
    has_crit = (aL != 0.0) & (crit > lo) & (crit < hi)
    fc = _f(aL, bL, np.where(has_crit, crit, uL))
    fmin = np.minimum(fl, fr)
    fmin = np.where(has_crit, np.minimum(fmin, fc), fmin)
    fmax = np.maximum(fl, fr)
    fmax = np.where(has_crit, np.maximum(fmax, fc), fmax)
    f_same = np.where(uL <= uR, fmin, fmax)

    # demand/supply coupling across coefficient jumps
    critL = np.where(aL != 0.0, -bL / np.where(aL == 0.0, 1.0, 2.0 * aL), np.inf)
    critR = np.where(aR != 0.0, -bR / np.where(aR == 0.0, 1.0, 2.0 * aR), np.inf)
    D = np.maximum(_f(aL, bL, uL), _f(aL, bL, u_lo))
    inL = (aL != 0.0) & (critL > u_lo) & (critL < uL)
    D = np.where(inL, np.maximum(D, _f(aL, bL, np.where(inL, critL, uL))), D)
    S = np.maximum(_f(aR, bR, uR), _f(aR, bR, u_hi))
    inR = (aR != 0.0) & (critR > uR) & (critR < u_hi)
    S = np.where(inR, np.maximum(S, _f(aR, bR, np.where(inR, critR, uR))), S)
    f_iface = np.minimum(D, S)

    return np.where(same, f_same, f_iface)


def godunov_sweep(u0, alpha, beta, lam, nsteps, u_lo, u_hi):
    """nsteps explicit steps u <- u - lam (F_{i+1/2} - F_{i-1/2}).

    Returns the full trajectory, shape (nsteps + 1, ncells).
    """
    u = np.array(u0, dtype=float)
    out = np.empty((nsteps + 1, len(u)))
    out[0] = u
    for n in range(nsteps):
        F = godunov_fluxes(u, alpha, beta, u_lo, u_hi)
        u = u - lam * (F[1:] - F[:-1])
        out[n + 1] = u
    return out
