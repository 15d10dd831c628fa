"""Batched adaptive Gauss-Kronrod quadrature.

All integrands are vectorized: they accept an array of abscissae and return
an array of values, so adaptive refinement evaluates every active segment in
a single call.  Declared breakpoints split the range into smooth pieces
before any subdivision happens, which is what keeps piecewise-smooth
integrands (fields with jump sets) cheap.
"""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError

# G7-K15 rule on [-1, 1]; Gauss nodes are the odd-index Kronrod nodes.
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_GAUSS_IDX = np.arange(1, 15, 2)

DEFAULT_TOL = 1e-10


def _segments_from_breaks(a, b, breakpoints):
    pts = [a]
    for p in sorted(set(float(q) for q in breakpoints)):
        if a + 1e-14 * max(1, abs(a)) < p < b - 1e-14 * max(1, abs(b)):
            pts.append(p)
    pts.append(b)
    return np.array(pts[:-1]), np.array(pts[1:])


def gk_segments(f, lo, hi):
    """G7-K15 on each [lo_i, hi_i]; returns (kronrod values, error estimates).

    One call to f with every node of every segment.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _XGK[None, :]   # (nseg, 15)
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    ik = half * (vals @ _WGK)
    ig = half * (vals[:, _GAUSS_IDX] @ _WG)
    # QUADPACK-style sharpened error estimate
    resabs = half * (np.abs(vals) @ _WGK)
    mean = ik / np.where(hi - lo == 0, 1, hi - lo)
    resasc = half * (np.abs(vals - mean[:, None]) @ _WGK)
    raw = np.abs(ik - ig)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            (resasc != 0) & (raw != 0),
            resasc * np.minimum(1.0, (200.0 * raw / np.where(resasc == 0, 1, resasc)) ** 1.5),
            raw,
        )
    err = np.where(raw == 0, 0.0, scaled)
    return ik, err


def integrate_1d(f, a, b, breakpoints=(), tol_abs=DEFAULT_TOL, tol_rel=DEFAULT_TOL,
                 max_segments=16384):
    """Adaptive integral of vectorized f over [a, b].

    Returns (value, error_estimate).  Raises IntegrationError when the
    segment budget is exhausted before the tolerance is met.
    """
    a = float(a)
    b = float(b)
    if b <= a:
        return 0.0, 0.0
    lo, hi = _segments_from_breaks(a, b, breakpoints)
    vals, errs = gk_segments(f, lo, hi)
    for _ in range(64):
        total = float(np.sum(vals))
        errsum = float(np.sum(errs))
        tol = max(tol_abs, tol_rel * abs(total))
        if errsum <= tol:
            return total, errsum
        if len(lo) > max_segments:
            raise IntegrationError(
                f"1d quadrature stalled: {len(lo)} segments, error {errsum:.3e} > {tol:.3e}")
        # split every segment holding more than its length-share of the budget
        share = tol * (hi - lo) / (b - a)
        bad = errs > np.maximum(share, 1e-300)
        if not np.any(bad):
            bad = errs >= 0.5 * errs.max()
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[~bad], lo[bad], mid])
        new_hi = np.concatenate([hi[~bad], mid, hi[bad]])
        keep_vals, keep_errs = vals[~bad], errs[~bad]
        ref_vals, ref_errs = gk_segments(f, np.concatenate([lo[bad], mid]),
                                         np.concatenate([mid, hi[bad]]))
        lo, hi = new_lo, new_hi
        vals = np.concatenate([keep_vals, ref_vals])
        errs = np.concatenate([keep_errs, ref_errs])
    raise IntegrationError("1d quadrature did not converge")


class CurvedCell:
    """Region a1 <= x1 <= b1, lo(x1) <= x2 <= hi(x1), lo/hi vectorized."""

    def __init__(self, a1, b1, lo, hi):
        self.a1 = float(a1)
        self.b1 = float(b1)
        self.lo = lo if callable(lo) else (lambda x, c=float(lo): np.full_like(x, c))
        self.hi = hi if callable(hi) else (lambda x, c=float(hi): np.full_like(x, c))


def _cell_tensor(f, cell, rect):
    """Tensor G7-K15 on sub-rectangles of a cell's (x1, s) parameter square.

    rect: (nrect, 4) array of (u0, u1, s0, s1).  Returns (vals, errs).
    """
    u0, u1, s0, s1 = rect.T
    umid, uhalf = 0.5 * (u0 + u1), 0.5 * (u1 - u0)
    smid, shalf = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
    xu = umid[:, None] + uhalf[:, None] * _XGK[None, :]          # (nr, 15)
    xs = smid[:, None] + shalf[:, None] * _XGK[None, :]          # (nr, 15)
    x1 = np.repeat(xu[:, :, None], 15, axis=2)                   # (nr, 15, 15)
    ss = np.repeat(xs[:, None, :], 15, axis=1)
    lo = cell.lo(x1.ravel())
    hi = cell.hi(x1.ravel())
    width = hi - lo
    x2 = lo + ss.ravel() * width
    pts = np.column_stack([x1.ravel(), x2])
    vals = np.asarray(f(pts), dtype=float) * width
    vals = vals.reshape(-1, 15, 15)
    jac = (uhalf * shalf)[:, None, None]
    ik = np.einsum("rij,i,j->r", vals, _WGK, _WGK) * jac[:, 0, 0]
    g = vals[:, _GAUSS_IDX][:, :, _GAUSS_IDX]
    ig = np.einsum("rij,i,j->r", g, _WG, _WG) * jac[:, 0, 0]
    return ik, np.abs(ik - ig)


def integrate_cell(f, cell, tol_abs=1e-10, tol_rel=1e-10, max_rects=16384):
    """Adaptive tensor quadrature of vectorized f(pts) over one curved cell."""
    rects = np.array([[cell.a1, cell.b1, 0.0, 1.0]])
    vals, errs = _cell_tensor(f, cell, rects)
    for _ in range(40):
        total = float(np.sum(vals))
        errsum = float(np.sum(errs))
        tol = max(tol_abs, tol_rel * abs(total))
        if errsum <= tol:
            return total, errsum
        if len(rects) > max_rects:
            raise IntegrationError(
                f"2d quadrature stalled: {len(rects)} cells, error {errsum:.3e} > {tol:.3e}")
        area = (rects[:, 1] - rects[:, 0]) * (rects[:, 3] - rects[:, 2])
        share = tol * area / area.sum()
        bad = errs > np.maximum(share, 1e-300)
        if not np.any(bad):
            bad = errs >= 0.5 * errs.max()
        keep = rects[~bad]
        kv, ke = vals[~bad], errs[~bad]
        split = []
        for u0, u1, s0, s1 in rects[bad]:
            if (u1 - u0) >= (s1 - s0):
                um = 0.5 * (u0 + u1)
                split += [[u0, um, s0, s1], [um, u1, s0, s1]]
            else:
                sm = 0.5 * (s0 + s1)
                split += [[u0, u1, s0, sm], [u0, u1, sm, s1]]
        split = np.array(split)
        sv, se = _cell_tensor(f, cell, split)
        rects = np.vstack([keep, split])
        vals = np.concatenate([kv, sv])
        errs = np.concatenate([ke, se])
    raise IntegrationError("2d quadrature did not converge")


def integrate_cells(f, cells, tol_abs=1e-10, tol_rel=1e-10):
    """Sum of integrate_cell over a cell decomposition (fixed order)."""
    if not cells:
        return 0.0, 0.0
    per = max(tol_abs / len(cells), 1e-15)
    total, err = 0.0, 0.0
    for cell in cells:
        v, e = integrate_cell(f, cell, tol_abs=per, tol_rel=tol_rel)
        total += v
        err += e
    return total, err


def integrate_polar(f, center, radius, theta_breaks=(), tol_abs=1e-10, tol_rel=1e-10,
                    half=None):
    """Integral of f over a disc (or half-disc) via polar coordinates.

    half: optional unit vector nu; restricts to the half-disc
    {y : <y - center, nu> >= 0} when sign=+1 is encoded by passing (nu, +1)
    or (nu, -1).
    """
    cx, cy = center
    t0, t1 = 0.0, 2.0 * np.pi
    breaks = list(theta_breaks)
    if half is not None:
        nu, sign = half
        # half-plane <e(theta), sign*nu> >= 0 is an interval of length pi
        phi = np.arctan2(sign * nu[1], sign * nu[0])
        t0, t1 = phi - np.pi / 2, phi + np.pi / 2
    # fold every angular break into [t1 - 2 pi, t1]
    breaks = [b + 2 * np.pi * np.floor((t1 - b) / (2 * np.pi)) for b in breaks]

    def integrand(pts):
        th = pts[:, 0]
        rho = pts[:, 1]
        xy = np.column_stack([cx + rho * np.cos(th), cy + rho * np.sin(th)])
        return np.asarray(f(xy), dtype=float) * rho

    # put declared angular breakpoints in as separate cells
    bks = sorted(b for b in breaks if t0 < b < t1)
    edges = [t0] + bks + [t1]
    cells = [CurvedCell(pa, pb, 0.0, float(radius)) for pa, pb in zip(edges[:-1], edges[1:])]
    return integrate_cells(integrand, cells, tol_abs=tol_abs, tol_rel=tol_rel)


def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def integrate_to_upper(g, upper, kinks=(), tol_rel=1e-12, n0=8, n_max=256):
    """Per-point integral F_i = \\int_0^{upper_i} g(w) dw, batched.

    g maps an array w of shape (n,) (one abscissa per output point) to
    values (n,).  Kinks are global abscissae where g may lose smoothness;
    every per-point range is split there.  Gauss order doubles until the
    result stabilizes.
    """
    upper = np.asarray(upper, dtype=float)
    sgn = np.sign(upper)
    lo = np.minimum(0.0, upper)
    hi = np.maximum(0.0, upper)
    cuts = sorted(set(float(k) for k in kinks))
    edges = np.array([-np.inf] + cuts + [np.inf])

    def compute(n):
        x, w = gauss_legendre(n)
        acc = np.zeros_like(upper)
        for j in range(len(edges) - 1):
            c0 = np.clip(edges[j], lo, hi)
            c1 = np.clip(edges[j + 1], lo, hi)
            width = c1 - c0
            if np.all(width == 0):
                continue
            mid = 0.5 * (c0 + c1)
            hw = 0.5 * width
            for xi, wi in zip(x, w):
                acc += wi * hw * g(mid + hw * xi)
        return sgn * acc

    prev = compute(n0)
    n = n0 * 2
    while n <= n_max:
        cur = compute(n)
        scale = np.maximum(np.max(np.abs(cur)), 1.0)
        if np.max(np.abs(cur - prev)) <= tol_rel * scale:
            return cur
        prev = cur
        n *= 2
    raise IntegrationError("parameter quadrature did not stabilize")
