"""Weak-form verification oracle.

Computes distributional divergences directly from pointwise values of a
vector field by quadrature against test functions:

    <Div v, phi> = - \\int <grad phi, v> dx.

It knows nothing about chain-rule formulas or measure decompositions; the
only structural input is where to split integration cells (the declared
singular curves), never what the answer should be.
"""

from __future__ import annotations

import numpy as np

from .field import ParamField, mollified_normal_trace
from .geometry import Domain
from .measure import RadonMeasure, TestFunction, oscillatory_bump, plateau_bump
from .quadrature import integrate_1d, integrate_cells
from .rectifiable import RectifiableSet, box_cells


class TestSuite:
    """A family of test functions straddling and avoiding the singular set."""

    def __init__(self, functions, domain: Domain, singular: RectifiableSet | None):
        self.functions = list(functions)
        self.domain = domain
        self.singular = singular
        if len(self.functions) < 1:
            raise ValueError("empty test suite")

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)


def _shrink(lo, hi, frac_lo, frac_hi):
    w = hi - lo
    return lo + frac_lo * w, lo + frac_hi * w


def build_suite(domain: Domain, singular: RectifiableSet | None = None, n_min=20):
    """Plateau/oscillatory bumps: >= 3 straddling each singular component,
    plus a grid of off-set bumps and sign-changing oscillatory ones."""
    fns = []
    dim = domain.dim
    bounds = domain.bounds

    def bump_at(center, half, label, osc=None):
        support = []
        plateau = []
        for ax, (lo, hi) in enumerate(bounds):
            c = center[ax]
            h = min(half, c - lo - 1e-9, hi - c - 1e-9)
            if h <= 0:
                return None
            support.append((c - h, c + h))
            plateau.append((c - 0.5 * h, c + 0.5 * h))
        if osc is None:
            return plateau_bump(support, plateau, label=label)
        return oscillatory_bump(support, plateau, osc, label=label)

    # straddling bumps on every singular component, three scales each
    if singular is not None and not singular.is_empty:
        pts, _ = singular.samples(3)
        for i, p in enumerate(pts):
            for j, s in enumerate((0.35, 0.2, 0.1)):
                width = min(hi - lo for lo, hi in bounds)
                f = bump_at(np.atleast_1d(p), s * width, f"straddle{i}s{j}")
                if f is not None:
                    fns.append(f)

    # off-set grid bumps
    grid = domain.grid(4 if dim == 1 else 3)
    width = min(hi - lo for lo, hi in bounds)
    for i, p in enumerate(grid):
        f = bump_at(p, 0.12 * width, f"grid{i}")
        if f is not None:
            fns.append(f)

    # oscillatory members
    k = 2 * np.pi / width
    centers = grid[:: max(1, len(grid) // 4)]
    for i, p in enumerate(centers):
        f = bump_at(p, 0.3 * width, f"osc{i}", osc=[k] * dim)
        if f is not None:
            fns.append(f)

    # widen with larger plateau bumps until the floor is met
    j = 0
    while len(fns) < n_min:
        lo, hi = bounds[0]
        frac = 0.08 + 0.8 * (j % 7) / 7.0
        support = [_shrink(l, h, 0.02 + 0.02 * (j % 5), 0.98 - 0.02 * (j % 3))
                   for l, h in bounds]
        plateau = [_shrink(l, h, 0.25 + frac / 4, 0.7) for (l, h) in support]
        fns.append(plateau_bump(support, plateau, label=f"wide{j}"))
        j += 1
        if j > 50:
            break
    return TestSuite(fns, domain, singular)


def weak_divergence(v_eval, phi: TestFunction, domain: Domain,
                    singular: RectifiableSet | None = None,
                    tol_abs=1e-10, tol_rel=1e-9):
    """- \\int <grad phi, v> dx over phi's support, split along the curves.

    v_eval maps (n, dim) points to (n, dim) values; it is never evaluated
    on the singular set itself (quadrature nodes are interior to cells).
    Returns (value, error_estimate).
    """
    if not domain.contains_box(phi.support_box):
        from .errors import DomainMismatchError
        raise DomainMismatchError("test function support exceeds the domain")
    if domain.dim == 1:
        breaks = [] if singular is None else list(singular.points_1d)

        def f(x):
            pts = x[:, None]
            g = np.atleast_2d(phi.gradient(pts))
            v = np.atleast_2d(v_eval(pts))
            return -g[:, 0] * v[:, 0]

        (lo, hi), = phi.support_box
        return integrate_1d(f, lo, hi, breakpoints=breaks, tol_abs=tol_abs, tol_rel=tol_rel)

    cells = box_cells(phi.support_box, [singular] if singular is not None else [])

    def f(pts):
        g = phi.gradient(pts)
        v = v_eval(pts)
        return -np.einsum("ij,ij->i", g, v)

    return integrate_cells(f, cells, tol_abs=tol_abs, tol_rel=tol_rel)


def compare(mu: RadonMeasure, v_eval, suite: TestSuite, tol_abs=1e-7, tol_rel=1e-6,
            quad_tol=1e-10):
    """Per-test-function comparison of the measure action with the weak form."""
    rows = []
    all_pass = True
    for phi in suite:
        a = mu.apply(phi, tol_abs=quad_tol, tol_rel=quad_tol)
        b, est = weak_divergence(v_eval, phi, suite.domain, suite.singular,
                                 tol_abs=quad_tol)
        diff = a - b
        scale = max(abs(a), abs(b))
        ok = abs(diff) <= max(tol_abs, tol_rel * scale)
        all_pass &= ok
        rows.append({
            "phi": phi.label,
            "measure_action": a,
            "weak_value": b,
            "difference": diff,
            "quad_error_estimate": est,
            "pass": bool(ok),
        })
    return {"pass": bool(all_pass), "rows": rows,
            "max_difference": max(abs(r["difference"]) for r in rows)}


def mollification_study(field: ParamField, t, x, eps_list):
    """Convergence of the mollified normal component to (beta+ + beta-)/2."""
    eps_list = list(eps_list)
    if any(e2 >= e1 for e1, e2 in zip(eps_list[:-1], eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if field.domain.dim == 1 and pts.shape[1] != 1:
        pts = pts.reshape(1, -1)[:, :1]
    from .field import _normal_at
    nu = _normal_at(field.singular_set, pts)
    bp = np.atleast_2d(np.asarray(field.b_plus(pts, t), dtype=float)).reshape(1, -1)
    bm = np.atleast_2d(np.asarray(field.b_minus(pts, t), dtype=float)).reshape(1, -1)
    if field.domain.dim == 1:
        target = 0.5 * (bp[0, 0] + bm[0, 0]) * nu
    else:
        target = float(0.5 * (bp[0] + bm[0]) @ nu)
    rows = []
    for eps in eps_list:
        val = mollified_normal_trace(field, t, x, eps)
        rows.append({"eps": eps, "value": val, "target": target,
                     "deviation": abs(val - target)})
    devs = [r["deviation"] for r in rows]
    ok = devs[-1] <= devs[-2] + 1e-12 if len(devs) >= 2 else True
    return {"rows": rows, "nonincreasing_tail": bool(ok), "target": target}
