"""Parameter-dependent bounded divergence-measure fields b(x, t).

A ParamField packages the analytic data of a one-parameter family of fields
sharing a single oriented singular set and a single dominating measure:
pointwise values, one-sided traces on the singular set, the absolutely
continuous divergence, and an optional Cantor divergence (1D).  The library
validates the structural assumptions on sample grids; it never tries to
discover singular sets from black-box data.
"""

from __future__ import annotations

import numpy as np

from .cantor import CantorPart
from .errors import BoundaryError, NotOnJumpSetError
from .geometry import Domain, as_points
from .measure import RadonMeasure, lub_measures
from .quadrature import integrate_1d, integrate_polar, integrate_to_upper
from .rectifiable import RectifiableSet


class ParamField:
    def __init__(self, domain: Domain, eval_fn, sup_bound, singular_set=None,
                 b_plus=None, b_minus=None, diva=None, divc_part: CantorPart | None = None,
                 divc_multiplier=None, lipschitz_div=None, t_kinks=(), t_range=(-4.0, 4.0),
                 sigma_envelope: RadonMeasure | None = None):
        self.domain = domain
        self._eval = eval_fn                       # (pts, t) -> (n, dim)
        self.M = float(sup_bound)
        self.singular_set = singular_set if singular_set is not None \
            else RectifiableSet.empty(domain.dim)
        self.b_plus = b_plus
        self.b_minus = b_minus
        self._diva = diva                          # (pts, t) -> (n,)
        self.divc_part = divc_part
        self.divc_multiplier = divc_multiplier     # scalar fn of t
        self.lipschitz_div = lipschitz_div
        self.t_kinks = tuple(float(k) for k in t_kinks)
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.sigma_envelope = sigma_envelope
        if divc_part is not None and domain.dim != 1:
            raise ValueError("Cantor divergences are 1D only")

    # -- pointwise data -------------------------------------------------
    def eval(self, pts, t):
        pts = as_points(pts, self.domain.dim)
        out = np.atleast_2d(np.asarray(self._eval(pts, t), dtype=float))
        if out.shape != (len(pts), self.domain.dim):
            out = out.reshape(len(pts), self.domain.dim)
        return out

    def diva(self, pts, t):
        if self._diva is None:
            return np.zeros(len(as_points(pts, self.domain.dim)))
        return np.asarray(self._diva(as_points(pts, self.domain.dim), t), dtype=float)

    def beta(self, pts, nus, t, side):
        tr = self.b_plus if side > 0 else self.b_minus
        vals = np.atleast_2d(np.asarray(tr(pts, t), dtype=float))
        if self.domain.dim == 1:
            vals = vals.reshape(len(pts), 1)
            nu = np.asarray(nus, dtype=float).reshape(len(pts))
            return vals[:, 0] * nu
        vals = vals.reshape(len(pts), 2)
        nus = np.atleast_2d(nus)
        return np.einsum("ij,ij->i", vals, nus)

    def jump_density(self, t):
        """(beta+ - beta-)(x, t) as a surface density on the singular set."""

        def g(pts, nus):
            return self.beta(pts, nus, t, +1) - self.beta(pts, nus, t, -1)

        return g

    # -- measures ---------------------------------------------------------
    def div_measure(self, t):
        """Div_x b(., t) as a RadonMeasure (decomposition formula)."""
        jumps = None
        if not self.singular_set.is_empty:
            jumps = RadonMeasure.from_jump(self.domain, self.singular_set,
                                           self.jump_density(t)).jumps
        cantor = None
        if self.divc_part is not None:
            m = float(self.divc_multiplier(t)) if self.divc_multiplier is not None else 1.0
            cantor = self.divc_part.scaled(m)
        ac = None
        if self._diva is not None:
            ac = lambda pts, t=t: self.diva(pts, t)
        return RadonMeasure(self.domain, ac=ac,
                            ac_singular=None if self.singular_set.is_empty else self.singular_set,
                            jumps=jumps, cantor=cantor)

    def sigma(self, t_samples):
        """Dominating measure: lub of |Div_x b(., t)| over the sample set,
        joined with the author-declared analytic envelope when present."""
        t_samples = list(t_samples)
        if not t_samples:
            raise ValueError("sigma requires at least one parameter sample")
        lo, hi = self.t_range
        for t in t_samples:
            if not (lo - 1e-12 <= t <= hi + 1e-12):
                raise ValueError(f"t sample {t} outside declared range {self.t_range}")
        family = [self.div_measure(t) for t in t_samples]
        if self.sigma_envelope is not None:
            family.append(self.sigma_envelope)
        return lub_measures(family)

    def flipped(self):
        """Reversed orientation of the singular set, traces swapped."""
        return ParamField(self.domain, self._eval, self.M,
                          singular_set=self.singular_set.flipped(),
                          b_plus=self.b_minus, b_minus=self.b_plus, diva=self._diva,
                          divc_part=self.divc_part, divc_multiplier=self.divc_multiplier,
                          lipschitz_div=self.lipschitz_div, t_kinks=self.t_kinks,
                          t_range=self.t_range, sigma_envelope=self.sigma_envelope)

    # -- validation ---------------------------------------------------------
    def validate(self, t_grid=None, n_space=21):
        """Sampled checks of the structural assumptions; returns report rows."""
        rows = []
        ts = t_grid if t_grid is not None else np.linspace(*self.t_range, 9)
        pts = self.domain.grid(n_space)
        off = ~self._near_singular(pts)
        sup = max(np.max(np.abs(self.eval(pts[off], t))) for t in ts)
        rows.append(("bounded_by_M", bool(sup <= self.M + 1e-9), sup))
        # (i) continuity in t, uniformly in x
        osc = 0.0
        for t0, t1 in zip(ts[:-1], ts[1:]):
            osc = max(osc, float(np.max(np.abs(self.eval(pts[off], t1)
                                               - self.eval(pts[off], t0)))))
        rows.append(("t_continuity_osc", True, osc))
        if not self.singular_set.is_empty and self.b_plus is not None:
            sp, sn = self.singular_set.samples()
            bp = np.array([self.beta(sp, sn, t, +1) for t in ts])
            bm = np.array([self.beta(sp, sn, t, -1) for t in ts])
            cont = max(float(np.max(np.abs(np.diff(bp, axis=0)))),
                       float(np.max(np.abs(np.diff(bm, axis=0)))))
            rows.append(("trace_t_continuity_osc", True, cont))
        if self.lipschitz_div is not None and self._diva is not None:
            g1 = np.asarray(self.lipschitz_div(pts[off]), dtype=float)
            worst = 0.0
            for t in ts:
                for w in ts:
                    if t == w:
                        continue
                    lhs = np.abs(self.diva(pts[off], t) - self.diva(pts[off], w))
                    worst = max(worst, float(np.max(lhs - g1 * abs(t - w))))
            rows.append(("lipschitz_diva", bool(worst <= 1e-9), worst))
        # diffuse-part modulus, pairwise on the grid (report-only): the
        # ratio |Div~_x b(., t) - Div~_x b(., w)| / |t - w| must stay bounded
        ratio = 0.0
        for t, w in zip(ts[:-1], ts[1:]):
            if self._diva is not None:
                d = float(np.max(np.abs(self.diva(pts[off], t) - self.diva(pts[off], w))))
                ratio = max(ratio, d / abs(t - w))
            if self.divc_part is not None and self.divc_multiplier is not None:
                mt = float(np.atleast_1d(self.divc_multiplier(t))[0])
                mw = float(np.atleast_1d(self.divc_multiplier(w))[0])
                ratio = max(ratio, abs(self.divc_part.mass) * abs(mt - mw) / abs(t - w))
        rows.append(("diffuse_t_modulus_ratio", True, ratio))
        return rows

    def _near_singular(self, pts, dist=1e-9):
        if self.singular_set.is_empty:
            return np.zeros(len(pts), dtype=bool)
        mask = np.zeros(len(pts), dtype=bool)
        if self.domain.dim == 1:
            for x in self.singular_set.points_1d:
                mask |= np.abs(pts[:, 0] - x) <= dist
            return mask
        sp, _ = self.singular_set.samples(65)
        d = np.min(np.linalg.norm(pts[:, None, :] - sp[None, :, :], axis=2), axis=1)
        return d <= dist


class PrimitiveField:
    """B(x, t) = \\int_0^t b(x, w) dw with traces integrated the same way."""

    def __init__(self, field: ParamField):
        self.field = field
        self.domain = field.domain

    def _axis_integral(self, pts, t, extractor):
        pts = as_points(pts, self.domain.dim)
        t_arr = np.full(len(pts), t, dtype=float) if np.isscalar(t) else np.asarray(t, dtype=float)
        cols = []
        for ax in range(self.domain.dim):
            def g(w, ax=ax):
                return extractor(pts, w)[:, ax]
            cols.append(integrate_to_upper(g, t_arr, kinks=self.field.t_kinks))
        return np.column_stack(cols)

    def value(self, pts, t):
        return self._axis_integral(pts, t, self.field.eval)

    def plus(self, pts, t):
        return self._axis_integral(
            pts, t, lambda p, w: np.atleast_2d(np.asarray(self.field.b_plus(p, w), dtype=float))
            .reshape(len(p), self.domain.dim))

    def minus(self, pts, t):
        return self._axis_integral(
            pts, t, lambda p, w: np.atleast_2d(np.asarray(self.field.b_minus(p, w), dtype=float))
            .reshape(len(p), self.domain.dim))

    def star(self, pts, t):
        return 0.5 * (self.plus(pts, t) + self.minus(pts, t))

    def tilde(self, pts, t):
        """Off the singular set B~ = B; used on jump components of J_u only."""
        return self.value(pts, t)

    def diva(self, pts, t):
        pts = as_points(pts, self.domain.dim)
        t_arr = np.full(len(pts), t, dtype=float) if np.isscalar(t) else np.asarray(t, dtype=float)
        return integrate_to_upper(lambda w: self.field.diva(pts, w), t_arr,
                                  kinks=self.field.t_kinks)

    def divc_weight(self, t):
        """\\int_0^t multiplier(w) dw (density of Div^c_x B against the fixed
        Cantor part), vectorized over t."""
        if self.field.divc_part is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        m = self.field.divc_multiplier or (lambda w: np.ones_like(np.asarray(w)))
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        return integrate_to_upper(lambda w: np.asarray(m(w)) * np.ones_like(t_arr), t_arr,
                                  kinks=self.field.t_kinks)

    def normal_jump(self, t):
        """<B+ - B-, nu>(x, t): surface density of Div_x B on the singular set."""

        def g(pts, nus):
            bp = self.plus(pts, t)
            bm = self.minus(pts, t)
            if self.domain.dim == 1:
                return (bp[:, 0] - bm[:, 0]) * np.asarray(nus, dtype=float).reshape(len(pts))
            return np.einsum("ij,ij->i", bp - bm, np.atleast_2d(nus))

        return g

    def div_measure(self, t):
        """Div_x B(., t): a.c. + Cantor + jump parts (all t-integrated)."""
        f = self.field
        jumps = None
        if not f.singular_set.is_empty:
            jumps = RadonMeasure.from_jump(self.domain, f.singular_set,
                                           self.normal_jump(t)).jumps
        cantor = None
        if f.divc_part is not None:
            cantor = f.divc_part.scaled(float(self.divc_weight(t)[0]))
        ac = None
        if f._diva is not None:
            ac = lambda pts, t=t: self.diva(pts, t)
        return RadonMeasure(self.domain, ac=ac,
                            ac_singular=None if f.singular_set.is_empty else f.singular_set,
                            jumps=jumps, cantor=cantor)

    def check_derivative(self, n=7, h=1e-5, tol=1e-6):
        """dB/dt = b by central differences on a sample grid."""
        pts = self.domain.grid(n)
        ok = True
        for t in np.linspace(*self.field.t_range, 5):
            fd = (self.value(pts, t + h) - self.value(pts, t - h)) / (2 * h)
            ok &= bool(np.max(np.abs(fd - self.field.eval(pts, t))) <= tol * max(1.0, self.field.M))
        zero = np.max(np.abs(self.value(pts, 0.0)))
        return ok and zero == 0.0

    def oscillation(self, x, w, radii=(1e-2, 1e-3)):
        """Half-ball (on the singular set) or full-ball (off it) mean
        oscillation of B(., w) about the relevant representative."""
        pts = as_points(x, self.domain.dim)
        f = self.field
        on = False
        nu = None
        if not f.singular_set.is_empty:
            if self.domain.dim == 1:
                for xx, nn in zip(f.singular_set.points_1d, f.singular_set.normals_1d):
                    if abs(xx - pts[0, 0]) <= 1e-11:
                        on, nu = True, nn
            else:
                sp, sn = f.singular_set.samples(65)
                d = np.linalg.norm(sp - pts[0], axis=1)
                if d.min() <= 1e-9:
                    on, nu = True, sn[int(np.argmin(d))]
        out = []
        if on:
            bp = self.plus(pts, w)[0]
            bm = self.minus(pts, w)[0]
            for r in radii:
                if self.domain.dim == 1:
                    c = pts[0, 0]
                    vp, _ = integrate_1d(
                        lambda y: np.abs(self.value(y[:, None], w)[:, 0] - bp[0]),
                        min(c, c + nu * r), max(c, c + nu * r), tol_abs=1e-9)
                    vm, _ = integrate_1d(
                        lambda y: np.abs(self.value(y[:, None], w)[:, 0] - bm[0]),
                        min(c, c - nu * r), max(c, c - nu * r), tol_abs=1e-9)
                    out.append((r, vp / r, vm / r))
                else:
                    area = np.pi * r * r / 2
                    vp, _ = integrate_polar(
                        lambda q: np.linalg.norm(self.value(q, w) - bp, axis=1), pts[0], r,
                        half=(nu, +1), tol_abs=1e-9)
                    vm, _ = integrate_polar(
                        lambda q: np.linalg.norm(self.value(q, w) - bm, axis=1), pts[0], r,
                        half=(nu, -1), tol_abs=1e-9)
                    out.append((r, vp / area, vm / area))
            return out
        ref = self.value(pts, w)[0]
        for r in radii:
            if self.domain.dim == 1:
                c = pts[0, 0]
                v, _ = integrate_1d(lambda y: np.abs(self.value(y[:, None], w)[:, 0] - ref[0]),
                                    c - r, c + r, tol_abs=1e-9)
                out.append((r, v / (2 * r), v / (2 * r)))
            else:
                v, _ = integrate_polar(lambda q: np.linalg.norm(self.value(q, w) - ref, axis=1),
                                       pts[0], r, tol_abs=1e-9)
                out.append((r, v / (np.pi * r * r), v / (np.pi * r * r)))
        return out


def sigma_of(field: ParamField, t_samples):
    return field.sigma(t_samples)


def primitive(field: ParamField) -> PrimitiveField:
    return PrimitiveField(field)


def div_decomposition(field: ParamField, t):
    lo, hi = field.t_range
    if not (lo - 1e-12 <= t <= hi + 1e-12):
        raise ValueError(f"t = {t} outside declared range {field.t_range}")
    return field.div_measure(t)


def mollified_normal_trace(field: ParamField, t, x, eps):
    """<(rho_eps * b(., t))(x), nu(x)> with the C^1 bump (1 - |z/eps|^2)^2."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = as_points(x, field.domain.dim)
    nu = _normal_at(field.singular_set, pts)
    if field.domain.dim == 1:
        (lo, hi), = field.domain.bounds
        c = pts[0, 0]
        if c - eps < lo or c + eps > hi:
            raise BoundaryError("mollification ball exits the domain")
        breaks = [c - p for p in field.singular_set.points_1d if abs(p - c) < eps]

        def f(z):
            vals = field.eval((c - z)[:, None], t)[:, 0]
            rho = (15.0 / (16.0 * eps)) * (1.0 - (z / eps) ** 2) ** 2
            return vals * rho

        v, _ = integrate_1d(f, -eps, eps, breakpoints=breaks, tol_abs=1e-12)
        return float(v * nu)
    for ax, (lo, hi) in enumerate(field.domain.bounds):
        if pts[0, ax] - eps < lo or pts[0, ax] + eps > hi:
            raise BoundaryError("mollification ball exits the domain")
    tbreaks = []
    for piece in field.singular_set.curves:
        for sa, sb in piece.ranges_in_ball(pts[0], eps):
            for s in np.linspace(sa, sb, 5):
                p = piece.points(np.array([s]))[0]
                if np.linalg.norm(p - pts[0]) > 1e-12:
                    tbreaks.append(np.arctan2(p[1] - pts[0][1], p[0] - pts[0][0]))

    def f(q):
        r2 = np.sum((q - pts[0]) ** 2, axis=1) / (eps * eps)
        rho = (3.0 / (np.pi * eps * eps)) * (1.0 - r2) ** 2
        return (field.eval(q, t) @ nu) * rho

    v, _ = integrate_polar(f, pts[0], eps, theta_breaks=tbreaks, tol_abs=1e-12)
    return float(v)


def _normal_at(singular_set: RectifiableSet, pts):
    if singular_set.dim == 1:
        for xx, nn in zip(singular_set.points_1d, singular_set.normals_1d):
            if abs(xx - pts[0, 0]) <= 1e-11:
                return float(nn)
        raise NotOnJumpSetError(f"{pts[0]} is not a sample of the singular set")
    sp, sn = singular_set.samples(129)
    d = np.linalg.norm(sp - pts[0], axis=1)
    if d.min() > 1e-9:
        raise NotOnJumpSetError(f"{pts[0]} is not a sample of the singular set")
    return sn[int(np.argmin(d))]


def singular_set_check(field: ParamField, sigma: RadonMeasure, radii=(1e-1, 1e-2, 1e-3),
                       threshold=1e-2):
    """Report whether sigma has positive (N-1)-density exactly on the
    declared singular set (sampled; report-only)."""
    rows = []
    dim = field.domain.dim

    def ratios(point):
        out = []
        for r in radii:
            mass = abs(sigma.ball_mass(point, r))
            out.append(mass / r ** (dim - 1))
        return out

    if not field.singular_set.is_empty:
        sp, _ = field.singular_set.samples(5)
        for p in sp:
            rs = ratios(p if dim == 2 else p[:1])
            verdict = rs[-1] > threshold and rs[-1] >= 0.3 * rs[0]
            rows.append({"point": [float(v) for v in np.atleast_1d(p)],
                         "on_declared_set": True, "ratios": rs, "positive_density": verdict})
    probes = field.domain.grid(5)
    keep = ~field._near_singular(probes, dist=0.05)
    for p in probes[keep][:6]:
        rs = ratios(p if dim == 2 else p[:1])
        verdict = rs[-1] > threshold and rs[-1] >= 0.3 * rs[0]
        rows.append({"point": [float(v) for v in p], "on_declared_set": False,
                     "ratios": rs, "positive_density": verdict})
    ok = all(r["positive_density"] == r["on_declared_set"] for r in rows)
    return {"consistent": ok, "points": rows}
