"""Explicit Godunov finite-volume solver for u_t + d/dx Ahat(k(x), u) = 0.

First-order monotone scheme on a uniform 1D mesh with zero-gradient ghost
cells.  Coefficient jumps must sit on cell faces; those faces couple the
two one-sided fluxes through the demand/supply form of the Godunov flux,
which selects the admissible interface state.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import GeometryError, ScenarioValidationError
from ..geometry import Domain
from .flux import FluxSpec
from .kernels import godunov_sweep


class GridState:
    """Cell averages on a uniform mesh with time/CFL metadata."""

    def __init__(self, domain: Domain, averages, time=0.0, cfl=0.45):
        if domain.dim != 1:
            raise GeometryError("the conservation-law harness is 1D")
        self.domain = domain
        self.averages = np.asarray(averages, dtype=float)
        self.n = len(self.averages)
        lo, hi = domain.bounds[0]
        self.dx = (hi - lo) / self.n
        self.edges = np.linspace(lo, hi, self.n + 1)
        self.centers = 0.5 * (self.edges[:-1] + self.edges[1:])
        self.time = float(time)
        self.cfl = float(cfl)

    @staticmethod
    def from_function(domain, ncells, fn, cfl=0.45, cell_average=True):
        lo, hi = domain.bounds[0]
        edges = np.linspace(lo, hi, ncells + 1)
        if cell_average:
            # 4-point Gauss per cell
            gx, gw = np.polynomial.legendre.leggauss(4)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1:] - edges[:-1])
            vals = np.zeros(ncells)
            for x, w in zip(gx, gw):
                vals += 0.5 * w * np.asarray(fn(mid + half * x), dtype=float)
            return GridState(domain, vals, cfl=cfl)
        mid = 0.5 * (edges[:-1] + edges[1:])
        return GridState(domain, np.asarray(fn(mid), dtype=float), cfl=cfl)

    def mass(self):
        return float(np.sum(self.averages) * self.dx)


class Trajectory:
    """Immutable record of a solver run: all states, mesh and flux metadata."""

    def __init__(self, flux: FluxSpec, grid: GridState, times, states, kvals, backend):
        self.flux = flux
        self.domain = grid.domain
        self.dx = grid.dx
        self.edges = grid.edges
        self.centers = grid.centers
        self.cfl = grid.cfl
        self.times = times
        self.states = states
        self.kvals = kvals
        self.backend = backend

    @property
    def dt(self):
        return self.times[1] - self.times[0] if len(self.times) > 1 else 0.0

    def final(self):
        return GridState(self.domain, self.states[-1], time=self.times[-1], cfl=self.cfl)

    def interfaces(self):
        """Indices of faces where the coefficient jumps (1..n-1)."""
        out = []
        for i in range(1, len(self.kvals)):
            if abs(self.kvals[i] - self.kvals[i - 1]) > 1e-12:
                out.append(i)
        return out

    def interface_traces(self, face_index):
        """(u-, u+) time series next to an interior face."""
        return self.states[:, face_index - 1], self.states[:, face_index]

    def linf(self):
        return float(np.max(np.abs(self.states)))

    def discrete_tv(self):
        return float(np.max(np.sum(np.abs(np.diff(self.states, axis=1)), axis=1)))


def _coefficients(flux: FluxSpec, grid: GridState):
    kvals = flux.k.eval(grid.centers[:, None])
    # coefficient jumps must sit on faces
    for xj in flux.k.jump_set.points_1d:
        d = np.min(np.abs(grid.edges - xj))
        if d > 1e-9 * max(1.0, abs(xj)) + 1e-12:
            raise GeometryError(
                f"coefficient jump at {xj} does not sit on a cell face (nearest {d:.2e})")
    return kvals


def _validate_interface_fluxes(flux: FluxSpec, kvals, n_checks=101):
    """Interface coupling assumes concave-unimodal or monotone fluxes."""
    lo, hi = flux.u_range
    us = np.linspace(lo, hi, n_checks)
    for kv in np.unique(kvals.round(12)):
        f = flux.flux_at(kv, us)
        d = np.diff(f)
        sign_changes = int(np.sum(np.abs(np.diff(np.sign(d[np.abs(d) > 1e-13])))) / 2)
        if sign_changes > 1:
            raise ScenarioValidationError(
                "interface coupling requires monotone or single-hump fluxes per side")
        if sign_changes == 1 and not (d[np.abs(d) > 1e-13][0] > 0):
            raise ScenarioValidationError(
                "interface coupling requires concave (single-max) fluxes")


def fv_solve(flux: FluxSpec, u0: GridState, T, cfl=None, force_python=False) -> Trajectory:
    """March to time T with Godunov fluxes; dt = cfl dx / max |speed|."""
    cfl = float(cfl if cfl is not None else u0.cfl)
    if not (0.0 < cfl < 1.0):
        raise ScenarioValidationError("cfl must be in (0, 1)")
    lo, hi = flux.u_range
    if np.min(u0.averages) < lo - 1e-12 or np.max(u0.averages) > hi + 1e-12:
        raise ScenarioValidationError("initial data outside the invariant region")
    kvals = _coefficients(flux, u0)
    if len(np.unique(kvals.round(12))) > 1:
        _validate_interface_fluxes(flux, kvals)
    speed = max(flux.M, 1e-12)
    nsteps = max(1, math.ceil(float(T) * speed / (cfl * u0.dx)))
    dt = float(T) / nsteps
    lam = dt / u0.dx

    if flux.quadratic is not None:
        alpha_fn, beta_fn = flux.quadratic
        alpha = np.asarray(alpha_fn(kvals), dtype=float)
        beta = np.asarray(beta_fn(kvals), dtype=float)
        states = godunov_sweep(u0.averages, alpha, beta, lam, nsteps, lo, hi,
                               force_python=force_python)
        backend = "python" if force_python else None
    else:
        states = _generic_sweep(flux, kvals, u0.averages, lam, nsteps)
        backend = "generic"
    if backend is None:
        from .kernels import backend_name
        backend = backend_name()

    if not np.all(np.isfinite(states)):
        raise ScenarioValidationError("solver produced non-finite values")
    times = u0.time + dt * np.arange(nsteps + 1)
    return Trajectory(flux, u0, times, states, kvals, backend)


def _generic_sweep(flux: FluxSpec, kvals, u0, lam, nsteps):
    """Vectorized fallback for non-quadratic fluxes (callable evaluations)."""
    lo, hi = flux.u_range
    kL = np.concatenate([kvals[:1], kvals])
    kR = np.concatenate([kvals, kvals[-1:]])
    same = np.abs(kL - kR) <= 1e-12
    crit_L = [tuple(flux.critical(kv)) for kv in kL]
    crit_R = [tuple(flux.critical(kv)) for kv in kR]
    max_crit = max([len(c) for c in crit_L + crit_R] + [0])
    critL = np.full((len(kL), max_crit), np.nan)
    critR = np.full((len(kR), max_crit), np.nan)
    for i, c in enumerate(crit_L):
        critL[i, :len(c)] = c
    for i, c in enumerate(crit_R):
        critR[i, :len(c)] = c

    u = np.array(u0, dtype=float)
    out = np.empty((nsteps + 1, len(u)))
    out[0] = u
    for n in range(nsteps):
        uL = np.concatenate([u[:1], u])
        uR = np.concatenate([u, u[-1:]])
        flo = np.minimum(uL, uR)
        fhi = np.maximum(uL, uR)
        fl = flux.flux_at(kL, uL)
        fr = flux.flux_at(kL, uR)
        fmin = np.minimum(fl, fr)
        fmax = np.maximum(fl, fr)
        for j in range(max_crit):
            c = critL[:, j]
            ok = ~np.isnan(c) & (c > flo) & (c < fhi)
            if ok.any():
                fc = flux.flux_at(kL, np.where(ok, c, uL))
                fmin = np.where(ok, np.minimum(fmin, fc), fmin)
                fmax = np.where(ok, np.maximum(fmax, fc), fmax)
        f_same = np.where(uL <= uR, fmin, fmax)

        D = np.maximum(flux.flux_at(kL, uL), flux.flux_at(kL, lo))
        for j in range(max_crit):
            c = critL[:, j]
            ok = ~np.isnan(c) & (c > lo) & (c < uL)
            if ok.any():
                D = np.where(ok, np.maximum(D, flux.flux_at(kL, np.where(ok, c, uL))), D)
        S = np.maximum(flux.flux_at(kR, uR), flux.flux_at(kR, hi))
        for j in range(max_crit):
            c = critR[:, j]
            ok = ~np.isnan(c) & (c > uR) & (c < hi)
            if ok.any():
                S = np.where(ok, np.maximum(S, flux.flux_at(kR, np.where(ok, c, uR))), S)
        F = np.where(same, f_same, np.minimum(D, S))
        u = u - lam * (F[1:] - F[:-1])
        out[n + 1] = u
    return out
