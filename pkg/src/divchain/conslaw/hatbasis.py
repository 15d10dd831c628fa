"""Piecewise-linear weights with exact clipped integrals.

The kinetic-measure assembly needs integrals like \\int w(v) min(v, u) dv
and \\int_{v>u} w(v) dv for thousands of distinct u values; with hat (and
hat-derivative) weights these have closed forms, so the assembly carries no
quadrature error -- only the solver's own truncation enters the cell masses.
"""

from __future__ import annotations

import numpy as np


class PiecewiseLinearWeight:
    """w(v) = p_j + q_j v on [a_j, b_j] (disjoint, sorted), zero elsewhere."""

    def __init__(self, pieces):
        self.pieces = [(float(a), float(b), float(p), float(q)) for a, b, p, q in pieces]

    def val(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, p, q in self.pieces:
            m = (x >= a) & (x <= b)
            out = np.where(m, p + q * x, out)
        return out

    def integral(self):
        tot = 0.0
        for a, b, p, q in self.pieces:
            tot += p * (b - a) + 0.5 * q * (b * b - a * a)
        return tot

    def cdf(self, y):
        """\\int_{-inf}^{y} w."""
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for a, b, p, q in self.pieces:
            c = np.clip(y, a, b)
            out = out + p * (c - a) + 0.5 * q * (c * c - a * a)
        return out

    def moment_cdf(self, y):
        """\\int_{-inf}^{y} w(v) v dv."""
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for a, b, p, q in self.pieces:
            c = np.clip(y, a, b)
            out = out + 0.5 * p * (c * c - a * a) + q * (c ** 3 - a ** 3) / 3.0
        return out

    def min_integral(self, u):
        """\\int w(v) min(v, u) dv (exact)."""
        u = np.asarray(u, dtype=float)
        return self.moment_cdf(u) + u * (self.integral() - self.cdf(u))

    def upper_integral(self, u):
        """\\int_{v > u} w(v) dv."""
        return self.integral() - self.cdf(np.asarray(u, dtype=float))

    def weighted_to_upper(self, g, u, order=12):
        """\\int_{-inf}^{u} w(v) g(v) dv by per-piece clipped Gauss.

        g vectorized; exact for polynomial g up to degree 2*order-1.
        """
        u = np.asarray(u, dtype=float)
        x, wts = np.polynomial.legendre.leggauss(order)
        out = np.zeros_like(u)
        for a, b, p, q in self.pieces:
            c = np.clip(u, a, b)
            half = 0.5 * (c - a)
            mid = 0.5 * (c + a)
            acc = np.zeros_like(u)
            for xi, wi in zip(x, wts):
                v = mid + half * xi
                acc = acc + wi * (p + q * v) * np.asarray(g(v), dtype=float)
            out = out + half * acc
        return out


def hat(l, m, r):
    pieces = []
    if m > l:
        pieces.append((l, m, -l / (m - l), 1.0 / (m - l)))
    if r > m:
        pieces.append((m, r, r / (r - m), -1.0 / (r - m)))
    return PiecewiseLinearWeight(pieces)


def hat_derivative(l, m, r):
    pieces = []
    if m > l:
        pieces.append((l, m, 1.0 / (m - l), 0.0))
    if r > m:
        pieces.append((m, r, -1.0 / (r - m), 0.0))
    return PiecewiseLinearWeight(pieces)


class HatBasis:
    """Interior hats on a uniform node set (boundary nodes excluded)."""

    def __init__(self, lo, hi, n_hats):
        self.nodes = np.linspace(lo, hi, n_hats + 2)
        self.hats = [hat(self.nodes[j - 1], self.nodes[j], self.nodes[j + 1])
                     for j in range(1, n_hats + 1)]
        self.centers = self.nodes[1:-1]

    def __len__(self):
        return len(self.hats)

    def vals(self, x):
        return np.stack([h.val(x) for h in self.hats])

    def seg_integrals(self, edges):
        """(nhat, nseg) exact integrals over consecutive [edges_k, edges_{k+1}]."""
        cdfs = np.stack([h.cdf(edges) for h in self.hats])
        return cdfs[:, 1:] - cdfs[:, :-1]

    def point_diffs(self, edges):
        """(nhat, nseg) hat(e_{k+1}) - hat(e_k)."""
        v = self.vals(edges)
        return v[:, 1:] - v[:, :-1]
