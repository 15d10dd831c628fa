#!/usr/bin/env python3
"""Benchmark the compiled Godunov sweep against the numpy twin.

Runs the discontinuous-coefficient traffic problem at several resolutions
and reports wall time per sweep plus the max deviation between the two
trajectories (expected: bit-identical).
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from divchain.conslaw import HAVE_COMPILED, godunov_sweep


def bench(ncells, nsteps, repeats=3):
    x = np.linspace(-1, 1, ncells)
    u0 = 0.4 + 0.2 * np.exp(-40 * (x + 0.4) ** 2)
    alpha = np.where(x < 0.5, -1.0, -0.6)
    beta = np.where(x < 0.5, 1.0, 0.6)
    lam = 0.45

    def run(force_python):
        best = np.inf
        out = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = godunov_sweep(u0, alpha, beta, lam, nsteps, 0.0, 1.0,
                                force_python=force_python)
            best = min(best, time.perf_counter() - t0)
        return best, out

    t_py, traj_py = run(force_python=True)
    row = f"n={ncells:5d} steps={nsteps:5d}  python {t_py*1e3:9.2f} ms"
    if HAVE_COMPILED:
        t_c, traj_c = run(force_python=False)
        dev = float(np.max(np.abs(traj_py - traj_c)))
        row += f"  compiled {t_c*1e3:9.2f} ms  speedup {t_py/t_c:6.1f}x  max|diff| {dev:.1e}"
    else:
        row += "  (compiled kernel not built)"
    print(row)


if __name__ == "__main__":
    print(f"backend available: compiled={HAVE_COMPILED}")
    for n, steps in ((200, 500), (400, 1000), (800, 2000), (1600, 4000)):
        bench(n, steps)
