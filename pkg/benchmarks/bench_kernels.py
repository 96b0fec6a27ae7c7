"""Time the numba kernels against their pure-numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--n-points 4096] [--repeat 5]

Prints one row per kernel: best-of-``repeat`` wall time for each backend,
the speed-up and the largest relative discrepancy between the two results.  A final
row times a full Poincaré solve in a subprocess with ``ENTCLT_NUMBA`` set to
1 and to 0, which exercises the public dispatch.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from entclt import _kernels as K
from entclt.distributions import DistributionSpec, make_density
from entclt.poincare import gap_matrix

_SOLVE = (
    "import time;from entclt.distributions import DistributionSpec as D, make_density;"
    "from entclt.poincare import spectral_gap_1d;"
    "g=make_density(D.generalized_gaussian(4),{n});spectral_gap_1d(g);"
    "t=time.perf_counter();spectral_gap_1d(g);print(time.perf_counter()-t)"
)


def best(fn, repeat: int) -> tuple:
    out = fn()  # warm-up (and numba compilation)
    return min(timeit.repeat(fn, number=1, repeat=repeat)), out


def cases(n_points: int, seed: int):
    g = make_density(DistributionSpec.generalized_gaussian(4), n_points)
    p = g.values[g.values >= 1e-10 * g.values.max()]
    diag, off_sq = gap_matrix(p / p.max(), g.h)
    shifts = np.linspace(0.0, 2.0, 64)
    lo, hi = 0.0, float(np.max(np.abs(diag)) + 2 * np.sqrt(off_sq.max()))
    rng = np.random.default_rng(seed)
    m = max(64, int(np.sqrt(n_points)) * 8)
    wa, wb = rng.random(m), rng.random(m)
    ridge, add_a, add_b = rng.standard_normal(2 * m - 1), rng.standard_normal(m), rng.standard_normal(m)
    return [
        ("sturm_count", K.sturm_count_numpy, K.sturm_count_numba, (diag, off_sq, shifts)),
        ("bisect_eigenvalue", K.bisect_eigenvalue_numpy, K.bisect_eigenvalue_numba, (diag, off_sq, 1, lo, hi, 1e-13)),
        ("pair_residual", K.pair_residual_numpy, K.pair_residual_numba, (wa, wb, ridge, add_a, add_b)),
    ]


def solve_time(n_points: int, flag: str) -> float:
    env = dict(os.environ, ENTCLT_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", _SOLVE.format(n=n_points)], env=env, capture_output=True, text=True, check=True)
    return float(res.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-solve", action="store_true", help="skip the end-to-end subprocess timing")
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'kernel':<20s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speed-up':>9s} {'rel diff':>10s}")
    for name, f_np, f_nb, a in cases(args.n_points, args.seed):
        t_np, r_np = best(lambda: f_np(*a), args.repeat)
        t_nb, r_nb = best(lambda: f_nb(*a), args.repeat)
        a_np, a_nb = np.asarray(r_np, dtype=float), np.asarray(r_nb, dtype=float)
        diff = float(np.max(np.abs(a_np - a_nb)) / max(1.0, np.max(np.abs(a_np))))
        print(f"{name:<20s} {t_np:11.3e} {t_nb:11.3e} {t_np / t_nb:9.1f} {diff:10.2e}")
    if not args.skip_solve:
        t_np, t_nb = solve_time(args.n_points, "0"), solve_time(args.n_points, "1")
        print(f"{'spectral_gap_1d':<20s} {t_np:11.3e} {t_nb:11.3e} {t_np / t_nb:9.1f} {'':>10s}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
