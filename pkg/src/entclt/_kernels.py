"""Hot inner loops, compiled with numba when available.

Every kernel exists twice: a plain-numpy version (``*_numpy``) and a numba
version (``*_numba``).  The public name is bound to one of them at import
time.  Set ``ENTCLT_NUMBA=0`` in the environment to force the numpy path
(useful for debugging and for the benchmark in ``benchmarks/``).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ENTCLT_NUMBA", "1").lower() not in (
    "0",
    "false",
    "no",
    "off",
)

_TINY_PIVOT = 1e-300


# ---------------------------------------------------------------------------
# Sturm sequence counts for a symmetric tridiagonal matrix
# ---------------------------------------------------------------------------


def sturm_count_numpy(diag, off_sq, shifts):
    """Number of eigenvalues strictly below each shift.

    ``off_sq`` holds the squared off-diagonal entries.  The recurrence is
    sequential in the matrix index, so this version vectorizes over the
    shifts instead.
    """
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    q = diag[0] - shifts
    q = np.where(q == 0.0, -_TINY_PIVOT, q)
    count = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = diag[i] - shifts - off_sq[i - 1] / q
        q = np.where(q == 0.0, -_TINY_PIVOT, q)
        count += q < 0.0
    return count


def _sturm_count_scalar(diag, off_sq, x):
    q = diag[0] - x
    if q == 0.0:
        q = -_TINY_PIVOT
    count = 1 if q < 0.0 else 0
    for i in range(1, diag.shape[0]):
        q = diag[i] - x - off_sq[i - 1] / q
        if q == 0.0:
            q = -_TINY_PIVOT
        if q < 0.0:
            count += 1
    return count



def bisect_eigenvalue_numpy(diag, off_sq, index, lo, hi, rtol):
    """Eigenvalue number ``index`` (0-based, ascending) by multisection.

    Each sweep evaluates 32 interior shifts at once, shrinking the bracket by
    a factor 33.
    """
    n_sub = 32
    while hi - lo > rtol * max(abs(lo), abs(hi), 1e-300):
        shifts = np.linspace(lo, hi, n_sub + 2)[1:-1]
        counts = sturm_count_numpy(diag, off_sq, shifts)
        below = np.nonzero(counts <= index)[0]
        above = np.nonzero(counts > index)[0]
        new_lo = shifts[below[-1]] if below.size else lo
        new_hi = shifts[above[0]] if above.size else hi
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)



# ---------------------------------------------------------------------------
# Weighted squared residual over a tensor grid:  sum_ij a_i b_j (F[i+j] - A_i - B_j)^2
# ---------------------------------------------------------------------------


def pair_residual_numpy(wa, wb, ridge, add_a, add_b):
    na = wa.shape[0]
    nb = wb.shape[0]
    total = 0.0
    block = max(1, 2_000_000 // max(nb, 1))
    j = np.arange(nb)
    for start in range(0, na, block):
        i = np.arange(start, min(start + block, na))
        resid = ridge[i[:, None] + j[None, :]] - add_a[i, None] - add_b[None, :]
        total += float(wa[i] @ (resid * resid) @ wb)
    return total


def _pair_residual_loop(wa, wb, ridge, add_a, add_b):
    total = 0.0
    for i in range(wa.shape[0]):
        if wa[i] == 0.0:
            continue
        row = 0.0
        for j in range(wb.shape[0]):
            r = ridge[i + j] - add_a[i] - add_b[j]
            row += wb[j] * r * r
        total += wa[i] * row
    return total


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _sturm_count_scalar_nb = _jit(_sturm_count_scalar)

    @numba.njit(cache=True, nogil=True)
    def sturm_count_numba(diag, off_sq, shifts):
        out = np.empty(shifts.shape[0], dtype=np.int64)
        for k in range(shifts.shape[0]):
            out[k] = _sturm_count_scalar_nb(diag, off_sq, shifts[k])
        return out

    @numba.njit(cache=True, nogil=True)
    def bisect_eigenvalue_numba(diag, off_sq, index, lo, hi, rtol):
        while hi - lo > rtol * max(abs(lo), abs(hi), 1e-300):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if _sturm_count_scalar_nb(diag, off_sq, mid) > index:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    pair_residual_numba = _jit(_pair_residual_loop)
else:  # pragma: no cover
    sturm_count_numba = None
    bisect_eigenvalue_numba = None
    pair_residual_numba = None


def sturm_count(diag, off_sq, shifts):
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off_sq = np.ascontiguousarray(off_sq, dtype=np.float64)
    if USE_NUMBA:
        return sturm_count_numba(diag, off_sq, shifts)
    return sturm_count_numpy(diag, off_sq, shifts)


def bisect_eigenvalue(diag, off_sq, index, lo, hi, rtol=1e-13):
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off_sq = np.ascontiguousarray(off_sq, dtype=np.float64)
    if USE_NUMBA:
        return float(bisect_eigenvalue_numba(diag, off_sq, int(index), float(lo), float(hi), float(rtol)))
    return float(bisect_eigenvalue_numpy(diag, off_sq, int(index), float(lo), float(hi), float(rtol)))


def pair_residual(wa, wb, ridge, add_a, add_b):
    args = [np.ascontiguousarray(v, dtype=np.float64) for v in (wa, wb, ridge, add_a, add_b)]
    if args[2].shape[0] < args[0].shape[0] + args[1].shape[0] - 1:
        raise ValueError("ridge table too short for the tensor grid")
    if USE_NUMBA:
        return float(pair_residual_numba(*args))
    return float(pair_residual_numpy(*args))


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
