import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from entclt import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def _tridiag(seed, n):
    rng = np.random.default_rng(seed)
    diag = rng.uniform(-5.0, 5.0, n)
    off = rng.uniform(0.1, 2.0, n - 1)
    return diag, off


@given(st.integers(0, 10_000), st.integers(3, 60))
def test_sturm_count_against_lapack(seed, n):
    diag, off = _tridiag(seed, n)
    eig = eigh_tridiagonal(diag, off, eigvals_only=True)
    shifts = np.linspace(-8.0, 8.0, 17)
    expect = np.searchsorted(eig, shifts)
    np.testing.assert_array_equal(K.sturm_count_numpy(diag, off * off, shifts), expect)
    if K.HAVE_NUMBA:
        np.testing.assert_array_equal(K.sturm_count_numba(diag, off * off, shifts), expect)


@given(st.integers(0, 10_000), st.integers(3, 60), st.data())
def test_bisection_against_lapack(seed, n, data):
    diag, off = _tridiag(seed, n)
    eig = eigh_tridiagonal(diag, off, eigvals_only=True)
    k = data.draw(st.integers(0, n - 1))
    lo, hi = -10.0, 10.0
    tol = 1e-12 * 10
    assert K.bisect_eigenvalue_numpy(diag, off * off, k, lo, hi, 1e-13) == pytest.approx(eig[k], abs=tol)
    if K.HAVE_NUMBA:
        assert K.bisect_eigenvalue_numba(diag, off * off, k, lo, hi, 1e-13) == pytest.approx(eig[k], abs=tol)


def _pair_brute(wa, wb, ridge, aa, ab):
    tot = 0.0
    for i in range(wa.size):
        for j in range(wb.size):
            tot += wa[i] * wb[j] * (ridge[i + j] - aa[i] - ab[j]) ** 2
    return tot


@given(st.integers(0, 10_000), st.integers(1, 25), st.integers(1, 25))
def test_pair_residual_against_double_loop(seed, na, nb):
    rng = np.random.default_rng(seed)
    wa, wb = rng.uniform(0, 1, na), rng.uniform(0, 1, nb)
    ridge = rng.normal(size=na + nb - 1)
    aa, ab = rng.normal(size=na), rng.normal(size=nb)
    ref = _pair_brute(wa, wb, ridge, aa, ab)
    assert K.pair_residual_numpy(wa, wb, ridge, aa, ab) == pytest.approx(ref, rel=1e-12)
    if K.HAVE_NUMBA:
        assert K.pair_residual_numba(wa, wb, ridge, aa, ab) == pytest.approx(ref, rel=1e-12)


def test_pair_residual_ridge_length_checked():
    z = np.ones(4)
    with pytest.raises(ValueError):
        K.pair_residual(z, z, np.ones(6), z, z)


@needs_numba
def test_numba_and_numpy_agree_on_large_input():
    rng = np.random.default_rng(7)
    n = 3000
    wa = rng.uniform(0, 1, n)
    ridge = rng.normal(size=2 * n - 1)
    a = rng.normal(size=n)
    x = K.pair_residual_numba(wa, wa, ridge, a, a)
    y = K.pair_residual_numpy(wa, wa, ridge, a, a)
    assert x == pytest.approx(y, rel=1e-11)


_PROBE = """
import json
from entclt import _kernels
from entclt.distributions import DistributionSpec as D, make_density
from entclt.poincare import spectral_gap_1d
from entclt.projection import projection_report_n2
g = make_density(D.generalized_gaussian(4), 1024)
r = projection_report_n2(g)
print(json.dumps({"backend": _kernels.backend(), "gap": spectral_gap_1d(g).gap, "delta2": r.delta2}))
"""


def _probe(flag):
    env = dict(os.environ, ENTCLT_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_env_flag_selects_numpy_fallback():
    fallback = _probe("0")
    assert fallback["backend"] == "numpy"
    default = _probe("1")
    assert default["backend"] == ("numba" if K.HAVE_NUMBA else "numpy")
    # both paths solve the same discrete problems
    assert fallback["gap"] == pytest.approx(default["gap"], rel=1e-11)
    assert fallback["delta2"] == pytest.approx(default["delta2"], rel=1e-10)
