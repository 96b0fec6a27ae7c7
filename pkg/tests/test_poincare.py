import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from entclt.convolve import convolve
from entclt.distributions import DistributionSpec as D
from entclt.grid import GridDensity, GridError, build_from_pdf, moments, product, scale
from entclt.poincare import (
    gap_matrix,
    muckenhoupt_bound,
    muckenhoupt_constant,
    poincare_product,
    refinement_sequence,
    restrict_to_support,
    spectral_gap_1d,
)

from conftest import SMOOTH_SPECS, dens, gauss_pdf

CORPUS = SMOOTH_SPECS + [D.uniform_sqrt3()]


def test_gaussian_constant_is_one():
    est = spectral_gap_1d(dens(D.gaussian()))
    assert est.c_p == pytest.approx(1.0, rel=1e-2)
    assert est.converged


def test_uniform_constant():
    # Neumann problem on [-√3, √3]: first nonzero eigenvalue (π / 2√3)²
    est = spectral_gap_1d(dens(D.uniform_sqrt3()))
    assert est.c_p == pytest.approx(12.0 / math.pi**2, rel=1e-2)


@pytest.mark.parametrize("spec", [D.gaussian(), D.generalized_gaussian(4), D.uniform_sqrt3()], ids=lambda s: s.name)
def test_bisection_matches_lapack(spec):
    # same discrete operator, eigenvalues from scipy's symmetric tridiagonal solver
    g = dens(spec)
    keep = g.values >= 1e-10 * g.values.max()
    p = g.values[keep]
    diag, off_sq = gap_matrix(p / p.max(), g.h)
    lam = eigh_tridiagonal(diag, -np.sqrt(off_sq), eigvals_only=True, select="i", select_range=(0, 1))
    assert abs(lam[0]) < 1e-8 * lam[1]
    # both solvers resolve eigenvalues to about eps * ||T|| in absolute terms
    floor = 50 * np.finfo(float).eps * float(np.max(diag))
    assert spectral_gap_1d(g).gap == pytest.approx(lam[1], abs=floor)


@given(st.floats(0.3, 3.0))
def test_scaling_law(a):
    g = dens(D.generalized_gaussian(3))
    c0 = spectral_gap_1d(g).c_p
    assert spectral_gap_1d(scale(g, a)).c_p == pytest.approx(a * a * c0, rel=1e-6)


@pytest.mark.parametrize("spec", CORPUS, ids=lambda s: s.name)
def test_variance_lower_bound(spec):
    g = dens(spec)
    # f(x) = x in the Poincaré inequality gives C_P >= Var
    assert spectral_gap_1d(g).c_p >= moments(g).variance - 1e-3


@pytest.mark.parametrize(
    "spec",
    [D.gaussian(), D.generalized_gaussian(1.5), D.generalized_gaussian(3), D.generalized_gaussian(4), D.uniform_sqrt3(), D.student_t(6)],
    ids=lambda s: s.name,
)
def test_muckenhoupt_sandwich(spec):
    g = dens(spec)
    c = spectral_gap_1d(g).c_p
    b = muckenhoupt_constant(g)
    assert b <= c + 1e-6 <= 4.0 * b + 2e-6
    assert muckenhoupt_bound(g) == 4.0 * b


def test_student_constant_is_for_the_truncated_law():
    # C_P of a polynomially tailed law is infinite; the solver returns the
    # constant of the law restricted to its effective support
    g = dens(D.student_t(6))
    r = restrict_to_support(g)
    assert r.mass() == pytest.approx(1.0, abs=1e-12)
    assert spectral_gap_1d(g).c_p == pytest.approx(spectral_gap_1d(r).c_p, rel=1e-9)


def test_refinement_contracts():
    for spec in (D.uniform_sqrt3(), D.generalized_gaussian(4)):
        seq = refinement_sequence(dens(spec), levels=3)
        d1, d2 = abs(seq[1] - seq[0]), abs(seq[2] - seq[1])
        # second-order scheme: differences shrink about 4x per halving
        assert d2 <= 0.5 * d1


def test_product_takes_largest_coordinate():
    m = product([dens(D.gaussian()), dens(D.uniform_sqrt3())])
    assert poincare_product(m) == pytest.approx(spectral_gap_1d(dens(D.uniform_sqrt3())).c_p, rel=1e-12)
    big = scale(dens(D.gaussian()), 2.0)
    assert poincare_product(product([dens(D.gaussian()), big])) == pytest.approx(4.0, rel=1e-2)


def test_subadditive_under_convolution():
    g = dens(D.generalized_gaussian(4))
    c1 = spectral_gap_1d(g).c_p
    assert spectral_gap_1d(convolve(g, g)).c_p <= 2.0 * c1 + 2e-3


def test_disconnected_support_rejected():
    x = np.linspace(-6, 6, 2001)
    v = gauss_pdf(x, -3.0, 0.3) + gauss_pdf(x, 3.0, 0.3)
    with pytest.raises(GridError):
        spectral_gap_1d(GridDensity(x[0], x[-1], v))


def test_bimodal_has_large_constant():
    # a well-separated mixture has a much larger constant than its variance
    spec = D.gaussian_mixture([0.5, 0.5], [-1.5, 1.5], [0.5, 0.5])
    g = build_from_pdf(spec.pdf, 0.0, 2.0, 4096)
    assert spectral_gap_1d(g).c_p > 3.0 * moments(g).variance
