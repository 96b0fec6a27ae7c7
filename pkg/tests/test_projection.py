import math

import numpy as np
import pytest

from entclt.distributions import DistributionSpec as D
from entclt.grid import GridError
from entclt.projection import (
    cauchy_schwarz_slack,
    conditional_score,
    identity_residual,
    projection_moment_pair,
    projection_report_n2,
    prop_fi_chain_check_n2,
    pythagoras_gap,
    score_moments_check,
)

from conftest import SMOOTH_SPECS, dens

_REPORTS = {}


def report(spec):
    if spec not in _REPORTS:
        _REPORTS[spec] = projection_report_n2(dens(spec))
    return _REPORTS[spec]


BASES = [D.gaussian(), D.generalized_gaussian(3), D.generalized_gaussian(4)]


def test_gaussian_conditional_score_is_linear():
    # for Gaussian summands E[ρ(X₁) | X₁ + X₂ = s] = -s/2
    cs = conditional_score(dens(D.gaussian()))
    m = np.abs(cs.s) <= 4.0
    np.testing.assert_allclose(cs.values[m], -0.5 * cs.s[m], atol=1e-6)


@pytest.mark.parametrize("spec", BASES, ids=lambda s: s.name)
def test_identity_residual(spec):
    tol = 1e-5 if spec.family == "gaussian" else 1e-4
    assert identity_residual(dens(spec)) < tol


@pytest.mark.parametrize("spec", BASES, ids=lambda s: s.name)
def test_telescoping_equality(spec):
    r = report(spec)
    if spec.family == "gaussian":
        assert abs(r.ridge_minus_additive - r.delta2) < 1e-5
        assert r.delta2 < 1e-5
    else:
        assert r.telescoping_rel_error < 1e-3


@pytest.mark.parametrize("spec", BASES, ids=lambda s: s.name)
def test_m_scalar_is_minus_fisher(spec):
    r = report(spec)
    tol = 1e-5 if spec.family == "gaussian" else 1e-3
    assert abs(r.m_scalar + r.fisher_z2) < tol
    assert r.m_scalar_error == pytest.approx(abs(r.m_scalar + r.fisher_z2), rel=1e-12)


@pytest.mark.parametrize("spec", BASES + [D.student_t(8)], ids=lambda s: s.name)
def test_inequality_slacks(spec):
    r = report(spec)
    assert r.lower_bound_slack >= -1e-4
    assert prop_fi_chain_check_n2(r) >= -1e-4
    assert cauchy_schwarz_slack(r) >= -1e-4


@pytest.mark.parametrize("spec", BASES, ids=lambda s: s.name)
def test_pythagoras_and_orthogonality(spec):
    r = report(spec)
    assert abs(pythagoras_gap(r)) < max(1e-3 * r.j_z2, 1e-5)
    assert abs(r.orthogonality) < 1e-4


def test_nonlinear_ridge_for_non_gaussian():
    # q_4 summands: the conditional score is not linear, so Δ₂ > 0
    r = report(D.generalized_gaussian(4))
    assert r.delta2 > 1e-3
    assert r.j_z2 < r.j_x1


@pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.name)
def test_score_moments(spec):
    a, b = score_moments_check(dens(spec))
    assert abs(a) < 1e-4 and abs(b + 1.0) < 1e-4


@pytest.mark.parametrize("phi", [lambda u: u, lambda u: u**3, lambda u: np.tanh(u)], ids=["s", "s3", "tanh"])
def test_projection_moment_pair(phi):
    a, b = projection_moment_pair(dens(D.generalized_gaussian(3)), phi)
    assert a == pytest.approx(b, rel=1e-4, abs=1e-8)


def test_uniform_base_rejected():
    with pytest.raises(GridError):
        projection_report_n2(dens(D.uniform_sqrt3()))


def test_report_row():
    row = report(D.generalized_gaussian(4)).as_row()
    assert row["n"] == 2 and math.isfinite(row["delta2"])
