import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entclt.grid import (
    GridDensity,
    GridError,
    build_from_pdf,
    decimate,
    moments,
    normalize,
    product,
    scale,
    shift,
    standardize,
    trapezoid_weights,
    trim_tails,
)

from conftest import gauss_pdf


def test_trapezoid_weights_integrate_linear_exactly():
    w = trapezoid_weights(11)
    x = np.linspace(0.0, 1.0, 11)
    assert np.sum(w * (3 * x + 2)) * 0.1 == pytest.approx(3.5, rel=1e-14)


@pytest.mark.parametrize(
    "vals, lo, hi",
    [([1.0, 2.0], 0.0, 1.0), ([1.0, -1.0, 1.0], 0.0, 1.0), ([1.0, np.nan, 1.0], 0.0, 1.0), ([1.0, 1.0, 1.0], 1.0, 1.0)],
)
def test_grid_density_validation(vals, lo, hi):
    with pytest.raises(GridError):
        GridDensity(lo, hi, np.array(vals))


def test_values_are_read_only():
    g = GridDensity(0.0, 1.0, np.ones(5))
    with pytest.raises(ValueError):
        g.values[0] = 2.0


@given(st.floats(-3.0, 3.0), st.floats(0.2, 5.0))
def test_gaussian_moments_and_tail(mu, sd):
    g = build_from_pdf(lambda x: gauss_pdf(x, mu, sd), mu, sd, 1024)
    m = moments(g)
    assert g.mass() == pytest.approx(1.0, abs=1e-13)
    assert m.mean == pytest.approx(mu, abs=1e-9 * max(1.0, sd))
    assert m.variance == pytest.approx(sd * sd, rel=1e-8)
    assert g.tail_mass < 1e-12


def test_nan_pdf_rejected():
    with pytest.raises(GridError):
        build_from_pdf(lambda x: np.full_like(np.asarray(x, float), np.nan), 0.0, 1.0, 1024)


def test_nonintegrable_pdf_rejected():
    with pytest.raises(GridError):
        build_from_pdf(lambda x: 1.0 / (1.0 + np.abs(np.asarray(x, float))), 0.0, 1.0, 1024)


@given(st.floats(-2.0, 2.0), st.floats(0.3, 3.0).flatmap(lambda a: st.sampled_from([a, -a])))
def test_affine_relabel_moments(b, a):
    g = build_from_pdf(lambda x: gauss_pdf(x, 0.4, 1.3), 0.4, 1.3, 1024)
    m0 = moments(g)
    m = moments(scale(shift(g, b), a))
    assert m.mean == pytest.approx(a * (m0.mean + b), abs=1e-10)
    assert m.variance == pytest.approx(a * a * m0.variance, rel=1e-11)


def test_standardize():
    g = build_from_pdf(lambda x: 0.5 * gauss_pdf(x) + 0.5 * gauss_pdf(x, 3.0, 0.5), 1.5, 1.8, 2048)
    m = moments(standardize(g))
    assert abs(m.mean) < 1e-10 and m.variance == pytest.approx(1.0, abs=1e-10)


def test_decimate_is_node_aligned():
    g = build_from_pdf(gauss_pdf, 0.0, 1.0, 4096)
    d = decimate(g, 1024)
    assert d.n_points >= 1024
    stride = round(d.h / g.h)
    np.testing.assert_allclose(d.values * d.mass(), g.values[: stride * (d.n_points - 1) + 1 : stride] * d.mass(), rtol=1e-12)
    # a shared node keeps its value up to the renormalization
    k = stride * (d.n_points // 2)
    assert d(g.x[k : k + 1])[0] == pytest.approx(g.values[k], rel=1e-9)


def test_trim_tails_accounts_mass():
    g = build_from_pdf(gauss_pdf, 0.0, 1.0, 4096)
    t = trim_tails(g, 1e-6)
    assert t.n_points < g.n_points
    assert 0.0 < t.tail_mass < 3e-6
    assert t.mass() == pytest.approx(1.0, abs=1e-13)


def test_normalize_rejects_zero():
    with pytest.raises(GridError):
        normalize(GridDensity(0.0, 1.0, np.zeros(5)))


def test_product_iid_flag():
    a = build_from_pdf(gauss_pdf, 0.0, 1.0, 1024)
    b = scale(a, 2.0)
    assert product([a, a]).iid_flag
    assert not product([a, b]).iid_flag
