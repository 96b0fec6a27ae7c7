import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from entclt.convolve import cached_clt_density, clt_density, clt_density_direct, clt_sweep, convolve, raw_convolution
from entclt.distributions import DistributionSpec as D
from entclt.distributions import make_density
from entclt.functionals import relative_entropy_to_gaussian
from entclt.grid import GridDensity, build_from_pdf, moments

from conftest import SMOOTH_SPECS, dens, gauss_pdf


@pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.name)
def test_self_convolution_mass(spec):
    g = dens(spec)
    raw = raw_convolution(g, g)
    assert raw.mass == pytest.approx(1.0, abs=1e-9)
    assert raw.clamped_mass < 1e-9


def _on_lattice(pdf, half, h=0.005):
    k = int(round(half / h))
    x = h * np.arange(-k, k + 1)
    return GridDensity(x[0], x[-1], pdf(x))


def test_gaussians_add_variances():
    a = _on_lattice(lambda x: gauss_pdf(x, 0.5, 0.8), 10.0)
    b = _on_lattice(lambda x: gauss_pdf(x, -1.0, 1.3), 12.0)
    c = convolve(a, b)
    ref = gauss_pdf(c.x, -0.5, math.hypot(0.8, 1.3))
    assert np.max(np.abs(c.values - ref)) < 1e-12


def test_mixture_convolved_with_gaussian():
    # mixture * N(0, s²) is again a mixture with inflated component variances
    w, m, s = (0.3, 0.7), (-1.0, 0.5), (0.6, 0.9)
    a = _on_lattice(lambda x: sum(wi * gauss_pdf(x, mi, si) for wi, mi, si in zip(w, m, s)), 10.0)
    b = _on_lattice(lambda x: gauss_pdf(x, 0.0, 0.4), 5.0)
    c = convolve(a, b)
    ref = sum(wi * gauss_pdf(c.x, mi, math.hypot(si, 0.4)) for wi, mi, si in zip(w, m, s))
    assert np.max(np.abs(c.values - ref)) < 1e-12


def test_mismatched_spacings_are_resampled():
    # different spacings go through linear interpolation: O(h²) error only
    a = build_from_pdf(lambda x: gauss_pdf(x, 0.5, 0.8), 0.5, 0.8, 2048)
    b = build_from_pdf(lambda x: gauss_pdf(x, -1.0, 1.3), -1.0, 1.3, 2048)
    assert a.h != b.h
    c = convolve(a, b)
    ref = gauss_pdf(c.x, -0.5, math.hypot(0.8, 1.3))
    assert np.max(np.abs(c.values - ref)) < 10 * max(a.h, b.h) ** 2


def test_uniform_sum_is_triangular():
    u = dens(D.uniform_sqrt3())
    c = convolve(u, u)
    r = 2.0 * math.sqrt(3.0)
    tri = np.maximum(r - np.abs(c.x), 0.0) / r**2
    # the kinks cost O(h) near x = 0 and ±2√3 only
    assert np.max(np.abs(c.values - tri)) < 5 * c.h
    assert np.sum(np.abs(c.values - tri) * c.weights) < 1e-5


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_fft_matches_direct(n):
    base = make_density(D.generalized_gaussian(4), 1024)
    # a large node budget skips decimation so both land on the same lattice
    a = clt_density(base, n, n_points=1 << 20)
    b = clt_density_direct(base, n, n_points=1 << 20)
    assert np.max(np.abs(a.values - b(a.x))) < 1e-10


def _excess_kurtosis(spec):
    f = lambda x: x**4 * spec.pdf(np.array([x]))[0]
    lim = 40.0 if spec.family == "generalized_gaussian" else np.inf
    return 2.0 * integrate.quad(f, 0.0, lim, epsabs=1e-13, limit=200)[0] - 3.0


@given(st.integers(1, 24), st.sampled_from([D.generalized_gaussian(4), D.generalized_gaussian(1.5), D.student_t(10)]))
def test_cumulants_scale_as_one_over_n(n, spec):
    # Z_n keeps unit variance and its fourth cumulant is κ₄(X)/n
    z = cached_clt_density(spec, n, 4096)
    m = moments(z)
    assert abs(m.mean) < 1e-8
    assert m.variance == pytest.approx(1.0, abs=1e-6)
    k4 = z.expect(z.x**4) - 3.0
    assert k4 == pytest.approx(_excess_kurtosis(spec) / n, rel=2e-4, abs=1e-6)


def test_gaussian_is_stable():
    for n in (2, 7, 32):
        z = cached_clt_density(D.gaussian(), n, 4096)
        assert np.max(np.abs(z.values - gauss_pdf(z.x))) < 1e-6


def test_entropy_decreases_along_clt():
    sw = clt_sweep(D.generalized_gaussian(4), (1, 2, 4, 8, 16))
    ents = [relative_entropy_to_gaussian(sw.densities[n]) for n in sw.n_list]
    assert all(b < a for a, b in zip(ents, ents[1:]))


def test_grid_size_is_restored():
    base = dens(D.student_t(6))
    z = clt_density(base, 8)
    assert 0.5 * base.n_points <= z.n_points <= 2 * base.n_points


def test_invalid_n():
    with pytest.raises(ValueError):
        clt_density(dens(D.gaussian()), 0)
