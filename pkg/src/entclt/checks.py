"""The invariant battery behind ``verify``.

Every check is a plain function ``cfg -> CheckResult`` registered under a
group name.  ``value`` is the quantity compared against ``threshold``
(an error that must stay below it, or a slack that must stay above minus
it, as described by ``kind``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bounds, convolve, distributions, functionals, ou, poincare, projection, transport
from .config import ExperimentConfig
from .density_io import load_density
from .distributions import DistributionSpec as D
from .distributions import closed_form_J_beta, closed_form_J_theta, gamma_fn, make_density
from .grid import GridError, build_from_pdf, moments, product, scale, standardize


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    passed: bool
    value: float
    threshold: float
    kind: str  # "error<=" or "slack>=-"
    detail: str = ""

    def as_row(self) -> dict:
        return {
            "name": self.name,
            "group": self.group,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "kind": self.kind,
            "detail": self.detail,
        }


REGISTRY: list = []


def check(group: str, name: str):
    def deco(fn):
        REGISTRY.append((f"{group}.{name}", group, fn))
        return fn

    return deco


def _err(name, group, value, tol, detail=""):
    value = float(value)
    return CheckResult(name, group, bool(value <= tol), value, tol, "error<=", detail)


def _slack(name, group, value, tol, detail=""):
    value = float(value)
    return CheckResult(name, group, bool(value >= -tol), value, tol, "slack>=-", detail)


def _ok(name, group, cond, detail=""):
    return CheckResult(name, group, bool(cond), 0.0 if cond else 1.0, 0.0, "error<=", detail)


SMOOTH = (
    D.gaussian(),
    D.generalized_gaussian(1.5),
    D.generalized_gaussian(3),
    D.generalized_gaussian(4),
    D.student_t(5),
    D.student_t(6),
    D.student_t(8),
    D.student_t(10),
    D.gaussian_mixture([0.3, 0.7], [-1.0, 0.5], [0.6, 0.9]),
)
CORPUS = SMOOTH + (D.uniform_sqrt3(),)


def _dens(spec, cfg):
    return make_density(spec, cfg.n_points)


@lru_cache(maxsize=16)
def _proj(spec, n_points):
    return projection.projection_report_n2(make_density(spec, n_points))


def _worst(pairs):
    """``(label, value)`` of the largest value."""
    label, value = max(pairs, key=lambda p: p[1])
    return label, value


def _least(pairs):
    label, value = min(pairs, key=lambda p: p[1])
    return label, value


# -- grid ---------------------------------------------------------------------


@check("grid", "tail_mass")
def _grid_tail(cfg, name="grid.tail_mass"):
    lab, v = _worst((s.name, _dens(s, cfg).tail_mass) for s in CORPUS)
    return _err(name, "grid", v, 1e-10, f"worst {lab}")


@check("grid", "normalized")
def _grid_norm(cfg, name="grid.normalized"):
    lab, v = _worst((s.name, abs(_dens(s, cfg).mass() - 1.0)) for s in CORPUS)
    return _err(name, "grid", v, 1e-12, f"worst {lab}")


@check("grid", "scale_relabel")
def _grid_scale(cfg, name="grid.scale_relabel"):
    g = scale(_dens(D.generalized_gaussian(4), cfg), 1.3)
    return _err(name, "grid", abs(moments(g).variance - 1.69), 1e-9)


@check("grid", "standardize")
def _grid_std(cfg, name="grid.standardize"):
    spec = D.gaussian_mixture([0.5, 0.5], [0.0, 3.0], [1.0, 0.5])
    g = build_from_pdf(spec.pdf, 1.5, 1.8, cfg.n_points)
    m = moments(standardize(g))
    return _err(name, "grid", max(abs(m.mean), abs(m.variance - 1.0)), 1e-10)


@check("grid", "nan_rejected")
def _grid_nan(cfg, name="grid.nan_rejected"):
    try:
        build_from_pdf(lambda x: np.full_like(np.asarray(x, float), np.nan), 0.0, 1.0, 1024)
    except GridError:
        return _ok(name, "grid", True)
    return _ok(name, "grid", False, "NaN pdf accepted")


# -- distributions ------------------------------------------------------------


@check("distributions", "gamma_half")
def _gamma_half(cfg, name="distributions.gamma_half"):
    return _err(name, "distributions", abs(gamma_fn(0.5) ** 2 - math.pi), 1e-12)


@check("distributions", "gamma_oracle")
def _gamma_oracle(cfg, name="distributions.gamma_oracle"):
    xs = np.linspace(0.05, 30.0, 600)
    v = max(abs(gamma_fn(x) / math.gamma(x) - 1.0) for x in xs)
    return _err(name, "distributions", v, 1e-13)


@check("distributions", "j_beta_gaussian_zero")
def _jb2(cfg, name="distributions.j_beta_gaussian_zero"):
    return _err(name, "distributions", abs(closed_form_J_beta(2.0)), 1e-12)


@check("distributions", "j_beta_asymptote")
def _jb50(cfg, name="distributions.j_beta_asymptote"):
    return _err(name, "distributions", abs(closed_form_J_beta(50.0) / (50.0 / 3.0) - 1.0), 0.15)


@check("distributions", "j_theta_five")
def _jt5(cfg, name="distributions.j_theta_five"):
    return _err(name, "distributions", abs(closed_form_J_theta(5.0) - 0.25), 1e-15)


@check("distributions", "unit_variance")
def _unit_var(cfg, name="distributions.unit_variance"):
    def dev(s):
        m = moments(_dens(s, cfg))
        return max(abs(m.mean), abs(m.variance - 1.0))

    lab, v = _worst((s.name, dev(s)) for s in CORPUS)
    return _err(name, "distributions", v, 1e-6, f"worst {lab}")


@check("distributions", "invalid_parameters")
def _invalid(cfg, name="distributions.invalid_parameters"):
    bad = 0
    for mk in (lambda: D.generalized_gaussian(0.0), lambda: D.student_t(2.0), lambda: closed_form_J_theta(1.5)):
        try:
            mk()
            bad += 1
        except ValueError:
            pass
    return _ok(name, "distributions", bad == 0, f"{bad} invalid inputs accepted")


# -- functionals --------------------------------------------------------------


@check("functionals", "closed_form_j_beta")
def _cf_beta(cfg, name="functionals.closed_form_j_beta"):
    errs = []
    for beta in (1.5, 2.0, 3.0, 4.0):
        j = functionals.relative_fisher(_dens(D.generalized_gaussian(beta), cfg))
        if beta == 2.0:
            # the value is zero here: absolute error against 1e-8
            errs.append(("beta=2", abs(j) / 1e-8))
        else:
            rel = abs(j / closed_form_J_beta(beta) - 1.0)
            errs.append((f"beta={beta:g}", rel / cfg.tol("closed_form_beta")))
    lab, v = _worst(errs)
    return _err(name, "functionals", v, 1.0, f"worst {lab} (error/tolerance)")


@check("functionals", "closed_form_j_theta")
def _cf_theta(cfg, name="functionals.closed_form_j_theta"):
    errs = []
    for theta in (4.0, 5.0, 10.0):
        j = functionals.relative_fisher(_dens(D.student_t(theta), cfg))
        errs.append((f"theta={theta:g}", abs(j / closed_form_J_theta(theta) - 1.0)))
    lab, v = _worst(errs)
    return _err(name, "functionals", v, cfg.tol("closed_form_theta"), f"worst {lab}")


@check("functionals", "gaussian_null")
def _gauss_null(cfg, name="functionals.gaussian_null"):
    p = functionals.profile(_dens(D.gaussian(), cfg))
    return _err(name, "functionals", max(abs(p.rel_entropy), abs(p.rel_fisher)), 1e-8)


@check("functionals", "score_moments")
def _score_mom(cfg, name="functionals.score_moments"):
    def dev(s):
        a, b = projection.score_moments_check(_dens(s, cfg))
        return max(abs(a), abs(b + 1.0))

    lab, v = _worst((s.name, dev(s)) for s in SMOOTH)
    return _err(name, "functionals", v, cfg.tol("score_moments"), f"worst {lab}")


@check("functionals", "relative_fisher_two_routes")
def _jj(cfg, name="functionals.relative_fisher_two_routes"):
    def dev(s):
        g = _dens(s, cfg)
        return abs(functionals.relative_fisher(g) - functionals.relative_fisher_direct(g))

    lab, v = _worst((s.name, dev(s)) for s in SMOOTH)
    # the two routes differ by twice the discrete error in ∫xρp
    return _err(name, "functionals", v, 1e-5, f"worst {lab}")


@check("functionals", "entropy_two_routes")
def _ee(cfg, name="functionals.entropy_two_routes"):
    def dev(s):
        g = _dens(s, cfg)
        return abs(functionals.relative_entropy_to_gaussian(g) - functionals.relative_entropy_direct(g))

    lab, v = _worst((s.name, dev(s)) for s in CORPUS)
    return _err(name, "functionals", v, 1e-8, f"worst {lab}")


@check("functionals", "uniform_score_refused")
def _unif_score(cfg, name="functionals.uniform_score_refused"):
    try:
        functionals.score(_dens(D.uniform_sqrt3(), cfg))
    except GridError:
        return _ok(name, "functionals", True)
    return _ok(name, "functionals", False, "uniform law produced a score")


# -- convolution --------------------------------------------------------------


@check("convolve", "mass_conservation")
def _conv_mass(cfg, name="convolve.mass_conservation"):
    def dev(s):
        g = _dens(s, cfg)
        raw = convolve.raw_convolution(g, g)
        return max(abs(raw.mass - 1.0), raw.clamped_mass)

    lab, v = _worst((s.name, dev(s)) for s in SMOOTH)
    return _err(name, "convolve", v, 1e-9, f"worst {lab}")


@check("convolve", "gaussian_stable")
def _conv_gauss(cfg, name="convolve.gaussian_stable"):
    vals = []
    for n in cfg.n_list:
        z = convolve.cached_clt_density(D.gaussian(), n, cfg.n_points)
        ref = np.exp(-0.5 * z.x**2) / math.sqrt(2 * math.pi)
        vals.append((f"n={n}", float(np.max(np.abs(z.values - ref)))))
    lab, v = _worst(vals)
    return _err(name, "convolve", v, 1e-6, f"worst {lab}")


@check("convolve", "variance_preserved")
def _conv_var(cfg, name="convolve.variance_preserved"):
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.student_t(6)):
        for n in cfg.n_list:
            m = moments(convolve.cached_clt_density(s, n, cfg.n_points))
            vals.append((f"{s.name} n={n}", max(abs(m.mean), abs(m.variance - 1.0))))
    lab, v = _worst(vals)
    return _err(name, "convolve", v, 1e-6, f"worst {lab}")


@check("convolve", "fft_vs_direct")
def _conv_direct(cfg, name="convolve.fft_vs_direct"):
    base = make_density(D.generalized_gaussian(4), 1024)
    a = convolve.clt_density(base, 4)
    b = convolve.clt_density_direct(base, 4)
    return _err(name, "convolve", float(np.max(np.abs(a.values - b(a.x)))), 1e-8)


@check("convolve", "entropy_monotone")
def _conv_mono(cfg, name="convolve.entropy_monotone"):
    worst = []
    for s in cfg.families:
        if not s.has_score:
            continue
        ns = sorted(cfg.n_list)
        ents = [functionals.relative_entropy_to_gaussian(convolve.cached_clt_density(s, n, cfg.n_points)) for n in ns]
        worst.append((s.name, max([b - a for a, b in zip(ents, ents[1:])] + [-math.inf])))
    lab, v = _worst(worst)
    return _err(name, "convolve", v, 1e-10, f"largest increase {lab}")


@check("convolve", "rate_shape")
def _rate(cfg, name="convolve.rate_shape"):
    ns = (4, 8, 16, 32)
    vals = [n * functionals.relative_entropy_to_gaussian(convolve.cached_clt_density(D.generalized_gaussian(4), n, cfg.n_points)) for n in ns]
    # nonincreasing within a (1 + slack) factor
    ratio = max(b / a for a, b in zip(vals, vals[1:]))
    return _err(name, "convolve", ratio - 1.0, cfg.tol("rate_shape"), "n*Ent " + " ".join(f"{v:.4g}" for v in vals))


# -- OU flow ------------------------------------------------------------------


@check("ou", "identity_at_zero")
def _ou_zero(cfg, name="ou.identity_at_zero"):
    g = _dens(D.generalized_gaussian(4), cfg)
    return _err(name, "ou", float(np.max(np.abs(ou.ou_evolve(g, 0.0).values - g.values))), 1e-10)


@check("ou", "gaussian_stationary")
def _ou_stat(cfg, name="ou.gaussian_stationary"):
    g = _dens(D.gaussian(), cfg)
    vals = []
    for t in (0.1, 0.7, 3.0):
        gt = ou.ou_evolve(g, t)
        ref = np.exp(-0.5 * gt.x**2) / math.sqrt(2 * math.pi)
        vals.append((f"t={t:g}", float(np.max(np.abs(gt.values - ref)))))
    lab, v = _worst(vals)
    return _err(name, "ou", v, 1e-6, f"worst {lab}")


@check("ou", "variance_preserved")
def _ou_var(cfg, name="ou.variance_preserved"):
    vals = []
    for s in (D.generalized_gaussian(4), D.student_t(8)):
        for t in (0.1, 1.0, 5.0):
            vals.append((f"{s.name} t={t:g}", abs(moments(ou.ou_evolve(_dens(s, cfg), t)).variance - 1.0)))
    lab, v = _worst(vals)
    return _err(name, "ou", v, 1e-5, f"worst {lab}")


@check("ou", "equilibrium")
def _ou_eq(cfg, name="ou.equilibrium"):
    g = ou.ou_evolve(_dens(D.generalized_gaussian(4), cfg), 5.0)
    return _err(name, "ou", functionals.relative_entropy_to_gaussian(g), 1e-4)


@check("ou", "semigroup")
def _ou_semi(cfg, name="ou.semigroup"):
    g = _dens(D.generalized_gaussian(4), cfg)
    a = ou.ou_evolve(ou.ou_evolve(g, 0.3), 0.7)
    b = ou.ou_evolve(g, 1.0)
    return _err(name, "ou", float(np.max(np.abs(a.values - b(a.x)))), 1e-5)


@check("ou", "debruijn")
def _ou_db(cfg, name="ou.debruijn"):
    ts = (0.1, 0.5, 1.0)
    vals = []
    for s in (D.generalized_gaussian(4), D.student_t(10)):
        tr = ou.flow_trace(_dens(s, cfg), ts)
        vals.append((s.name, max(tr.debruijn_residuals) / cfg.tol("debruijn")))
    tr = ou.flow_trace(_dens(D.gaussian(), cfg), ts)
    vals.append(("gaussian", max(tr.debruijn_residuals) / cfg.tol("debruijn_gaussian")))
    lab, v = _worst(vals)
    # value is the worst residual as a fraction of its own tolerance
    return _err(name, "ou", v, 1.0, f"worst {lab} (residual/tolerance)")


@check("ou", "fisher_decay")
def _ou_decay(cfg, name="ou.fisher_decay"):
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.student_t(8)):
        for t, sl in ou.fisher_decay_check(_dens(s, cfg), (0.1, 0.5, 1.0, 2.0)):
            vals.append((f"{s.name} t={t:g}", sl))
    lab, v = _least(vals)
    return _slack(name, "ou", v, cfg.tol("decay"), f"least {lab}")


@check("ou", "monotone_trace")
def _ou_mono(cfg, name="ou.monotone_trace"):
    vals = []
    for s in (D.generalized_gaussian(4), D.student_t(8)):
        tr = ou.flow_trace(_dens(s, cfg), (0.0, 0.1, 0.25, 0.5, 1.0, 2.0))
        for series in (tr.ent_values, tr.j_values):
            vals.append((s.name, min(a - b for a, b in zip(series, series[1:]))))
    lab, v = _least(vals)
    return _slack(name, "ou", v, 1e-5, f"least {lab}")


def _w2_to_gauss(g, cfg):
    return transport.w2_sq_1d(g, _dens(D.gaussian(), cfg))


@check("ou", "entropy_cost")
def _ou_ecost(cfg, name="ou.entropy_cost"):
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.student_t(8), D.student_t(6)):
        g = _dens(s, cfg)
        w2 = _w2_to_gauss(g, cfg)
        for t in (0.2, 0.5, 1.0):
            vals.append((f"{s.name} t={t:g}", ou.entropy_cost_check(g, t, w2)))
    lab, v = _least(vals)
    return _slack(name, "ou", v, cfg.tol("entropy_cost"), f"least {lab}")


@check("ou", "ent_w2_fi_bound")
def _ou_rhs(cfg, name="ou.ent_w2_fi_bound"):
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.student_t(8)):
        g = _dens(s, cfg)
        w2 = _w2_to_gauss(g, cfg)
        j = functionals.relative_fisher(g)
        e = functionals.relative_entropy_to_gaussian(g)
        for t in (0.05, 0.2, 0.5, 1.0, 2.0, math.inf):
            vals.append((f"{s.name} t={t:g}", ou.ent_w2_fi_bound(g, t, w2, j) - e))
    lab, v = _least(vals)
    return _slack(name, "ou", v, cfg.tol("entropy_cost"), f"least {lab}")


@check("ou", "hwi_optimum")
def _ou_hwi(cfg, name="ou.hwi_optimum"):
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.student_t(8)):
        g = _dens(s, cfg)
        w2 = _w2_to_gauss(g, cfg)
        j = functionals.relative_fisher(g)
        t = ou.hwi_optimal_time(w2, j)
        vals.append((s.name, abs(ou.ent_w2_fi_bound(g, t, w2, j) - ou.hwi_value(w2, j))))
    lab, v = _worst(vals)
    return _err(name, "ou", v, cfg.tol("hwi"), f"worst {lab}")


@check("ou", "logsobolev_limit")
def _ou_ls(cfg, name="ou.logsobolev_limit"):
    g = _dens(D.generalized_gaussian(3), cfg)
    j = functionals.relative_fisher(g)
    w2 = _w2_to_gauss(g, cfg)
    return _err(name, "ou", abs(ou.ent_w2_fi_bound(g, 40.0, w2, j) - 0.5 * j), 1e-12)


@check("ou", "poincare_stability")
def _ou_pstab(cfg, name="ou.poincare_stability"):
    vals = []
    for s in (D.generalized_gaussian(4), D.student_t(8)):
        g = poincare.restrict_to_support(_dens(s, cfg))
        c0 = poincare.spectral_gap_1d(g).c_p
        for t in (0.25, 1.0):
            c = poincare.spectral_gap_1d(ou.ou_evolve(g, t)).c_p
            vals.append((f"{s.name} t={t:g}", math.exp(-2 * t) * c0 - math.expm1(-2 * t) - c))
    lab, v = _least(vals)
    return _slack(name, "ou", v, cfg.tol("stability"), f"least {lab} (law restricted to its effective support)")


# -- transport ----------------------------------------------------------------


@check("transport", "translation")
def _w2_shift(cfg, name="transport.translation"):
    a = _dens(D.gaussian(), cfg)
    b = build_from_pdf(lambda x: np.exp(-0.5 * (x - 0.7) ** 2) / math.sqrt(2 * math.pi), 0.7, 1.0, cfg.n_points)
    return _err(name, "transport", abs(transport.w2_1d(a, b) - 0.7), 1e-4)


@check("transport", "gaussian_scale")
def _w2_scale(cfg, name="transport.gaussian_scale"):
    a = _dens(D.gaussian(), cfg)
    b = build_from_pdf(lambda x: np.exp(-0.5 * (x / 1.5) ** 2) / (1.5 * math.sqrt(2 * math.pi)), 0.0, 1.5, cfg.n_points)
    return _err(name, "transport", abs(transport.w2_1d(a, b) - 0.5), 1e-4)


@check("transport", "uniform_closed_form")
def _w2_unif(cfg, name="transport.uniform_closed_form"):
    w2 = transport.w2_sq_1d(_dens(D.uniform_sqrt3(), cfg), _dens(D.gaussian(), cfg))
    return _err(name, "transport", abs(w2 - (2.0 - 2.0 * math.sqrt(3.0 / math.pi))), 1e-6)


@check("transport", "triangle")
def _w2_tri(cfg, name="transport.triangle"):
    a, b, c = (_dens(s, cfg) for s in (D.generalized_gaussian(4), D.gaussian(), D.student_t(6)))
    sl = transport.w2_1d(a, b) + transport.w2_1d(b, c) - transport.w2_1d(a, c)
    return _slack(name, "transport", sl, 1e-5)


@check("transport", "product_iid")
def _w2_prod(cfg, name="transport.product_iid"):
    q, z = _dens(D.generalized_gaussian(4), cfg), _dens(D.gaussian(), cfg)
    v = transport.w2_product(product([q, q]), product([z, z]))
    return _err(name, "transport", abs(v - math.sqrt(2.0) * transport.w2_1d(q, z)), 1e-6)


@check("transport", "talagrand_entropy")
def _w2_tal(cfg, name="transport.talagrand_entropy"):
    vals = []
    for s in CORPUS:
        g = _dens(s, cfg)
        vals.append((s.name, 2.0 * functionals.relative_entropy_to_gaussian(g) - _w2_to_gauss(g, cfg)))
    lab, v = _least(vals)
    return _slack(name, "transport", v, cfg.tol("transport"), f"least {lab}")


@check("transport", "lemma33_q4")
def _w2_l33(cfg, name="transport.lemma33_q4"):
    spec = D.generalized_gaussian(4)
    r = poincare.spectral_gap_1d(_dens(spec, cfg)).c_p * bounds.R_DEFLATION
    vals = []
    for d in (1, 2):
        for n in (2, 4, 8, 16):
            w2 = d * _w2_to_gauss(convolve.cached_clt_density(spec, n, cfg.n_points), cfg)
            vals.append((f"d={d} n={n}", bounds.lemma33_bound(d, n, max(r, 1.0)) - w2))
    lab, v = _least(vals)
    return _slack(name, "transport", v, cfg.tol("transport"), f"least {lab}")


@check("transport", "quadrature_agrees")
def _w2_quad(cfg, name="transport.quadrature_agrees"):
    z = _dens(D.gaussian(), cfg)
    vals = []
    for s in (D.generalized_gaussian(3), D.generalized_gaussian(4), D.uniform_sqrt3()):
        g = _dens(s, cfg)
        vals.append((s.name, abs(transport.w2_sq_1d(g, z) - transport.w2_sq_quadrature(g, z))))
    lab, v = _worst(vals)
    return _err(name, "transport", v, 1e-5, f"worst {lab}")


# -- Poincaré -----------------------------------------------------------------


@check("poincare", "gaussian")
def _p_gauss(cfg, name="poincare.gaussian"):
    c = poincare.spectral_gap_1d(_dens(D.gaussian(), cfg)).c_p
    return _err(name, "poincare", abs(c - 1.0), cfg.tol("poincare_rel"))


@check("poincare", "uniform")
def _p_unif(cfg, name="poincare.uniform"):
    c = poincare.spectral_gap_1d(_dens(D.uniform_sqrt3(), cfg)).c_p
    ref = 12.0 / math.pi**2
    return _err(name, "poincare", abs(c / ref - 1.0), cfg.tol("poincare_rel"))


@check("poincare", "scaling")
def _p_scale(cfg, name="poincare.scaling"):
    g = scale(_dens(D.gaussian(), cfg), 1.3)
    c = poincare.spectral_gap_1d(g).c_p
    return _err(name, "poincare", abs(c / 1.69 - 1.0), cfg.tol("poincare_rel"))


@check("poincare", "universal_lower_bound")
def _p_lower(cfg, name="poincare.universal_lower_bound"):
    vals = []
    for s in CORPUS:
        g = _dens(s, cfg)
        vals.append((s.name, poincare.spectral_gap_1d(g).c_p - moments(g).variance))
    lab, v = _least(vals)
    return _slack(name, "poincare", v, cfg.tol("poincare_lower"), f"least {lab}")


@check("poincare", "muckenhoupt_sandwich")
def _p_muck(cfg, name="poincare.muckenhoupt_sandwich"):
    vals = []
    for s in (D.gaussian(), D.generalized_gaussian(1.5), D.generalized_gaussian(3), D.generalized_gaussian(4), D.uniform_sqrt3()):
        g = _dens(s, cfg)
        c = poincare.spectral_gap_1d(g).c_p
        b = poincare.muckenhoupt_constant(g)
        vals.append((s.name, min(c - b, 4.0 * b - c)))
    lab, v = _least(vals)
    return _slack(name, "poincare", v, 1e-6, f"least {lab}")


@check("poincare", "subadditivity")
def _p_sub(cfg, name="poincare.subadditivity"):
    g = _dens(D.generalized_gaussian(4), cfg)
    c1 = poincare.spectral_gap_1d(g).c_p
    c2 = poincare.spectral_gap_1d(convolve.convolve(g, g)).c_p
    return _slack(name, "poincare", 2.0 * c1 - c2, 2e-3)


@check("poincare", "refinement")
def _p_ref(cfg, name="poincare.refinement"):
    vals = []
    for s in (D.uniform_sqrt3(), D.generalized_gaussian(3), D.generalized_gaussian(4)):
        seq = poincare.refinement_sequence(_dens(s, cfg), levels=3)
        d1, d2 = abs(seq[1] - seq[0]), abs(seq[2] - seq[1])
        vals.append((s.name, d2 / d1 if d1 > 0 else 0.0))
    lab, v = _worst(vals)
    return _err(name, "poincare", v, 0.5, f"worst shrink ratio {lab}")


@check("poincare", "converged")
def _p_conv(cfg, name="poincare.converged"):
    bad = [s.name for s in CORPUS if not poincare.spectral_gap_1d(_dens(s, cfg)).converged]
    return _ok(name, "poincare", not bad, ",".join(bad))


@check("poincare", "product")
def _p_prod(cfg, name="poincare.product"):
    m = product([_dens(D.gaussian(), cfg), _dens(D.uniform_sqrt3(), cfg)])
    c = poincare.poincare_product(m)
    return _err(name, "poincare", abs(c * math.pi**2 / 12.0 - 1.0), cfg.tol("poincare_rel"))


@check("poincare", "gap_reciprocal")
def _p_gap(cfg, name="poincare.gap_reciprocal"):
    e = poincare.spectral_gap_1d(_dens(D.generalized_gaussian(4), cfg))
    return _err(name, "poincare", abs(e.gap * e.c_p - 1.0), 1e-12)


# -- projection (two summands) ------------------------------------------------

PROJ_BASES = (D.gaussian(), D.generalized_gaussian(3), D.generalized_gaussian(4))


def _gauss_or(spec, cfg, key):
    return cfg.tol("gaussian_residual") if spec.family == "gaussian" else cfg.tol(key)


@check("projection", "identity_residual")
def _pr_id(cfg, name="projection.identity_residual"):
    vals = [(s.name, _proj(s, cfg.n_points).identity_residual / _gauss_or(s, cfg, "identity")) for s in PROJ_BASES]
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1.0, f"worst {lab} (residual/tolerance)")


@check("projection", "conditional_score_gaussian")
def _pr_cs(cfg, name="projection.conditional_score_gaussian"):
    cs = projection.conditional_score(_dens(D.gaussian(), cfg))
    m = np.abs(cs.s) <= 4.0
    return _err(name, "projection", float(np.max(np.abs(cs.values[m] + 0.5 * cs.s[m]))), 1e-3)


@check("projection", "telescoping")
def _pr_tel(cfg, name="projection.telescoping"):
    vals = []
    for s in PROJ_BASES:
        r = _proj(s, cfg.n_points)
        if s.family == "gaussian":
            # both sides vanish: compare absolutely
            vals.append((s.name, abs(r.ridge_minus_additive - r.delta2) / cfg.tol("gaussian_residual")))
        else:
            vals.append((s.name, r.telescoping_rel_error / cfg.tol("telescoping")))
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1.0, f"worst {lab} (error/tolerance)")


@check("projection", "m_scalar")
def _pr_m(cfg, name="projection.m_scalar"):
    vals = [(s.name, _proj(s, cfg.n_points).m_scalar_error / _gauss_or(s, cfg, "m_scalar")) for s in PROJ_BASES]
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1.0, f"worst {lab} (error/tolerance)")


@check("projection", "lower_bound")
def _pr_lb(cfg, name="projection.lower_bound"):
    vals = [(s.name, _proj(s, cfg.n_points).lower_bound_slack) for s in PROJ_BASES]
    lab, v = _least(vals)
    return _slack(name, "projection", v, cfg.tol("projection_slack"), f"least {lab}")


@check("projection", "fisher_chain")
def _pr_chain(cfg, name="projection.fisher_chain"):
    vals = [(s.name, projection.prop_fi_chain_check_n2(_proj(s, cfg.n_points))) for s in PROJ_BASES + (D.student_t(8),)]
    lab, v = _least(vals)
    return _slack(name, "projection", v, cfg.tol("projection_slack"), f"least {lab}")


@check("projection", "pythagoras")
def _pr_pyth(cfg, name="projection.pythagoras"):
    vals = []
    for s in PROJ_BASES:
        r = _proj(s, cfg.n_points)
        tol = cfg.tol("gaussian_residual") if s.family == "gaussian" else 1e-3 * max(r.j_z2, 1e-12)
        vals.append((s.name, abs(projection.pythagoras_gap(r)) / tol))
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1.0, f"worst {lab} (gap/tolerance)")


@check("projection", "cauchy_schwarz")
def _pr_cs2(cfg, name="projection.cauchy_schwarz"):
    vals = [(s.name, projection.cauchy_schwarz_slack(_proj(s, cfg.n_points))) for s in PROJ_BASES]
    lab, v = _least(vals)
    return _slack(name, "projection", v, cfg.tol("projection_slack"), f"least {lab}")


@check("projection", "orthogonality")
def _pr_orth(cfg, name="projection.orthogonality"):
    vals = [(s.name, abs(_proj(s, cfg.n_points).orthogonality)) for s in PROJ_BASES]
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1e-4, f"worst {lab}")


@check("projection", "test_functions")
def _pr_phi(cfg, name="projection.test_functions"):
    vals = []
    for s in PROJ_BASES:
        g = _dens(s, cfg)
        for lab, phi in (("s", lambda u: u), ("s^3", lambda u: u**3)):
            a, b = projection.projection_moment_pair(g, phi)
            vals.append((f"{s.name} phi={lab}", abs(a - b) / max(abs(b), 1e-12)))
    lab, v = _worst(vals)
    return _err(name, "projection", v, 1e-4, f"worst {lab}")


# -- bound formulas and sweeps ------------------------------------------------


@check("bounds", "formula_values")
def _b_formula(cfg, name="bounds.formula_values"):
    errs = [
        abs(bounds.theorem1_bound(2, 101, 2.0, 1.0, 1e9) - 2.0 / 27.0),
        abs(bounds.propfi_bound(1, 3, 1.0, 1.0) - 0.5),
        abs(bounds.cfp19_bound(1, 1, 2.0, 1.0) - 0.5 * math.log(2.0)),
        abs(bounds.cfp19_bound(2, 4, 1.5, 1.0) - 0.125 * math.log(5.0)),
        abs(bounds.theorem1_bound(3, 7, 1.0, 0.0, 0.0)),
    ]
    return _err(name, "bounds", max(errs), 1e-15)


@check("bounds", "propfi_identity")
def _b_ident(cfg, name="bounds.propfi_identity"):
    worst = 0.0
    for d in (1, 2, 5):
        for n in (1, 3, 10, 100):
            for r in (1.0, 1.5, 10.0):
                b = bounds.propfi_bound(d, n, r, 0.37)
                worst = max(worst, abs(b * (2 * d * r + n - 1) / (2 * d * r) - 0.37))
    return _err(name, "bounds", worst, 1e-15)


@check("bounds", "theorem1_monotone")
def _b_mono(cfg, name="bounds.theorem1_monotone"):
    bad = 0
    for d in (1, 2, 3):
        for ent1, j1 in ((0.03, 0.37), (0.5, 0.1), (1.0, 5.0)):
            for r in (1.0, 1.2, 2.0, 50.0):
                seq = [bounds.theorem1_bound(d, n, r, ent1, j1) for n in range(1, 65)]
                bad += sum(b > a for a, b in zip(seq, seq[1:]))
            for n in (1, 4, 32):
                seq = [bounds.theorem1_bound(d, n, r, ent1, j1) for r in (1.0, 1.1, 1.5, 3.0, 10.0)]
                bad += sum(b < a for a, b in zip(seq, seq[1:]))
    return _ok(name, "bounds", bad == 0, f"{bad} monotonicity violations")


def _sweep_check(spec):
    def run(cfg, name=f"bounds.sweep[{spec.name}]"):
        reps = bounds.run_suite(spec, cfg.d_list, cfg.n_list, cfg.n_points, cfg.tol("bounds"))
        failed = [f"d={r.d},n={r.n}" for r in reps if not r.passed]
        slacks = [v.slack for r in reps for v in r.verdicts if not v.skipped]
        least = min(slacks) if slacks else math.nan
        detail = f"{len(reps)} cells" + (f"; failing {' '.join(failed)}" if failed else "")
        return CheckResult(name, "bounds", not failed, least, cfg.tol("bounds"), "slack>=-", detail)

    return run


# -- density files ------------------------------------------------------------


def _density_file_check(path):
    def run(cfg, name=f"io.density_file[{path}]"):
        try:
            g = load_density(path)
            prof = functionals.profile(standardize(g)) if g.scoreable else None
        except (GridError, ValueError) as exc:
            return _ok(name, "io", False, str(exc))
        return _ok(name, "io", True, f"n_points={g.n_points}" + (f" J={prof.rel_fisher:.6g}" if prof else ""))

    return run


def battery(cfg: ExperimentConfig) -> list:
    """``(name, group, fn)`` for every check selected by ``cfg.checks``."""
    items = list(REGISTRY)
    for spec in cfg.families:
        if spec.has_score:
            items.append((f"bounds.sweep[{spec.name}]", "bounds", _sweep_check(spec)))
    for path in cfg.density_files:
        items.append((f"io.density_file[{path}]", "io", _density_file_check(path)))
    if cfg.checks:
        sel = set(cfg.checks)
        items = [it for it in items if it[0] in sel or it[1] in sel]
    return items


def run_one(item, cfg: ExperimentConfig) -> CheckResult:
    name, group, fn = item
    try:
        return fn(cfg, name=name)
    except Exception as exc:  # a crashing check is a failing check, never an abort
        return CheckResult(name, group, False, math.nan, math.nan, "error", f"{type(exc).__name__}: {exc}")
