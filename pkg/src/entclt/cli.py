"""Command-line driver.

Exit codes: 0 every verdict passed, 1 at least one failed, 2 configuration
or runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import __version__, checks, config, reports
from .bounds import run_suite
from .config import ConfigError, ExperimentConfig
from .distributions import closed_form_J_beta, closed_form_J_theta, make_density
from .functionals import InfoProfile, differential_entropy, profile, relative_entropy_to_gaussian
from .grid import GridError, moments
from .ou import fisher_decay_check, flow_trace
from .poincare import muckenhoupt_constant, spectral_gap_1d

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _pmap(fn, items, jobs: int) -> list:
    """``[fn(x) for x in items]``, optionally on a process pool; order is preserved."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _meta(cmd: str, cfg: ExperimentConfig, passed: bool) -> dict:
    # scheduling knobs are left out so reports do not depend on them
    doc = {k: v for k, v in cfg.to_dict().items() if k not in ("jobs", "out")}
    return {"command": cmd, "config": doc, "passed": passed}


# -- profile ------------------------------------------------------------------


def _closed_form(spec) -> float:
    if spec.family == "generalized_gaussian":
        return closed_form_J_beta(spec.beta)
    if spec.family == "student_t":
        return closed_form_J_theta(spec.theta)
    if spec.family == "gaussian":
        return 0.0
    return math.nan


def _profile_row(args) -> dict:
    spec, n_points = args
    g = make_density(spec, n_points)
    if spec.has_score:
        prof = profile(g)
    else:
        m = moments(g)
        nan = math.nan
        prof = InfoProfile(m.mean, m.variance, differential_entropy(g), relative_entropy_to_gaussian(g), nan, nan, g.grid_meta())
    row = {"family": spec.name}
    row.update(prof.as_row())
    row["closed_form_rel_fisher"] = _closed_form(spec)
    return row


def cmd_profile(cfg: ExperimentConfig, out: str) -> int:
    rows = _pmap(_profile_row, [(s, cfg.n_points) for s in cfg.families], cfg.jobs)
    reports.write_report(out, "profile", rows, _meta("profile", cfg, True))
    for r in rows:
        print(f"{r['family']:>14s}  Ent={r['rel_entropy']:.6e}  J={r['rel_fisher']:.6e}")
    return EXIT_OK


# -- clt ----------------------------------------------------------------------


def _suite(args):
    spec, cfg = args
    return [r.as_row() for r in run_suite(spec, cfg.d_list, cfg.n_list, cfg.n_points, cfg.tol("bounds"))]


def cmd_clt(cfg: ExperimentConfig, out: str) -> int:
    bad = [s.name for s in cfg.families if not s.has_score]
    if bad:
        raise ConfigError(f"families without a score cannot be swept: {bad}")
    rows = [r for part in _pmap(_suite, [(s, cfg) for s in cfg.families], cfg.jobs) for r in part]
    passed = all(r["passed"] for r in rows)
    reports.write_report(out, "clt", rows, _meta("clt", cfg, passed))
    n_fail = sum(not r["passed"] for r in rows)
    print(f"clt: {len(rows)} cells, {n_fail} failing")
    for r in rows:
        if not r["passed"]:
            fails = [k[5:] for k, v in r.items() if k.startswith("pass_") and v == "fail"]
            print(f"  FAIL {r['family']} d={r['d']} n={r['n']}: {' '.join(fails) or r['error']}")
    return EXIT_OK if passed else EXIT_FAIL


# -- flow ---------------------------------------------------------------------


def _flow_rows(args) -> list:
    spec, cfg = args
    g = make_density(spec, cfg.n_points)
    tr = flow_trace(g, cfg.t_nodes)
    decay = dict(fisher_decay_check(g, tr.t_nodes))
    rows = []
    for t, e, j, res in zip(tr.t_nodes, tr.ent_values, tr.j_values, tr.debruijn_residuals):
        ok = res < cfg.tol("debruijn") and decay[t] >= -cfg.tol("decay")
        rows.append(
            {
                "family": spec.name,
                "t": t,
                "rel_entropy": e,
                "rel_fisher": j,
                "debruijn_residual": res,
                "decay_slack": decay[t],
                "tol_debruijn": cfg.tol("debruijn"),
                "tol_decay": cfg.tol("decay"),
                "grid_n_points": g.n_points,
                "grid_h": g.h,
                "passed": ok,
            }
        )
    return rows


def cmd_flow(cfg: ExperimentConfig, out: str) -> int:
    bad = [s.name for s in cfg.families if not s.has_score]
    if bad:
        raise ConfigError(f"families without a score have no Fisher information: {bad}")
    rows = [r for part in _pmap(_flow_rows, [(s, cfg) for s in cfg.families], cfg.jobs) for r in part]
    passed = all(r["passed"] for r in rows)
    reports.write_report(out, "flow", rows, _meta("flow", cfg, passed))
    for r in rows:
        flag = "PASS" if r["passed"] else "FAIL"
        print(f"{flag} {r['family']:>14s} t={r['t']:<6g} residual={r['debruijn_residual']:.2e} decay_slack={r['decay_slack']:.2e}")
    return EXIT_OK if passed else EXIT_FAIL


# -- poincare -----------------------------------------------------------------


def _poincare_row(args) -> dict:
    spec, cfg = args
    g = make_density(spec, cfg.n_points)
    est = spectral_gap_1d(g)
    b = muckenhoupt_constant(g)
    var = moments(g).variance
    ok = est.converged and b <= est.c_p + 1e-6 and est.c_p <= 4.0 * b + 1e-6 and est.c_p >= var - cfg.tol("poincare_lower")
    row = {
        "family": spec.name,
        "c_p": est.c_p,
        "c_p_coarse": est.c_p_coarse,
        "gap": est.gap,
        "converged": est.converged,
        "muckenhoupt_b": b,
        "muckenhoupt_upper": 4.0 * b,
        "variance": var,
        "tol_lower": cfg.tol("poincare_lower"),
        "passed": ok,
    }
    row.update({f"grid_{k}": v for k, v in est.grid_meta.items()})
    return row


def cmd_poincare(cfg: ExperimentConfig, out: str) -> int:
    rows = _pmap(_poincare_row, [(s, cfg) for s in cfg.families], cfg.jobs)
    passed = all(r["passed"] for r in rows)
    reports.write_report(out, "poincare", rows, _meta("poincare", cfg, passed))
    for r in rows:
        flag = "PASS" if r["passed"] else "FAIL"
        print(f"{flag} {r['family']:>14s} c_p={r['c_p']:.6g} B={r['muckenhoupt_b']:.4g} converged={r['converged']}")
    return EXIT_OK if passed else EXIT_FAIL


# -- verify -------------------------------------------------------------------


def _run_check(args):
    idx, cfg = args
    return checks.run_one(checks.battery(cfg)[idx], cfg)


def cmd_verify(cfg: ExperimentConfig, out: str) -> int:
    items = checks.battery(cfg)
    if not items:
        raise ConfigError(f"no checks match {list(cfg.checks)}")
    results = _pmap(_run_check, [(i, cfg) for i in range(len(items))], cfg.jobs)
    rows = [r.as_row() for r in results]
    passed = all(r.passed for r in results)
    reports.write_report(out, "verify", rows, _meta("verify", cfg, passed))
    width = max(len(r.name) for r in results)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.name:<{width}s}  {r.kind:>8s} {r.threshold:<8.2g} value={r.value:.3e}  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results)} checks, {len(results) - n_fail} passed, {n_fail} failed")
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "profile": cmd_profile,
    "clt": cmd_clt,
    "flow": cmd_flow,
    "verify": cmd_verify,
    "poincare": cmd_poincare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entclt", description="Numerical checks of entropic CLT bounds on grid densities.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "profile": "information profile (moments, entropy, Fisher information) per family",
        "clt": "bound sweep over (family, d, n); CSV + JSON report",
        "flow": "Ornstein-Uhlenbeck flow traces with de Bruijn residuals",
        "verify": "run the invariant battery",
        "poincare": "Poincaré constants with Muckenhoupt cross-check",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="JSON config file (default: packaged config)")
        sp.add_argument("--out", help="output directory (default: config 'out')")
        sp.add_argument("--jobs", type=int, help="worker processes")
        sp.add_argument("--n-points", type=int, dest="n_points", help="grid size override")
        sp.add_argument("--strict", action="store_true", help="zero extra slack on every inequality")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config.load(args.config)
        if args.n_points is not None or args.jobs is not None:
            doc = cfg.to_dict()
            if args.n_points is not None:
                doc["n_points"] = args.n_points
            if args.jobs is not None:
                doc["jobs"] = args.jobs
            cfg = replace(config.from_dict(doc), density_files=cfg.density_files)
        if args.strict:
            cfg = cfg.strict()
        out = args.out or cfg.out
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (GridError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
