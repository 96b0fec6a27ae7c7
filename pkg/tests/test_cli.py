import csv
import json
import subprocess
import sys

import pytest

from entclt import checks
from entclt.cli import build_parser, main
from entclt.config import default_config


def _cfg(tmp_path, **doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parser_has_all_subcommands():
    ap = build_parser()
    for cmd in ("profile", "clt", "flow", "verify", "poincare"):
        ns = ap.parse_args([cmd, "--jobs", "2", "--n-points", "2048", "--strict"])
        assert ns.command == cmd and ns.jobs == 2 and ns.n_points == 2048 and ns.strict


def test_profile_rows(tmp_path, capsys):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}, {"family": "generalized_gaussian", "beta": 4}, {"family": "student_t", "theta": 5}, {"family": "uniform_sqrt3"}])
    assert main(["profile", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = {r["family"]: r for r in _rows(tmp_path / "profile.csv")}
    g = rows["gaussian"]
    assert abs(float(g["mean"])) < 1e-10 and abs(float(g["variance"]) - 1) < 1e-10
    assert abs(float(g["rel_entropy"])) < 1e-8 and abs(float(g["rel_fisher"])) < 1e-8
    assert float(rows["q_4"]["rel_fisher"]) == pytest.approx(float(rows["q_4"]["closed_form_rel_fisher"]), rel=1e-5)
    assert float(rows["t_5"]["rel_fisher"]) == pytest.approx(0.25, rel=1e-4)
    # reports carry grid metadata
    assert "grid_n_points" in g and "grid_h" in g


def test_clt_gaussian_only(tmp_path):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}], n_list=[1, 2, 4])
    assert main(["clt", "--config", cfg, "--out", str(tmp_path)]) == 0
    for r in _rows(tmp_path / "clt.csv"):
        for col in ("measured_ent", "measured_j", "measured_w2sq"):
            assert abs(float(r[col])) < 1e-8
        assert r["passed"] == "true" and r["tol"] == "0.0001"
    doc = json.loads((tmp_path / "clt.json").read_text())
    assert doc["passed"] is True and len(doc["rows"]) == 9


def test_clt_zero_tolerance_is_config_error(tmp_path, capsys):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}], tolerances={"bounds": 0})
    assert main(["clt", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "tolerance" in capsys.readouterr().err


def test_clt_refuses_uniform(tmp_path):
    cfg = _cfg(tmp_path, families=[{"family": "uniform_sqrt3"}])
    assert main(["clt", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_flow(tmp_path):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}, {"family": "generalized_gaussian", "beta": 4}], t_nodes=[0.1, 1.0])
    assert main(["flow", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "flow.csv")
    assert len(rows) == 4
    assert all(float(r["debruijn_residual"]) < 1e-3 for r in rows)


def test_poincare(tmp_path):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}, {"family": "uniform_sqrt3"}])
    assert main(["poincare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = {r["family"]: r for r in _rows(tmp_path / "poincare.csv")}
    assert float(rows["gaussian"]["c_p"]) == pytest.approx(1.0, rel=1e-2)
    assert float(rows["uniform_sqrt3"]["c_p"]) == pytest.approx(1.2158542, rel=1e-2)


def test_verify_filters_to_projection(tmp_path, capsys):
    cfg = _cfg(tmp_path, checks=["projection"])
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "verify.csv")
    assert rows and {r["group"] for r in rows} == {"projection"}
    assert "projection.telescoping" in capsys.readouterr().out


def test_verify_default_battery_size():
    assert len(checks.battery(default_config())) >= 40


def test_corrupted_density_file_fails_named_check(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"lo": 0, "hi": 1, "values": [1, -2, 1]}')
    cfg = _cfg(tmp_path, checks=["io"], density_files=["broken.json"])
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "io.density_file[" in out and "broken.json" in out


def test_good_density_file_passes(tmp_path):
    from entclt.density_io import save_density
    from entclt.distributions import DistributionSpec as D, make_density

    save_density(make_density(D.generalized_gaussian(3), 1024), tmp_path / "q3.json")
    cfg = _cfg(tmp_path, checks=["io"], density_files=["q3.json"])
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0


def test_bad_n_points_flag(tmp_path, capsys):
    assert main(["verify", "--n-points", "1000", "--out", str(tmp_path)]) == 2


def test_unknown_check_selection(tmp_path):
    cfg = _cfg(tmp_path, checks=["nope"])
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_jobs_do_not_change_reports(tmp_path):
    cfg = _cfg(tmp_path, checks=["poincare", "transport"])
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "b"), "--jobs", "3"]) == 0
    for name in ("verify.csv", "verify.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, families=[{"family": "gaussian"}])
    res = subprocess.run([sys.executable, "-m", "entclt", "poincare", "--config", cfg, "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "PASS" in res.stdout
