import csv
import json
import math
import shutil
from pathlib import Path

import pytest

from rwdro import cli
from rwdro.approx import SWEEP_HEADER, RadiusComparison
from rwdro.config import load_config, parse_config
from rwdro.errors import ConfigError
from rwdro.instances import SHIPPED_CONFIG

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def cfgdir(tmp_path):
    for p in CONFIGS.iterdir():
        if p.is_file():
            shutil.copy(p, tmp_path / p.name)
    return tmp_path


def write(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_solve_two_point(cfgdir, capsys):
    assert cli.main(["solve", str(cfgdir / "two_point.json")]) == 0
    doc = cli.load_solution(cfgdir / "out/two_point/solution.json")
    assert doc["value"] == pytest.approx(0.3, abs=1e-9)
    assert doc["lambda_star"] == pytest.approx(1.0, abs=1e-6)
    assert "value=0.3" in capsys.readouterr().out


def test_solution_json_round_trip(cfgdir):
    assert cli.main(["solve", str(cfgdir / "shipped.json")]) == 0
    path = cfgdir / "out/shipped/solution.json"
    doc = cli.load_solution(path)
    cli.write_json(doc, path.with_name("copy.json"))
    assert path.with_name("copy.json").read_bytes() == path.read_bytes()
    # the embedded config reproduces the run
    again = parse_config(doc["config"], cfgdir)
    assert cli.solve(again)["value"] == doc["value"]


def test_methods_agree_on_kl(cfgdir):
    cfg = load_config(cfgdir / "shipped.json")
    ent = cli.solve(cfg)
    cfg.method, cfg.phi = "phi", "kl"
    phi = cli.solve(cfg)
    assert phi["value"] == pytest.approx(ent["value"], abs=1e-8)
    assert phi["residual"] <= 1e-10


def test_overrides(cfgdir):
    assert cli.main(["solve", str(cfgdir / "two_point.json"), "--rho", "0.5", "--output", "o2"]) == 0
    doc = json.loads((cfgdir / "o2/solution.json").read_text())
    assert doc["value"] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("args,needle", [
    (["--rho", "-1"], "rho"),
    (["--eps", "-0.1"], "reg.eps"),
    (["--sigma", "0"], "reg.sigma"),
])
def test_bad_overrides_exit_2(cfgdir, capsys, args, needle):
    assert cli.main(["solve", str(cfgdir / "shipped.json"), *args]) == 2
    assert needle in capsys.readouterr().err


@pytest.mark.parametrize("patch,needle", [
    ({"rhoo": 1}, "rhoo"),
    ({"cost": {"norm": "l2", "q": 1}}, "'q'"),
    ({"domain": {"bounds": [[1, 0]], "points_per_axis": 5}}, "domain.bounds[0]"),
    ({"method": "newton"}, "method"),
    ({"objective": {"values": [1, 2]}}, "objective"),
    ({"distribution": {"name": "dirac", "params": {"point": [3.0]}}}, "distribution"),
])
def test_config_errors_name_the_key(tmp_path, capsys, patch, needle):
    doc = dict(SHIPPED_CONFIG, **patch)
    assert cli.main(["solve", str(write(tmp_path, doc))]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert cli.main(["solve", str(tmp_path / "nope.json")]) == 2


def test_infeasible_sigma_exit_1(tmp_path, capsys):
    doc = dict(SHIPPED_CONFIG, reg={"eps": 0.01, "delta": 0.01, "sigma": 50.0})
    assert cli.main(["solve", str(write(tmp_path, doc))]) == 1
    assert "decrease sigma" in capsys.readouterr().err


def test_verify_pass_and_fail(cfgdir, monkeypatch):
    assert cli.main(["verify", str(cfgdir / "shipped.json")]) == 0
    rows = json.loads((cfgdir / "out/shipped/verify.json").read_text())
    assert {r["check"] for r in rows} == {"lagrangian", "radius", "extended_bound"}
    monkeypatch.setattr(cli, "radius_compare", lambda *a, **k: RadiusComparison(1.0, 0.0, 0.5, False))
    assert cli.main(["verify", str(cfgdir / "shipped.json")]) == 3


def test_sweep_csv(cfgdir):
    assert cli.main(["sweep", str(cfgdir / "shipped.json"), "--eps", "0.1", "0.01"]) == 0
    rows = list(csv.reader((cfgdir / "out/shipped/sweep.csv").open()))
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 3
    gaps = [float(r[SWEEP_HEADER.index("gap")]) for r in rows[1:]]
    assert gaps[0] > gaps[1] >= 0


def test_sweep_csv_header_only_and_single_row(cfgdir):
    cfg = load_config(cfgdir / "shipped.json")
    cfg.sweep = {"eps": [], "delta": []}
    path = cli.emit_report(cli.run_sweep(cfg), cfgdir / "empty.csv")
    assert path.read_text() == ",".join(SWEEP_HEADER) + "\n"
    cfg.sweep = {"eps": [0.05], "delta": [0.0]}
    path = cli.emit_report(cli.run_sweep(cfg), cfgdir / "one.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    # 17 significant digits reproduce the float exactly
    rep = cli.run_sweep(cfg)
    assert float(lines[1].split(",")[SWEEP_HEADER.index("value_entropic")]) == rep.rows[0].value_entropic


def test_oracle(cfgdir):
    assert cli.main(["oracle", str(cfgdir / "shipped.json")]) == 0
    doc = json.loads((cfgdir / "out/shipped/oracle.json").read_text())
    assert abs(doc["strong_duality_gap"]) <= 1e-6
    assert abs(doc["sinkhorn_primal"] - doc["sinkhorn_dual"]) <= 1e-5
    assert doc["sinkhorn_marginal_error"] <= 1e-9


def test_empirical_csv_config(cfgdir):
    assert cli.main(["solve", str(cfgdir / "empirical_2d.json")]) == 0
    doc = json.loads((cfgdir / "out/empirical_2d/solution.json").read_text())
    assert abs(doc["gap"]) <= 1e-6 * (1 + abs(doc["value"]))


def test_gen_instance_then_solve(tmp_path):
    out = tmp_path / "inst.json"
    assert cli.main(["gen-instance", "--seed", "3", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert cli.main(["gen-instance", "--seed", "3", "--out", str(out)]) == 0
    assert out.read_bytes() == first
    assert cli.main(["solve", str(out), "--method", "cost-reg"]) == 0


def test_validate_solution_rejects():
    good = {"lambda_star": 1.0, "lambda_bound": 2.0, "value": 0.5, "gap": None}
    cli.validate_solution(dict(good))
    with pytest.raises(ValueError):
        cli.validate_solution(dict(good, lambda_star=3.0))
    with pytest.raises(ValueError):
        cli.validate_solution(dict(good, value=None))
    with pytest.raises(ValueError):
        cli.validate_solution(dict(good, slack=-1e-3))


def test_nan_written_as_null(tmp_path):
    cli.write_json({"a": math.nan, "b": [1.5, math.inf]}, tmp_path / "x.json")
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": None, "b": [1.5, None]}


def test_parse_config_requires_fields():
    with pytest.raises(ConfigError, match="rho: missing"):
        parse_config({k: v for k, v in SHIPPED_CONFIG.items() if k != "rho"})
