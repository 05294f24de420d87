import json

import numpy as np
import pytest

from bottleneck_toll.cli import main
from bottleneck_toll.model import base_case
from bottleneck_toll.tables import fmt, read_csv


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "base.json"
    p.write_text(json.dumps(base_case().to_dict()))
    return p


def test_fmt():
    assert fmt(1.2) == "1.2"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(1560.0) == "1560"
    assert fmt(None) == "" and fmt(0.0) == "0" and fmt(-0.0) == "0"


def test_analyze(tmp_path, scenario_file):
    out = tmp_path / "o"
    assert main(["analyze", "--scenario", str(scenario_file), "--out", str(out)]) == 0
    eq = {r["regime"]: r for r in read_csv(out / "equity.csv")}
    assert float(eq["so"]["y1"]) == 1.2
    assert float(eq["so"]["y2"]) == pytest.approx(1 / 3, rel=1e-11)
    costs = read_csv(out / "costs.csv")
    te2 = next(r for r in costs if r["regime"] == "te2" and r["group"] == "total")
    assert float(te2["TRC"]) == 1560.0


def test_outputs_are_byte_identical(tmp_path, scenario_file):
    for name in ("a", "b"):
        main(["analyze", "--scenario", str(scenario_file), "--out", str(tmp_path / name)])
        main(["tolls", "--scenario", str(scenario_file), "--out", str(tmp_path / name)])
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_invalid_inputs_exit_one_without_output(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["analyze", "--scenario", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert not (tmp_path / "x").exists()
    doc = base_case().to_dict()
    doc["groups"][0]["alpha"] = 5.0
    bad.write_text(json.dumps(doc))
    assert main(["analyze", "--scenario", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert "alpha>beta" in capsys.readouterr().err
    assert main(["tolls", "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit) as err:
        main(["analyze", "--regime", "rebate"])
    assert err.value.code == 1


def test_pbar_validation(tmp_path, scenario_file):
    assert main(["tolls", "--scenario", str(scenario_file), "--out", str(tmp_path), "--pbar", "0.5"]) == 1


def test_tolls(tmp_path, scenario_file):
    assert main(["tolls", "--scenario", str(scenario_file), "--out", str(tmp_path)]) == 0
    so = read_csv(tmp_path / "schedule_so_1.csv")
    bp = [(float(r["time"]), float(r["toll"])) for r in so if r["kind"] == "breakpoint"]
    assert bp == [(-8, 0), (-4, 24), (0, 56), (1, 24), (2, 0)]
    assert sum(r["kind"] == "sample" for r in so) == 1000
    te2 = read_csv(tmp_path / "schedule_te2_2.csv")
    assert max(float(r["toll"]) for r in te2) == 48.0
    for f in tmp_path.glob("schedule_*.csv"):
        rows = read_csv(f)
        times = [float(r["time"]) for r in rows]
        assert times == sorted(times)
        assert float(rows[0]["toll"]) == 0.0 and float(rows[-1]["toll"]) == 0.0
        assert times[0] == -9.0 and times[-1] == 3.0


def test_tolls_single_regime(tmp_path, scenario_file):
    main(["tolls", "--scenario", str(scenario_file), "--out", str(tmp_path), "--regime", "te2", "--pbar", "2"])
    assert sorted(f.name for f in tmp_path.glob("*.csv")) == ["schedule_te2_1.csv", "schedule_te2_2.csv"]
    te2 = read_csv(tmp_path / "schedule_te2_1.csv")
    assert dict((float(r["time"]), float(r["toll"])) for r in te2 if r["kind"] == "breakpoint")[0.0] == 96.0


def test_verify(tmp_path, scenario_file):
    assert main(["verify", "--scenario", str(scenario_file), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["passed"]
    checks = {c["name"]: c for c in doc["checks"]}
    so, te2 = checks["revenue_neutrality"]["measured"]
    assert abs(so - te2) < 0.01 * so
    for k in (1, 2):
        assert checks[f"te1:early_fraction_{k}"]["measured"] == pytest.approx(0.8, abs=0.02)


def test_verify_negative_control(tmp_path, scenario_file):
    code = main(["verify", "--scenario", str(scenario_file), "--out", str(tmp_path), "--regime", "te1",
                 "--corrupt-profile"])
    assert code == 2
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert not {c["name"]: c for c in doc["checks"]}["te1:equilibrium_gap"]["passed"]


def test_verify_with_dynamics(tmp_path, scenario_file):
    code = main(["verify", "--scenario", str(scenario_file), "--out", str(tmp_path), "--regime", "no-toll",
                 "--dt", "0.01", "--dynamics", "--step-fraction", "0.2", "--tol", "0.005"])
    assert code == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert {c["name"] for c in doc["checks"]} >= {"no-toll:dynamics_converged", "no-toll:dynamics_early_fraction_1"}


def test_sweep(tmp_path, scenario_file):
    spec = tmp_path / "d.json"
    spec.write_text('{"variable": "D", "values": [3, 6, 12]}')
    assert main(["sweep", "--sweep-spec", str(spec), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep_D.csv")
    assert len(rows) == 9
    gaps = [float(r["equity_gap"]) for r in rows if r["regime"] == "so"]
    assert np.ptp(gaps) == 0.0
    spec.write_text('{"variable": "D", "values": []}')
    main(["sweep", "--sweep-spec", str(spec), "--out", str(tmp_path / "e")])
    assert (tmp_path / "e" / "sweep_D.csv").read_text().count("\n") == 1


def test_sweep_f2_monotone_column(tmp_path):
    spec = tmp_path / "f.json"
    spec.write_text('{"variable": "f2", "values": [0.4, 0.3, 0.2, 0.1]}')
    main(["sweep", "--sweep-spec", str(spec), "--out", str(tmp_path), "--regime", "so"])
    y2 = [float(r["y2"]) for r in read_csv(tmp_path / "sweep_f2.csv")]
    assert all(a > b for a, b in zip(y2, y2[1:]))
