import numpy as np
import pytest

from bottleneck_toll.analytic import SO, TE1, TE2
from bottleneck_toll.equity import regime_equity
from bottleneck_toll.model import ScenarioError, base_case, sensitivity_base
from bottleneck_toll.sweep import (
    DEFAULT_GRIDS,
    SweepSpec,
    beta_ratio,
    flex_ratio,
    load_sweep_specs,
    mutate_scenario,
    run_sweep,
    write_sweep_csv,
)
from bottleneck_toll.tables import read_csv

REGIMES = ("so", "te1", "te2")


def column(rows, regime, field):
    return np.array([getattr(r[regime], field) for r in rows])


def test_sensitivity_base_ratios():
    s = sensitivity_base()
    assert (s.discharge, s.eta, s.f2) == (6.0, 4.0, 0.5)
    assert beta_ratio(s) == pytest.approx(1.5)
    assert flex_ratio(s) == pytest.approx(4 / 3)


def test_mutations():
    b = sensitivity_base()
    s = mutate_scenario(b, "f2", 0.25)
    assert (s.group1.count, s.group2.count) == (45.0, 15.0)
    assert s.group1.alpha == b.group1.alpha and s.group2.beta == b.group2.beta
    s = mutate_scenario(base_case(), "eta", 2.0)
    assert (s.group1.gamma, s.group2.gamma) == (16.0, 12.0)
    s = mutate_scenario(b, "beta_ratio", 2.0)
    assert (s.group1.beta, s.group1.alpha, s.group1.gamma) == pytest.approx((12.0, 32.0, 48.0))
    assert flex_ratio(s) == pytest.approx(4 / 3)
    s = mutate_scenario(b, "flex_ratio", 2.0)
    assert flex_ratio(s) == pytest.approx(2.0) and s.group1.beta == b.group1.beta
    assert mutate_scenario(b, "D", 12.0).discharge == 12.0
    assert mutate_scenario(b, "D", 12.0).group2 == b.group2


@pytest.mark.parametrize(
    "variable, value, constraint",
    [
        ("beta_ratio", 0.8, "beta_ratio>1"),
        ("flex_ratio", 1.0, "flex_ratio>1"),
        ("eta", 0.9, "gamma>beta"),
        ("f2", 1.0, "count"),
        ("D", -1.0, "discharge"),
        ("speed", 1.0, "variable"),
    ],
)
def test_invalid_mutations_name_the_constraint(variable, value, constraint):
    with pytest.raises(ScenarioError) as err:
        mutate_scenario(sensitivity_base(), variable, value)
    assert err.value.constraint == constraint


def test_rows_keep_input_order_and_record_skips():
    rows = run_sweep(SweepSpec(sensitivity_base(), "f2", (0.7, 1.5, 0.2)))
    assert [r.value for r in rows] == [0.7, 1.5, 0.2]
    assert rows[1].skipped == "count" and not rows[1].results
    assert rows[0].skipped is None


def test_rows_match_standalone_evaluation():
    spec = SweepSpec.default("beta_ratio")
    for row in run_sweep(spec)[::6]:
        s = mutate_scenario(spec.base, spec.variable, row.value)
        for x in (SO, TE1, TE2):
            assert row[x.name] == regime_equity(s, x)


def test_d_sweep_small_grid():
    rows = run_sweep(SweepSpec(sensitivity_base(), "D", (3.0, 6.0, 12.0)))
    g = column(rows, "so", "equity_gap")
    assert np.ptp(g) <= 1e-12 * abs(g[0])


def test_eta_sweep_small_grid():
    rows = run_sweep(SweepSpec(sensitivity_base(), "eta", (2.0, 4.0, 8.0)))
    for regime in REGIMES:
        assert np.all(np.diff(column(rows, regime, "social_benefit")) > 0)


def test_f2_sweep_towards_zero():
    rows = run_sweep(SweepSpec(sensitivity_base(), "f2", (0.4, 0.3, 0.2, 0.1)))
    y2 = np.array([r["so"].y[1] for r in rows])
    assert np.all(np.diff(y2) < 0)


def test_flex_ratio_sweep_shapes():
    rows = run_sweep(SweepSpec.default("flex_ratio"))
    for regime in REGIMES:
        assert np.all(np.diff(column(rows, regime, "equity_gap")) >= -1e-12)
        assert np.all(np.diff(column(rows, regime, "social_benefit")) <= 1e-9)


def test_beta_ratio_sweep_so_rises_fastest():
    rows = run_sweep(SweepSpec.default("beta_ratio"))
    rise = {x: np.diff(column(rows, x, "social_benefit")) for x in REGIMES}
    for x in REGIMES:
        assert np.all(rise[x] > 0)
    assert np.all(rise["so"] >= rise["te2"] - 1e-9) and np.all(rise["so"] >= rise["te1"] - 1e-9)


def test_default_grids():
    for v, grid in DEFAULT_GRIDS.items():
        assert len(grid) == 25
    assert DEFAULT_GRIDS["beta_ratio"][0] > 1 and DEFAULT_GRIDS["beta_ratio"][-1] == 4.0


def test_csv_round_trip(tmp_path):
    rows = run_sweep(SweepSpec(sensitivity_base(), "f2", (0.3, 1.2)))
    path = write_sweep_csv(tmp_path / "s.csv", rows)
    got = read_csv(path)
    assert list(got[0]) == ["variable", "value", "regime", "y1", "y2", "equity_gap", "social_benefit"]
    assert len(got) == 4
    assert got[-1]["regime"] == "skipped:count"
    assert float(got[0]["y2"]) == pytest.approx(rows[0]["so"].y[1], rel=1e-11)


def test_empty_values_give_header_only(tmp_path):
    path = write_sweep_csv(tmp_path / "e.csv", run_sweep(SweepSpec(sensitivity_base(), "D", ())))
    assert path.read_text() == "variable,value,regime,y1,y2,equity_gap,social_benefit\n"


def test_spec_files(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text('{"sweeps": [{"variable": "D", "values": [3, 6]}, {"variable": "eta"}]}')
    specs = load_sweep_specs(p)
    assert specs[0].values == (3.0, 6.0) and specs[0].base == sensitivity_base()
    assert len(specs[1].values) == 25
    p.write_text('{"variable": "speed"}')
    with pytest.raises(ScenarioError):
        load_sweep_specs(p)
