import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bottleneck_toll.model import (
    CaseLabel,
    Scenario,
    ScenarioError,
    TravelerGroup,
    base_case,
    classify_case,
    load_scenario,
    scenario_from_dict,
    validate_scenario,
)
from conftest import scenarios

G_FLEX = TravelerGroup(24.0, 8.0, 32.0, 30.0)
G_RIGID = TravelerGroup(12.0, 6.0, 24.0, 30.0)


def test_base_case_values():
    s = validate_scenario([G_FLEX, G_RIGID], 6.0, 0.0)
    assert s.eta == 4.0
    assert s.f2 == 0.5
    assert s.group1 == G_FLEX
    assert s.total == 60.0
    assert s.early_share == pytest.approx(0.8)


def test_swapped_input_order_is_relabelled():
    assert validate_scenario([G_RIGID, G_FLEX], 6.0) == validate_scenario([G_FLEX, G_RIGID], 6.0)


def test_alpha_below_beta_rejected():
    with pytest.raises(ScenarioError) as err:
        validate_scenario([TravelerGroup(5.0, 8.0, 32.0, 10.0), G_RIGID], 6.0)
    assert err.value.constraint == "alpha>beta"


@pytest.mark.parametrize(
    "groups, discharge, constraint",
    [
        ([TravelerGroup(24.0, 8.0, 30.0, 30.0), G_RIGID], 6.0, "equal-eta"),
        ([G_FLEX, G_RIGID], 0.0, "discharge"),
        ([G_FLEX, G_RIGID], -1.0, "discharge"),
        ([G_FLEX.replace(count=0.0), G_RIGID], 6.0, "count"),
        ([G_FLEX.replace(count=-3.0), G_RIGID], 6.0, "count"),
        ([TravelerGroup(24.0, 8.0, 8.0, 30.0), TravelerGroup(12.0, 6.0, 6.0, 30.0)], 6.0, "gamma>beta"),
        ([G_FLEX.replace(beta=0.0, gamma=0.0), G_RIGID], 6.0, "beta>0"),
        ([G_FLEX.replace(alpha=float("nan")), G_RIGID], 6.0, "finite"),
        ([G_FLEX], 6.0, "two-groups"),
    ],
)
def test_validation_errors_name_the_constraint(groups, discharge, constraint):
    with pytest.raises(ScenarioError) as err:
        validate_scenario(groups, discharge)
    assert err.value.constraint == constraint


def test_eta_tolerance_is_tight():
    g = TravelerGroup(12.0, 6.0, 24.0 * (1 + 1e-13), 30.0)
    validate_scenario([G_FLEX, g], 6.0)
    with pytest.raises(ScenarioError):
        validate_scenario([G_FLEX, TravelerGroup(12.0, 6.0, 24.0 * (1 + 1e-10), 30.0)], 6.0)


def test_direct_construction_checks_ordering():
    with pytest.raises(ScenarioError) as err:
        Scenario(G_RIGID, G_FLEX, 6.0)
    assert err.value.constraint == "flexibility-order"


def test_empty_group_needs_opt_in():
    s = validate_scenario([G_FLEX, G_RIGID.replace(count=0.0)], 6.0, allow_empty=True)
    assert s.f2 == 0.0


@pytest.mark.parametrize(
    "g1, g2, label",
    [
        (G_FLEX, G_RIGID, CaseLabel.ORDER_REVERSED),
        (TravelerGroup(24.0, 4.0, 16.0, 30.0), TravelerGroup(12.0, 6.0, 24.0, 30.0), CaseLabel.ORDER_PRESERVED),
        (TravelerGroup(24.0, 6.0, 24.0, 30.0), TravelerGroup(12.0, 6.0, 24.0, 30.0), CaseLabel.DEGENERATE_EQUAL_BETA),
    ],
)
def test_classify_case(g1, g2, label):
    assert classify_case(validate_scenario([g1, g2], 6.0)) is label


def test_equal_flexibility_tie_orders_by_beta():
    a = TravelerGroup(16.0, 8.0, 32.0, 10.0)
    b = TravelerGroup(12.0, 6.0, 24.0, 20.0)
    s = validate_scenario([b, a], 6.0)
    assert s.group1 == a
    assert classify_case(s) is CaseLabel.ORDER_REVERSED


@given(scenarios("any"), st.booleans())
@settings(max_examples=300)
def test_validation_is_idempotent_and_keeps_groups(s, swap):
    raw = [s.group2, s.group1] if swap else [s.group1, s.group2]
    v = validate_scenario(raw, s.discharge, s.tau_star)
    assert validate_scenario(v) == v
    assert sorted(map(repr, v.groups)) == sorted(map(repr, raw))
    assert v.group1.flexibility <= v.group2.flexibility * (1 + 1e-12)


def test_json_round_trip(tmp_path):
    s = base_case()
    path = tmp_path / "s.json"
    path.write_text(json.dumps(s.to_dict()))
    assert load_scenario(path) == s


@pytest.mark.parametrize("doc", [[], {"groups": []}, {"groups": [{"alpha": 1}], "discharge": 1}, {"discharge": 6}])
def test_malformed_documents(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_bad_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ScenarioError) as err:
        load_scenario(p)
    assert err.value.constraint == "json"
