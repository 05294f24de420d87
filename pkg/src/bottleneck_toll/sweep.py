"""One-at-a-time sensitivity of benefit ratios, equity gap and social benefit."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analytic import SO, TE1, TE2, TollRegime
from .equity import RegimeEquity, regime_equity
from .model import Scenario, ScenarioError, scenario_from_dict, sensitivity_base
from .tables import write_csv

VARIABLES = ("D", "eta", "f2", "beta_ratio", "flex_ratio")
HEADER = ("variable", "value", "regime", "y1", "y2", "equity_gap", "social_benefit")

DEFAULT_GRIDS = {
    "D": np.linspace(2.0, 20.0, 25),
    "eta": np.linspace(1.5, 10.0, 25),
    "f2": np.linspace(0.02, 0.98, 25),
    "beta_ratio": np.linspace(1.0, 4.0, 26)[1:],
    "flex_ratio": np.linspace(1.0, 4.0, 26)[1:],
}


def beta_ratio(s: Scenario) -> float:
    return s.group1.beta / s.group2.beta


def flex_ratio(s: Scenario) -> float:
    """(alpha1/beta1) / (alpha2/beta2); above 1 when group 1 is the more flexible."""
    return s.group2.flexibility / s.group1.flexibility


def mutate_scenario(base: Scenario, variable: str, value: float) -> Scenario:
    """Change one quantity, keeping group 2 and the total count fixed.

    ``beta_ratio`` moves beta1 (and gamma1) while alpha1 follows to keep the
    flexibility ratio; ``flex_ratio`` moves alpha1 alone.
    """
    value = float(value)
    g1, g2 = base.groups
    if variable == "D":
        return base.replace(discharge=value)
    if variable == "eta":
        if not value > 1:
            raise ScenarioError("gamma>beta", f"eta must exceed 1, got {value}")
        return base.replace(group1=g1.replace(gamma=value * g1.beta), group2=g2.replace(gamma=value * g2.beta))
    if variable == "f2":
        if not 0 < value < 1:
            raise ScenarioError("count", f"f2 must lie strictly between 0 and 1, got {value}")
        n = base.total
        return base.replace(group1=g1.replace(count=(1 - value) * n), group2=g2.replace(count=value * n))
    if variable == "beta_ratio":
        if not value > 1:
            raise ScenarioError("beta_ratio>1", f"beta1/beta2 must exceed 1, got {value}")
        b1 = value * g2.beta
        a1 = b1 * flex_ratio(base) / g2.flexibility
        return base.replace(group1=g1.replace(alpha=a1, beta=b1, gamma=base.eta * b1))
    if variable == "flex_ratio":
        if not value > 1:
            raise ScenarioError("flex_ratio>1", f"flexibility ratio must exceed 1, got {value}")
        return base.replace(group1=g1.replace(alpha=g1.beta * value / g2.flexibility))
    raise ScenarioError("variable", f"unknown sweep variable {variable!r}; expected one of {', '.join(VARIABLES)}")


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    variable: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.variable not in VARIABLES:
            raise ScenarioError("variable", f"unknown sweep variable {self.variable!r}")

    @classmethod
    def default(cls, variable: str, base: Scenario | None = None) -> "SweepSpec":
        base = sensitivity_base() if base is None else base
        return cls(base, variable, tuple(float(v) for v in DEFAULT_GRIDS[variable]))


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    results: tuple[RegimeEquity, ...] = ()
    skipped: str | None = None

    def __getitem__(self, regime: str) -> RegimeEquity:
        for r in self.results:
            if r.regime.name == regime:
                return r
        raise KeyError(regime)


def run_sweep(spec: SweepSpec, regimes: Sequence[TollRegime] = (SO, TE1, TE2)) -> list[SweepRow]:
    rows = []
    for v in spec.values:
        try:
            s = mutate_scenario(spec.base, spec.variable, v)
        except ScenarioError as exc:
            rows.append(SweepRow(spec.variable, float(v), skipped=exc.constraint))
            continue
        rows.append(SweepRow(spec.variable, float(v), tuple(regime_equity(s, x) for x in regimes)))
    return rows


def sweep_table(rows: Sequence[SweepRow]):
    for row in rows:
        if row.skipped is not None:
            yield (row.variable, row.value, f"skipped:{row.skipped}", None, None, None, None)
            continue
        for r in row.results:
            yield (row.variable, row.value, r.regime.name, r.y[0], r.y[1], r.equity_gap, r.social_benefit)


def write_sweep_csv(path: str | Path, rows: Sequence[SweepRow]) -> Path:
    return write_csv(path, HEADER, sweep_table(rows))


def load_sweep_specs(path: str | Path, default_base: Scenario | None = None) -> list[SweepSpec]:
    """Read sweep definitions from JSON.

    The document is one sweep ``{"variable", "values"?, "base"?}`` or
    ``{"sweeps": [...]}``. Missing values mean the default grid; a missing
    base means ``default_base`` or the sensitivity reference point.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError("json", f"{path} is not valid JSON ({exc.msg})") from exc
    except OSError as exc:
        raise ScenarioError("io", f"cannot read {path} ({exc.strerror})") from exc
    items = doc.get("sweeps", [doc]) if isinstance(doc, dict) else None
    if not isinstance(items, list):
        raise ScenarioError("schema", "sweep spec must be an object")
    specs = []
    for item in items:
        if not isinstance(item, dict) or "variable" not in item:
            raise ScenarioError("schema", "each sweep needs a 'variable'")
        base = scenario_from_dict(item["base"]) if "base" in item else default_base or sensitivity_base()
        var = item["variable"]
        if var not in VARIABLES:
            raise ScenarioError("variable", f"unknown sweep variable {var!r}")
        if "values" in item:
            try:
                values = tuple(float(v) for v in item["values"])
            except (TypeError, ValueError) as exc:
                raise ScenarioError("schema", f"sweep values must be numbers ({exc})") from exc
        else:
            values = tuple(float(v) for v in DEFAULT_GRIDS[var])
        specs.append(SweepSpec(base, var, values))
    return specs
