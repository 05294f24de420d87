"""Traveler groups, two-group bottleneck scenarios, and tolling-case labels."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

ETA_RTOL = 1e-12


class ScenarioError(ValueError):
    """Raised when scenario parameters violate a model constraint.

    ``constraint`` names the violated rule so that callers (the CLI in
    particular) can report it without parsing the message.
    """

    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


@dataclass(frozen=True)
class TravelerGroup:
    """Cost parameters of one traveler class.

    alpha is the value of time, beta and gamma the early and late arrival
    penalty rates, and count the (continuous) number of travelers.
    """

    alpha: float
    beta: float
    gamma: float
    count: float

    @property
    def flexibility(self) -> float:
        """beta/alpha; lower means relatively more time-flexible."""
        return self.beta / self.alpha

    @property
    def eta(self) -> float:
        return self.gamma / self.beta

    def replace(self, **changes: float) -> "TravelerGroup":
        values = dict(alpha=self.alpha, beta=self.beta, gamma=self.gamma, count=self.count)
        values.update(changes)
        return TravelerGroup(**values)


class CaseLabel(Enum):
    ORDER_PRESERVED = "order-preserved"
    ORDER_REVERSED = "order-reversed"
    DEGENERATE_EQUAL_BETA = "degenerate-equal-beta"


def _check_group(g: TravelerGroup, name: str, allow_empty: bool) -> None:
    for attr in ("alpha", "beta", "gamma", "count"):
        v = getattr(g, attr)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ScenarioError("finite", f"{name}.{attr} must be a finite number, got {v!r}")
    if not g.beta > 0:
        raise ScenarioError("beta>0", f"{name}.beta must be positive, got {g.beta}")
    if not g.alpha > g.beta:
        raise ScenarioError("alpha>beta", f"{name} needs alpha > beta, got alpha={g.alpha}, beta={g.beta}")
    if not g.gamma > g.beta:
        raise ScenarioError("gamma>beta", f"{name} needs gamma > beta, got gamma={g.gamma}, beta={g.beta}")
    if g.count < 0 or (g.count == 0 and not allow_empty):
        raise ScenarioError("count", f"{name}.count must be positive, got {g.count}")


@dataclass(frozen=True)
class Scenario:
    """Two groups sharing one bottleneck, with group 1 the relatively more
    time-flexible one (``beta1/alpha1 <= beta2/alpha2``).

    Construction checks every invariant; use :func:`validate_scenario` to
    build one from groups given in arbitrary order.
    """

    group1: TravelerGroup
    group2: TravelerGroup
    discharge: float
    tau_star: float = 0.0
    allow_empty: bool = field(default=False, compare=False, repr=False)
    eta: float = field(init=False)
    f2: float = field(init=False)

    def __post_init__(self) -> None:
        _check_group(self.group1, "group1", self.allow_empty)
        _check_group(self.group2, "group2", self.allow_empty)
        for name in ("discharge", "tau_star"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ScenarioError("finite", f"{name} must be a finite number, got {v!r}")
        if not self.discharge > 0:
            raise ScenarioError("discharge", f"discharge must be positive, got {self.discharge}")
        if self.group1.count + self.group2.count <= 0:
            raise ScenarioError("count", "at least one group must hold travelers")
        e1, e2 = self.group1.eta, self.group2.eta
        if not math.isclose(e1, e2, rel_tol=ETA_RTOL, abs_tol=0.0):
            raise ScenarioError("equal-eta", f"gamma/beta must match across groups, got {e1} and {e2}")
        # cross-multiplied so that exact rational ties compare equal
        if self.group1.beta * self.group2.alpha > self.group2.beta * self.group1.alpha:
            raise ScenarioError(
                "flexibility-order", "group1 must satisfy beta1/alpha1 <= beta2/alpha2"
            )
        object.__setattr__(self, "eta", e1)
        object.__setattr__(self, "f2", self.group2.count / (self.group1.count + self.group2.count))

    @property
    def groups(self) -> tuple[TravelerGroup, TravelerGroup]:
        return (self.group1, self.group2)

    @property
    def total(self) -> float:
        return self.group1.count + self.group2.count

    @property
    def early_share(self) -> float:
        """eta/(1+eta), the share of every group that arrives early."""
        return self.eta / (1.0 + self.eta)

    def group(self, k: int) -> TravelerGroup:
        return self.groups[k]

    def replace(self, **changes: Any) -> "Scenario":
        values = dict(
            group1=self.group1,
            group2=self.group2,
            discharge=self.discharge,
            tau_star=self.tau_star,
            allow_empty=self.allow_empty,
        )
        values.update(changes)
        return Scenario(**values)

    def to_dict(self) -> dict:
        return {
            "groups": [
                {"alpha": g.alpha, "beta": g.beta, "gamma": g.gamma, "count": g.count} for g in self.groups
            ],
            "discharge": self.discharge,
            "tau_star": self.tau_star,
        }


def _order(a: TravelerGroup, b: TravelerGroup) -> tuple[TravelerGroup, TravelerGroup]:
    lhs, rhs = a.beta * b.alpha, b.beta * a.alpha
    if lhs < rhs:
        return a, b
    if lhs > rhs:
        return b, a
    # equal flexibility: larger beta first, then larger alpha, for determinism
    return (a, b) if (a.beta, a.alpha) >= (b.beta, b.alpha) else (b, a)


def validate_scenario(
    groups: Iterable[TravelerGroup] | Scenario,
    discharge: float | None = None,
    tau_star: float = 0.0,
    *,
    allow_empty: bool = False,
) -> Scenario:
    """Build a :class:`Scenario` from an unordered pair of groups.

    Groups are relabelled so that group 1 has the lower beta/alpha. Passing an
    existing Scenario revalidates it and returns an equal value.
    """
    if isinstance(groups, Scenario):
        s = groups
        return validate_scenario(s.groups, s.discharge, s.tau_star, allow_empty=allow_empty or s.allow_empty)
    pair = list(groups)
    if len(pair) != 2:
        raise ScenarioError("two-groups", f"exactly two groups are supported, got {len(pair)}")
    if discharge is None:
        raise ScenarioError("discharge", "discharge is required")
    for i, g in enumerate(pair):
        _check_group(g, f"group[{i}]", allow_empty)
    g1, g2 = _order(*pair)
    return Scenario(g1, g2, float(discharge), float(tau_star), allow_empty=allow_empty)


def classify_case(s: Scenario) -> CaseLabel:
    b1, b2 = s.group1.beta, s.group2.beta
    if b1 > b2:
        return CaseLabel.ORDER_REVERSED
    if b1 < b2:
        return CaseLabel.ORDER_PRESERVED
    return CaseLabel.DEGENERATE_EQUAL_BETA


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("schema", "scenario document must be a JSON object")
    try:
        raw = doc["groups"]
        groups = [
            TravelerGroup(
                alpha=float(g["alpha"]), beta=float(g["beta"]), gamma=float(g["gamma"]), count=float(g["count"])
            )
            for g in raw
        ]
        discharge = float(doc["discharge"])
        tau_star = float(doc.get("tau_star", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("schema", f"malformed scenario document ({exc!r})") from exc
    return validate_scenario(groups, discharge, tau_star)


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError("json", f"{path} is not valid JSON ({exc.msg})") from exc
    except OSError as exc:
        raise ScenarioError("io", f"cannot read {path} ({exc.strerror})") from exc
    return scenario_from_dict(doc)


def base_case() -> Scenario:
    """The two-group example: 30 travelers each, D=6, eta=4, tau*=0."""
    return validate_scenario(
        [TravelerGroup(24.0, 8.0, 32.0, 30.0), TravelerGroup(12.0, 6.0, 24.0, 30.0)],
        discharge=6.0,
        tau_star=0.0,
    )


def sensitivity_base() -> Scenario:
    """Reference point for one-at-a-time sweeps.

    D=6, eta=4, f2=0.5, beta1/beta2=3/2 and (alpha1/beta1)/(alpha2/beta2)=4/3,
    with group 2 and the total count taken from :func:`base_case`.
    """
    return validate_scenario(
        [TravelerGroup(24.0, 9.0, 36.0, 30.0), TravelerGroup(12.0, 6.0, 24.0, 30.0)],
        discharge=6.0,
        tau_star=0.0,
    )
