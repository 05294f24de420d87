"""Savings, benefit ratios, equity gap and social benefit of a toll regime."""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import NO_TOLL, SO, TE1, TE2, TollRegime, closed_form_costs
from .model import Scenario

# a group paying less than this in tolls has no meaningful benefit ratio
REVENUE_EPS = 1e-12


def _require_tolled(x: TollRegime) -> None:
    if not x.tolled:
        raise ValueError("equity measures compare a tolled regime against no-toll")


def savings(s: Scenario, x: TollRegime) -> tuple[float, float]:
    """Per-group drop in schedule-delay plus queueing cost relative to no toll."""
    _require_tolled(x)
    base, c = closed_form_costs(s, NO_TOLL), closed_form_costs(s, x)
    return tuple(base.sdc[k] + base.ttc[k] - c.sdc[k] - c.ttc[k] for k in range(2))


def tolls_paid(s: Scenario, x: TollRegime) -> tuple[float, float]:
    return closed_form_costs(s, x).trc


def benefit_ratio(s: Scenario, x: TollRegime) -> tuple[float | None, float | None]:
    """Savings per unit of toll paid; None for a group that pays no toll."""
    sv, paid = savings(s, x), tolls_paid(s, x)
    return tuple(sv[k] / paid[k] if paid[k] > REVENUE_EPS * max(1.0, abs(sv[k])) else None for k in range(2))


def equity_gap(s: Scenario, x: TollRegime) -> float | None:
    y = benefit_ratio(s, x)
    if any(v is None for v in y):
        return None
    return max(y) - min(y)


def social_benefit(s: Scenario, x: TollRegime) -> float:
    return sum(savings(s, x)) + sum(tolls_paid(s, x))


@dataclass(frozen=True)
class RegimeEquity:
    regime: TollRegime
    savings: tuple[float, float]
    tolls: tuple[float, float]
    y: tuple[float | None, float | None]
    equity_gap: float | None
    social_benefit: float


@dataclass(frozen=True)
class EquityReport:
    scenario: Scenario
    rows: tuple[RegimeEquity, ...]

    def __getitem__(self, name: str) -> RegimeEquity:
        for row in self.rows:
            if row.regime.name == name:
                return row
        raise KeyError(name)


def regime_equity(s: Scenario, x: TollRegime) -> RegimeEquity:
    sv, paid = savings(s, x), tolls_paid(s, x)
    y = benefit_ratio(s, x)
    gap = None if None in y else max(y) - min(y)
    return RegimeEquity(x, sv, paid, y, gap, sum(sv) + sum(paid))


def equity_report(s: Scenario, regimes: tuple[TollRegime, ...] = (SO, TE1, TE2)) -> EquityReport:
    return EquityReport(s, tuple(regime_equity(s, x) for x in regimes))
