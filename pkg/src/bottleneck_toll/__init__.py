"""Toll design for a two-group bottleneck: untolled, system-optimal and time-equitable tolls."""

from .analytic import (
    NO_TOLL,
    SO,
    TE1,
    TE2,
    CostBreakdown,
    EquilibriumProfile,
    TollRegime,
    TollSchedule,
    TransitionTimes,
    closed_form_costs,
    profile,
    schedules,
)
from .curves import PiecewiseLinearCurve, StepFunction
from .equity import benefit_ratio, equity_gap, equity_report, savings, social_benefit
from .model import (
    CaseLabel,
    Scenario,
    ScenarioError,
    TravelerGroup,
    base_case,
    classify_case,
    load_scenario,
    validate_scenario,
)

__version__ = "0.1.0"
