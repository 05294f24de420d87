"""Closed-form equilibria, toll schedules and cost totals for two groups.

Conventions: time origin is arbitrary (``tau_star`` is a parameter), free-flow
cost is zero, and every toll is zero outside the peak ``[t0, tf]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import PiecewiseLinearCurve, StepFunction
from .model import CaseLabel, Scenario, ScenarioError, classify_case

DEFAULT_PBAR = 1.25
REGIME_NAMES = ("no-toll", "so", "te1", "te2")


@dataclass(frozen=True)
class TransitionTimes:
    t0: float
    tA: float
    tB: float
    tf: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.t0, self.tA, self.tB, self.tf)


@dataclass(frozen=True)
class TollRegime:
    """One of ``no-toll``, ``so``, ``te1``, ``te2``; ``pbar`` only matters for te2."""

    name: str
    pbar: float = DEFAULT_PBAR

    def __post_init__(self) -> None:
        if self.name not in REGIME_NAMES:
            raise ValueError(f"unknown regime {self.name!r}; expected one of {', '.join(REGIME_NAMES)}")
        if not self.pbar >= 1.0:
            raise ScenarioError("pbar>=1", f"escalator override must be at least 1, got {self.pbar}")

    @classmethod
    def parse(cls, text: str, pbar: float = DEFAULT_PBAR) -> "TollRegime":
        key = text.strip().lower().replace("_", "-")
        key = {"none": "no-toll", "notoll": "no-toll", "no": "no-toll"}.get(key, key)
        return cls(key, pbar)

    @property
    def tolled(self) -> bool:
        return self.name != "no-toll"

    def __str__(self) -> str:
        return self.name


NO_TOLL = TollRegime("no-toll")
SO = TollRegime("so")
TE1 = TollRegime("te1")
TE2 = TollRegime("te2")


@dataclass(frozen=True)
class TollSchedule:
    """Toll as a function of departure time, one curve per group."""

    curves: tuple[PiecewiseLinearCurve, PiecewiseLinearCurve]

    @classmethod
    def uniform(cls, curve: PiecewiseLinearCurve) -> "TollSchedule":
        return cls((curve, curve))

    def __getitem__(self, k: int) -> PiecewiseLinearCurve:
        return self.curves[k]

    @property
    def is_uniform(self) -> bool:
        return self.curves[0] == self.curves[1]

    def shifted(self, amount: float, group: int | None = None) -> "TollSchedule":
        """Add a constant to one group's curve, or to both when ``group`` is None."""
        return TollSchedule(
            tuple(c + amount if group is None or k == group else c for k, c in enumerate(self.curves))
        )

    def raised_on(self, group: int, a: float, b: float, amount: float) -> "TollSchedule":
        """Add ``amount`` to one group's toll on the open window (a, b).

        The raise ramps in and out over one percent of the window so the curve
        stays continuous.
        """
        ramp = 0.01 * (b - a)
        bump = PiecewiseLinearCurve.from_points([(a, 0.0), (a + ramp, amount), (b - ramp, amount), (b, 0.0)])
        return TollSchedule(tuple(c + bump if k == group else c for k, c in enumerate(self.curves)))


@dataclass(frozen=True)
class EquilibriumProfile:
    """Departure-time equilibrium in closed form.

    ``departure_rate`` and ``arrival_rate`` are per-group step functions of
    departure and arrival time; ``queue`` is the queue length as a function of
    departure time; ``intervals`` lists each group's arrival-time windows.
    """

    times: TransitionTimes
    departure_rate: tuple[StepFunction, StepFunction]
    arrival_rate: tuple[StepFunction, StepFunction]
    queue: PiecewiseLinearCurve
    intervals: tuple[tuple[tuple[float, float], ...], tuple[tuple[float, float], ...]]
    tau_star: float
    on_time_departure: float

    def mass(self, k: int) -> float:
        return self.departure_rate[k].total

    def early_mass(self, k: int) -> float:
        return self.arrival_rate[k].integral(b=self.tau_star)

    def early_fraction(self, k: int) -> float:
        return self.early_mass(k) / self.mass(k)

    def departure_intervals(self, k: int) -> list[tuple[float, float]]:
        return self.departure_rate[k].support()


@dataclass(frozen=True)
class CostBreakdown:
    """Schedule-delay, queueing (travel-time), toll and total cost per group."""

    sdc: tuple[float, float]
    ttc: tuple[float, float]
    trc: tuple[float, float]

    @property
    def tc(self) -> tuple[float, float]:
        return tuple(a + b + c for a, b, c in zip(self.sdc, self.ttc, self.trc))

    @property
    def totals(self) -> dict[str, float]:
        return {"SDC": sum(self.sdc), "TTC": sum(self.ttc), "TRC": sum(self.trc), "TC": sum(self.tc)}

    def group(self, k: int) -> dict[str, float]:
        return {"SDC": self.sdc[k], "TTC": self.ttc[k], "TRC": self.trc[k], "TC": self.tc[k]}


# ---------------------------------------------------------------- times


def no_toll_times(s: Scenario) -> TransitionTimes:
    g1 = s.group1
    e = s.early_share
    n, n1, n2, d, ts = s.total, g1.count, s.group2.count, s.discharge, s.tau_star
    shift = g1.flexibility * e * n1 / d
    return TransitionTimes(
        t0=ts - e * n / d,
        tA=ts - e * n2 / d - shift,
        tB=ts + n2 / ((1 + s.eta) * d) - shift,
        tf=ts + n / ((1 + s.eta) * d),
    )


def _central_times(s: Scenario, central_count: float) -> TransitionTimes:
    e, d, ts = s.early_share, s.discharge, s.tau_star
    return TransitionTimes(
        t0=ts - e * s.total / d,
        tA=ts - e * central_count / d,
        tB=ts + central_count / ((1 + s.eta) * d),
        tf=ts + s.total / ((1 + s.eta) * d),
    )


def so_times(s: Scenario, case: CaseLabel | None = None) -> TransitionTimes:
    """Switch times under the system-optimal toll.

    The group travelling in the centre of the peak is group 1 when the order
    reverses and group 2 otherwise.
    """
    case = classify_case(s) if case is None else case
    central = s.group1.count if case is CaseLabel.ORDER_REVERSED else s.group2.count
    return _central_times(s, central)


def te_times(s: Scenario) -> TransitionTimes:
    return _central_times(s, s.group2.count)


# ---------------------------------------------------------------- profiles


def _zero_queue_profile(s: Scenario, times: TransitionTimes, edge_group: int | None) -> EquilibriumProfile:
    """Both groups depart at total rate D with no queue.

    ``edge_group`` travels on [t0, tA] and [tB, tf], the other in between;
    None means the groups travel together throughout, in proportion to size.
    """
    d = s.discharge
    t0, ta, tb, tf = times.as_tuple()
    if edge_group is None:
        rates = tuple(StepFunction.from_pieces([(t0, tf, d * g.count / s.total)]) for g in s.groups)
    else:
        edge = StepFunction.from_pieces([(t0, ta, d), (tb, tf, d)])
        centre = StepFunction.from_pieces([(ta, tb, d)])
        rates = (edge, centre) if edge_group == 0 else (centre, edge)
    intervals = tuple(tuple(r.support()) for r in rates)
    return EquilibriumProfile(
        times=times,
        departure_rate=rates,
        arrival_rate=rates,
        queue=PiecewiseLinearCurve.from_points([(t0, 0.0), (tf, 0.0)]),
        intervals=intervals,
        tau_star=s.tau_star,
        on_time_departure=s.tau_star,
    )


def no_toll_profile(s: Scenario) -> EquilibriumProfile:
    """Untolled equilibrium: group 1 at the edges of the peak, group 2 in the centre.

    Within a window, a group departs at the rate that keeps its cost flat:
    ``D*alpha/(alpha-beta)`` before its on-time departure and
    ``D*alpha/(alpha+gamma)`` after it.
    """
    d, e = s.discharge, s.early_share
    times = no_toll_times(s)
    g1, g2 = s.groups
    early = [d * g.alpha / (g.alpha - g.beta) for g in s.groups]
    late = [d * g.alpha / (g.alpha + g.gamma) for g in s.groups]
    # group 2's on-time traveller leaves once its early share has departed
    t_on = times.tA + e * g2.count / early[1]
    n1 = StepFunction.from_pieces([(times.t0, times.tA, early[0]), (times.tB, times.tf, late[0])])
    n2 = StepFunction.from_pieces([(times.tA, t_on, early[1]), (t_on, times.tB, late[1])])
    both = n1 + n2
    net = StepFunction(both.edges, tuple(v - d for v in both.levels))
    queue = net.cumulative(times.t0)
    # arrivals leave the bottleneck at rate D throughout the peak
    arr = te_times(s)
    a1 = StepFunction.from_pieces([(arr.t0, arr.tA, d), (arr.tB, arr.tf, d)])
    a2 = StepFunction.from_pieces([(arr.tA, arr.tB, d)])
    return EquilibriumProfile(
        times=times,
        departure_rate=(n1, n2),
        arrival_rate=(a1, a2),
        queue=queue,
        intervals=(tuple(a1.support()), tuple(a2.support())),
        tau_star=s.tau_star,
        on_time_departure=t_on,
    )


def so_profile(s: Scenario) -> EquilibriumProfile:
    case = classify_case(s)
    if case is CaseLabel.DEGENERATE_EQUAL_BETA:
        return _zero_queue_profile(s, so_times(s, case), None)
    edge = 1 if case is CaseLabel.ORDER_REVERSED else 0
    return _zero_queue_profile(s, so_times(s, case), edge)


def te_profile(s: Scenario) -> EquilibriumProfile:
    """Zero-queue profile with the untolled arrival windows."""
    return _zero_queue_profile(s, te_times(s), 0)


def profile(s: Scenario, regime: TollRegime) -> EquilibriumProfile:
    if regime.name == "no-toll":
        return no_toll_profile(s)
    if regime.name == "so":
        return so_profile(s)
    if regime.name == "te2" and classify_case(s) is not CaseLabel.ORDER_REVERSED:
        # the TE2 toll is the SO toll here, with the untolled order
        return _zero_queue_profile(s, so_times(s, CaseLabel.ORDER_PRESERVED), 0)
    return te_profile(s)


# ---------------------------------------------------------------- tolls


def _tent(times: TransitionTimes, ts: float, rise: Sequence[float], fall: Sequence[float]) -> PiecewiseLinearCurve:
    """Curve zero at t0 and tf, rising with slopes ``rise`` over [t0,tA], [tA,ts]
    and falling with slopes ``fall`` over [ts,tB], [tB,tf].

    The apex is computed from the left; the right side is computed from tf so
    both ends are exactly zero.
    """
    t0, ta, tb, tf = times.as_tuple()
    va = rise[0] * (ta - t0)
    apex = va + rise[1] * (ts - ta)
    vb = fall[1] * (tf - tb)
    return PiecewiseLinearCurve.from_points([(t0, 0.0), (ta, va), (ts, apex), (tb, vb), (tf, 0.0)])


def so_schedule(s: Scenario) -> TollSchedule:
    """Uniform queue-eliminating toll.

    It rises at the early penalty rate of whichever group is departing and
    falls at its late penalty rate.
    """
    case = classify_case(s)
    g1, g2 = s.groups
    times = so_times(s, case)
    if case is CaseLabel.ORDER_REVERSED:
        curve = _tent(times, s.tau_star, (g2.beta, g1.beta), (g1.gamma, g2.gamma))
    else:
        curve = _tent(times, s.tau_star, (g1.beta, g2.beta), (g2.gamma, g1.gamma))
    return TollSchedule.uniform(curve)


def isocost_zeta(g, cost: float, t_a: float, tau_star: float) -> float:
    """Normalised toll ``zeta`` that keeps a group's total cost at ``cost`` when arriving at ``t_a``."""
    if t_a < tau_star:
        return (cost - g.beta * (tau_star - t_a)) / g.alpha
    return (cost - g.gamma * (t_a - tau_star)) / g.alpha


def escalator(s: Scenario) -> float:
    """Ratio of the centre to edge slopes of the flexible group's TE1 toll."""
    return s.group2.flexibility / s.group1.flexibility


def zeta_curve(s: Scenario) -> PiecewiseLinearCurve:
    """Equilibrium normalised toll; equals the untolled queueing delay by arrival time."""
    g1, g2 = s.groups
    return _tent(
        te_times(s),
        s.tau_star,
        (g1.beta / g1.alpha, g2.beta / g2.alpha),
        (g2.gamma / g2.alpha, g1.gamma / g1.alpha),
    )


def te1_schedules(s: Scenario) -> TollSchedule:
    z = zeta_curve(s)
    return TollSchedule((z * s.group1.alpha, z * s.group2.alpha))


def general_flexible_toll(s: Scenario, pbar: float) -> PiecewiseLinearCurve:
    """Group-1 toll with edge slopes beta1, gamma1 and centre slopes scaled by ``pbar``."""
    g1 = s.group1
    return _tent(te_times(s), s.tau_star, (g1.beta, pbar * g1.beta), (pbar * g1.gamma, g1.gamma))


def te2_schedules(s: Scenario, pbar: float = DEFAULT_PBAR) -> TollSchedule:
    """Group-differentiated revenue-neutral tolls.

    Group 2's toll rises at beta2 and falls at gamma2 over the whole peak, so
    its cost is flat everywhere. Without order reversal the SO toll already
    keeps the untolled order and is used instead.
    """
    if not pbar >= 1.0:
        raise ScenarioError("pbar>=1", f"escalator override must be at least 1, got {pbar}")
    if classify_case(s) is not CaseLabel.ORDER_REVERSED:
        return so_schedule(s)
    times = te_times(s)
    g2 = s.group2
    c2 = PiecewiseLinearCurve.from_points(
        [(times.t0, 0.0), (s.tau_star, g2.beta * (s.tau_star - times.t0)), (times.tf, 0.0)]
    )
    return TollSchedule((general_flexible_toll(s, pbar), c2))


def no_toll_schedule(s: Scenario) -> TollSchedule:
    t = no_toll_times(s)
    return TollSchedule.uniform(PiecewiseLinearCurve.from_points([(t.t0, 0.0), (t.tf, 0.0)]))


def schedules(s: Scenario, regime: TollRegime) -> TollSchedule:
    if regime.name == "no-toll":
        return no_toll_schedule(s)
    if regime.name == "so":
        return so_schedule(s)
    if regime.name == "te1":
        return te1_schedules(s)
    return te2_schedules(s, regime.pbar)


# ---------------------------------------------------------------- cost totals


def _k(s: Scenario, beta: float) -> float:
    return beta * s.eta / (2 * (1 + s.eta)) * s.total**2 / s.discharge


def no_toll_costs(s: Scenario) -> CostBreakdown:
    g1, g2 = s.groups
    f, k1 = s.f2, _k(s, g1.beta)
    b, a = g2.beta / g1.beta, g2.alpha / g1.alpha
    return CostBreakdown(
        sdc=(k1 * (1 - f * f), k1 * b * f * f),
        ttc=(k1 * (1 - f) ** 2, k1 * f * (2 * a + (b - 2 * a) * f)),
        trc=(0.0, 0.0),
    )


def order_preserved_costs(s: Scenario) -> CostBreakdown:
    """Zero-queue costs with group 1 on the edges (requires beta1 <= beta2)."""
    if classify_case(s) is CaseLabel.ORDER_REVERSED:
        raise ScenarioError("case", "order-preserved costs need beta1 <= beta2")
    g1, g2 = s.groups
    f, k1 = s.f2, _k(s, g1.beta)
    b = g2.beta / g1.beta
    return CostBreakdown(
        sdc=(k1 * (1 - f * f), k1 * b * f * f),
        ttc=(0.0, 0.0),
        trc=(k1 * (1 - f) ** 2, k1 * f * (2 * (1 - f) + b * f)),
    )


def so_reversed_costs(s: Scenario) -> CostBreakdown:
    """SO costs when the toll puts group 1 in the centre (requires beta1 > beta2)."""
    if classify_case(s) is not CaseLabel.ORDER_REVERSED:
        raise ScenarioError("case", "reversed-order SO costs need beta1 > beta2")
    g1, g2 = s.groups
    f, k2 = s.f2, _k(s, g2.beta)
    r = g1.beta / g2.beta
    return CostBreakdown(
        sdc=(k2 * r * (1 - f) ** 2, k2 * (1 - (1 - f) ** 2)),
        ttc=(0.0, 0.0),
        trc=(k2 * (1 - f) * (2 * f + r * (1 - f)), k2 * f * f),
    )


def so_shared_costs(s: Scenario) -> CostBreakdown:
    """SO costs when beta1 == beta2 and the groups travel together."""
    if classify_case(s) is not CaseLabel.DEGENERATE_EQUAL_BETA:
        raise ScenarioError("case", "shared SO costs need beta1 == beta2")
    k = _k(s, s.group1.beta)
    shares = (1 - s.f2, s.f2)
    return CostBreakdown(sdc=tuple(k * x for x in shares), ttc=(0.0, 0.0), trc=tuple(k * x for x in shares))


def te1_costs(s: Scenario) -> CostBreakdown:
    """TE1 tolls replace the untolled queueing cost one for one."""
    nt = no_toll_costs(s)
    return CostBreakdown(sdc=nt.sdc, ttc=(0.0, 0.0), trc=nt.ttc)


def te2_costs(s: Scenario) -> CostBreakdown:
    if classify_case(s) is not CaseLabel.ORDER_REVERSED:
        raise ScenarioError("case", "TE2 cost block needs beta1 > beta2; use order_preserved_costs")
    g1, g2 = s.groups
    f = s.f2
    k1, k2 = _k(s, g1.beta), _k(s, g2.beta)
    return CostBreakdown(
        sdc=no_toll_costs(s).sdc,
        ttc=(0.0, 0.0),
        trc=(k1 * (1 - f) ** 2, k2 * (2 * f - f * f)),
    )


def closed_form_costs(s: Scenario, regime: TollRegime) -> CostBreakdown:
    case = classify_case(s)
    if regime.name == "no-toll":
        return no_toll_costs(s)
    if regime.name == "te1":
        return te1_costs(s)
    if case is CaseLabel.ORDER_REVERSED:
        return so_reversed_costs(s) if regime.name == "so" else te2_costs(s)
    if regime.name == "so" and case is CaseLabel.DEGENERATE_EQUAL_BETA:
        return so_shared_costs(s)
    return order_preserved_costs(s)


# ---------------------------------------------------------------- cost curves


@dataclass(frozen=True)
class GroupCostCurves:
    """Cost components by arrival time for one group."""

    schedule_delay: PiecewiseLinearCurve
    queueing: PiecewiseLinearCurve
    toll: PiecewiseLinearCurve
    total: PiecewiseLinearCurve
    intervals: tuple[tuple[float, float], ...]

    def experienced(self, t):
        """Total cost at arrival times inside the group's windows, NaN elsewhere."""
        t = np.asarray(t, dtype=float)
        inside = np.zeros(t.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (t >= a) & (t <= b)
        out = np.where(inside, self.total(t), np.nan)
        return float(out) if out.ndim == 0 else out


def waiting_time_by_arrival(p: EquilibriumProfile, discharge: float) -> PiecewiseLinearCurve:
    """Queueing delay q/D as a function of arrival time t + q/D."""
    pts = [(t + q / discharge, q / discharge) for t, q in p.queue.points]
    return PiecewiseLinearCurve.from_points(pts)


def cost_curves(s: Scenario, regime: TollRegime) -> tuple[GroupCostCurves, GroupCostCurves]:
    p = profile(s, regime)
    sched = schedules(s, regime)
    t0, tf = p.times.t0, p.times.tf
    wait = waiting_time_by_arrival(p, s.discharge)
    out = []
    for k, g in enumerate(s.groups):
        sd = PiecewiseLinearCurve.from_points(
            [(t0, g.beta * (s.tau_star - t0)), (s.tau_star, 0.0), (tf, g.gamma * (tf - s.tau_star))]
        )
        queue = wait * g.alpha
        # tolls are charged by departure time; they only apply where the queue is empty
        toll = sched[k] if regime.tolled else PiecewiseLinearCurve.constant(0.0, t0)
        out.append(GroupCostCurves(sd, queue, toll, sd + queue + toll, p.intervals[k]))
    return tuple(out)


def integrated_costs(s: Scenario, regime: TollRegime) -> CostBreakdown:
    """Cost totals by integrating the cost curves against arrival densities."""
    p = profile(s, regime)
    curves = cost_curves(s, regime)
    parts = [
        tuple(p.arrival_rate[k].weighted_integral(getattr(curves[k], name)) for k in range(2))
        for name in ("schedule_delay", "queueing", "toll")
    ]
    return CostBreakdown(*parts)
