"""Discrete-time check of the closed forms.

Departures are binned with width ``dt``. Bin ``i`` covers
``[edges[i], edges[i+1]]`` and all of its mass is treated as leaving at the
right edge, behind the queue left at that instant. The queue follows the
point-queue recursion ``q[i+1] = max(0, q[i] + m[i] - D*dt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    EquilibriumProfile,
    TollRegime,
    TollSchedule,
    no_toll_times,
    profile as analytic_profile,
    schedules,
)
from .model import Scenario

MASS_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class DiscreteProfile:
    """Binned departures for both groups, with the queue at every bin edge."""

    t_min: float
    dt: float
    mass: tuple[np.ndarray, np.ndarray]
    queue: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.mass[0])

    @property
    def edges(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.n_bins + 1)

    @property
    def t_max(self) -> float:
        return self.t_min + self.dt * self.n_bins

    @property
    def times(self) -> np.ndarray:
        """Representative departure time of each bin (its right edge)."""
        return self.edges[1:]

    def total_mass(self, k: int) -> float:
        return float(self.mass[k].sum())

    def with_mass(self, mass, discharge: float) -> "DiscreteProfile":
        m = tuple(np.asarray(x, dtype=float) for x in mass)
        return DiscreteProfile(self.t_min, self.dt, m, _queue(m[0] + m[1], discharge, self.dt))

    def to_rows(self):
        """(bin_time, group1_mass, group2_mass, queue) per bin."""
        return zip(self.times, self.mass[0], self.mass[1], self.queue[1:])


@dataclass(frozen=True)
class Grid:
    t_min: float
    dt: float
    n_bins: int

    @property
    def edges(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.n_bins + 1)

    def empty(self, discharge: float) -> DiscreteProfile:
        z = np.zeros(self.n_bins)
        return DiscreteProfile(self.t_min, self.dt, (z, z.copy()), np.zeros(self.n_bins + 1))


def make_grid(s: Scenario, dt: float, pad: float | None = None) -> Grid:
    """Grid over tau* +- N/D plus padding, with the untolled first departure on an edge."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = s.total / s.discharge
    pad = 0.1 * span if pad is None else pad
    t0 = no_toll_times(s).t0
    lo, hi = s.tau_star - span - pad, s.tau_star + span + pad
    t_min = t0 - math.ceil((t0 - lo) / dt - 1e-9) * dt
    return Grid(t_min, dt, int(math.ceil((hi - t_min) / dt - 1e-9)))


def _queue(total: np.ndarray, discharge: float, dt: float) -> np.ndarray:
    s = np.concatenate([[0.0], np.cumsum(total - discharge * dt)])
    return s - np.minimum.accumulate(np.minimum(s, 0.0))


def discretize(p: EquilibriumProfile, s: Scenario, dt: float, grid: Grid | None = None) -> DiscreteProfile:
    """Bin a closed-form profile by integrating its departure rates exactly over each bin."""
    grid = make_grid(s, dt) if grid is None else grid
    e = grid.edges
    mass = []
    for rate in p.departure_rate:
        cum = np.array([rate.integral(b=x) for x in e])
        mass.append(np.maximum(np.diff(cum), 0.0))
    return grid.empty(s.discharge).with_mass(mass, s.discharge)


def simulate_queue(p: DiscreteProfile, discharge: float) -> tuple[np.ndarray, np.ndarray]:
    """Queue at every bin edge and the arrival time of each bin's departures."""
    if not p.dt > 0:
        raise ValueError("dt must be positive")
    q = _queue(p.mass[0] + p.mass[1], discharge, p.dt)
    return q, p.times + q[1:] / discharge


def _schedule_delay(g, tau: np.ndarray, tau_star: float) -> np.ndarray:
    return np.where(tau < tau_star, g.beta * (tau_star - tau), g.gamma * (tau - tau_star))


def experienced_cost(p: DiscreteProfile, toll: TollSchedule, k: int, s: Scenario) -> np.ndarray:
    """Cost of a group-``k`` traveller leaving in each bin, whether or not it is occupied."""
    g = s.group(k)
    q, tau = simulate_queue(p, s.discharge)
    return g.alpha * q[1:] / s.discharge + _schedule_delay(g, tau, s.tau_star) + toll[k](p.times)


@dataclass(frozen=True)
class EquilibriumDiagnostics:
    """How far a binned profile is from equal, minimal cost within each group.

    ``undercut`` is the relative amount by which the cheapest unoccupied bin
    beats the cheapest occupied one (zero or negative when none does).
    """

    min_cost: tuple[float, float]
    max_cost: tuple[float, float]
    gap: tuple[float, float]
    undercut: tuple[float, float]
    early_fraction: tuple[float, float]

    @property
    def global_gap(self) -> float:
        return max(self.gap)

    @property
    def max_undercut(self) -> float:
        return max(self.undercut)

    def ok(self, tol: float) -> bool:
        return self.global_gap < tol and self.max_undercut < tol

    def to_dict(self) -> dict:
        return {
            "min_cost": list(self.min_cost),
            "max_cost": list(self.max_cost),
            "gap": list(self.gap),
            "global_gap": self.global_gap,
            "undercut": list(self.undercut),
            "early_fraction": list(self.early_fraction),
        }


def occupied(p: DiscreteProfile, k: int, count: float) -> np.ndarray:
    return p.mass[k] > MASS_EPS * count


def equilibrium_gap(p: DiscreteProfile, toll: TollSchedule, s: Scenario) -> EquilibriumDiagnostics:
    _, tau = simulate_queue(p, s.discharge)
    lo, hi, gap, under, early = [], [], [], [], []
    for k, g in enumerate(s.groups):
        c = experienced_cost(p, toll, k, s)
        occ = occupied(p, k, g.count)
        if not occ.any():
            lo.append(math.nan), hi.append(math.nan), gap.append(0.0), under.append(0.0), early.append(math.nan)
            continue
        cmin, cmax = float(c[occ].min()), float(c[occ].max())
        scale = max(1.0, abs(cmin))
        free = c[~occ]
        lo.append(cmin)
        hi.append(cmax)
        gap.append((cmax - cmin) / scale)
        under.append(float((cmin - free.min()) / scale) if free.size else 0.0)
        early.append(float(p.mass[k][tau < s.tau_star].sum() / p.mass[k].sum()))
    return EquilibriumDiagnostics(tuple(lo), tuple(hi), tuple(gap), tuple(under), tuple(early))


def occupied_intervals(p: DiscreteProfile, k: int, count: float, max_hole: int = 2) -> list[tuple[float, float]]:
    """Departure-time windows covered by occupied bins.

    Runs of occupied bins separated by at most ``max_hole`` empty bins are
    merged.
    """
    idx = np.flatnonzero(occupied(p, k, count))
    if idx.size == 0:
        return []
    e = p.edges
    cuts = np.flatnonzero(np.diff(idx) > max_hole + 1)
    starts = np.concatenate([[idx[0]], idx[cuts + 1]])
    ends = np.concatenate([idx[cuts], [idx[-1]]])
    return [(float(e[a]), float(e[b + 1])) for a, b in zip(starts, ends)]


def arrival_intervals(p: DiscreteProfile, k: int, count: float, discharge: float, max_hole: int = 2):
    """Like :func:`occupied_intervals` but in arrival time."""
    q, _ = simulate_queue(p, discharge)
    arrive = p.edges + q / discharge
    out = []
    for a, b in occupied_intervals(p, k, count, max_hole):
        i, j = int(round((a - p.t_min) / p.dt)), int(round((b - p.t_min) / p.dt))
        out.append((float(arrive[i]), float(arrive[j])))
    return out


# ---------------------------------------------------------------- best response


def _fill(p_times, dt, g, k_toll, cost, other, s: Scenario) -> np.ndarray:
    """Group mass per bin that brings every bin's cost up to ``cost``.

    Each bin is topped up to the queue at which the group's cost equals
    ``cost``, given the other group's departures ``other``.
    """
    d, ts = s.discharge, s.tau_star
    base = cost - k_toll
    early = d * (base - g.beta * (ts - p_times)) / (g.alpha - g.beta)
    late = d * (base - g.gamma * (p_times - ts)) / (g.alpha + g.gamma)
    target = np.maximum(np.where((p_times < ts) & (base <= g.alpha * (ts - p_times)), early, late), 0.0)
    y = other - d * dt
    acc = np.cumsum(y)
    lift = np.maximum(np.maximum.accumulate(target - acc), 0.0)
    q = np.concatenate([[0.0], acc + lift])
    before = q[:-1] + y
    return np.where(target > 0, np.maximum(0.0, target - before), 0.0)


def best_response(p: DiscreteProfile, k: int, toll: TollSchedule, s: Scenario, iters: int = 60) -> np.ndarray:
    """Cheapest redistribution of group ``k`` holding the other group fixed.

    Bisects on the common cost level. Bins with an empty queue absorb a
    finite amount of mass at exactly that level, so the total is
    interpolated between the two bracketing fills.
    """
    g, t = s.group(k), p.times
    other = p.mass[1 - k]
    k_toll = toll[k](t)
    fill = lambda c: _fill(t, p.dt, g, k_toll, c, other, s)  # noqa: E731
    floor = float(np.min(k_toll + _schedule_delay(g, t, s.tau_star)))
    lo, hi = floor - 1.0, max(floor, 0.0) + 1.0
    while fill(hi).sum() < g.count:
        hi = lo + 2.0 * (hi - lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fill(mid).sum() < g.count:
            lo = mid
        else:
            hi = mid
    xl, xh = fill(lo), fill(hi)
    ml, mh = xl.sum(), xh.sum()
    theta = (g.count - ml) / (mh - ml) if mh > ml else 1.0
    x = xl + theta * (xh - xl)
    return x * (g.count / x.sum())


@dataclass(frozen=True, eq=False)
class DynamicsResult:
    profile: DiscreteProfile
    diagnostics: EquilibriumDiagnostics
    iterations: int
    converged: bool
    gap_history: list[float] = field(default_factory=list)


def uniform_start(s: Scenario, grid: Grid) -> DiscreteProfile:
    """Each group spread evenly over the central N/D of the peak."""
    t = grid.edges[1:]
    half = 0.5 * s.total / s.discharge
    win = (t > s.tau_star - half) & (t <= s.tau_star + half)
    mass = [np.where(win, g.count / win.sum(), 0.0) for g in s.groups]
    return grid.empty(s.discharge).with_mass(mass, s.discharge)


def best_response_dynamics(
    s: Scenario,
    toll: TollSchedule,
    dt: float = 0.01,
    step_fraction: float = 0.05,
    max_iters: int = 200000,
    tol: float = 0.02,
    start: DiscreteProfile | None = None,
) -> DynamicsResult:
    """Damped best-response iteration towards a departure-time equilibrium.

    Each round, and for one group at a time, ``step_fraction`` of the group's
    mass is moved onto its exact best response to the current profile.
    Stops once both the equal-cost gap and the undercut are below ``tol``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not 0 < step_fraction < 1:
        raise ValueError("step_fraction must lie in (0, 1)")
    p = uniform_start(s, make_grid(s, dt)) if start is None else start
    history = []
    diag = equilibrium_gap(p, toll, s)
    it = 0
    while it < max_iters:
        history.append(diag.global_gap)
        if diag.ok(tol):
            break
        mass = list(p.mass)
        for k, g in enumerate(s.groups):
            x = best_response(p, k, toll, s)
            m = (1 - step_fraction) * mass[k] + step_fraction * x
            m[(m < MASS_EPS * g.count) & (x == 0)] = 0.0
            mass[k] = m * (g.count / m.sum())
            p = p.with_mass(mass, s.discharge)
        it += 1
        diag = equilibrium_gap(p, toll, s)
    return DynamicsResult(p, diag, it, diag.ok(tol), history)


# ---------------------------------------------------------------- revenue and shifts


def numeric_revenue(p: DiscreteProfile, toll: TollSchedule) -> float:
    t = p.times
    return float(sum(np.dot(toll[k](t), p.mass[k]) for k in range(2)))


@dataclass(frozen=True)
class ShiftCheck:
    gap_before: float
    gap_after: float
    undercut_before: float
    undercut_after: float
    tol: float

    @property
    def gap_delta(self) -> float:
        return abs(self.gap_after - self.gap_before)

    @property
    def passed(self) -> bool:
        return self.gap_delta < self.tol and self.undercut_after < self.tol

    def __bool__(self) -> bool:
        return self.passed


def unoccupied_windows(p: EquilibriumProfile, k: int) -> list[tuple[float, float]]:
    """Parts of the peak where group ``k`` does not depart."""
    t0, tf = p.times.t0, p.times.tf
    out, cursor = [], t0
    for a, b in p.departure_intervals(k):
        if a > cursor:
            out.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < tf:
        out.append((cursor, tf))
    return out


def tie_break(s: Scenario, toll: TollSchedule, closed: EquilibriumProfile, group: int, amount: float = 1.0):
    """Raise ``group``'s toll where it should not travel.

    Used when a group's cost is flat over the whole peak, so that dynamics
    settle on the closed-form windows rather than any other split. Windows
    touching the ends of the peak are extended past them so the raise is
    already in full force at the first and last departure.
    """
    t0, tf = closed.times.t0, closed.times.tf
    margin = 0.1 * (tf - t0)
    out = toll
    for a, b in unoccupied_windows(closed, group):
        a = a - margin if a <= t0 else a
        b = b + margin if b >= tf else b
        out = out.raised_on(group, a, b, amount)
    return out


def lemma2_check(
    s: Scenario,
    toll: TollRegime | TollSchedule,
    shift: float,
    group: int | None = None,
    dt: float = 0.001,
    tol: float = 1e-3,
    closed: EquilibriumProfile | None = None,
) -> ShiftCheck:
    """Raise tolls and confirm the closed-form equilibrium still holds.

    With ``group`` None every toll rises by ``shift``; otherwise only that
    group's toll rises, and only where it does not travel.
    """
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    if isinstance(toll, TollRegime):
        closed = analytic_profile(s, toll) if closed is None else closed
        toll = schedules(s, toll)
    elif closed is None:
        raise ValueError("a closed-form profile is required with an explicit schedule")
    p = discretize(closed, s, dt)
    if group is None:
        raised = toll.shifted(shift)
    else:
        raised = toll
        for a, b in unoccupied_windows(closed, group):
            raised = raised.raised_on(group, a, b, shift)
    before, after = equilibrium_gap(p, toll, s), equilibrium_gap(p, raised, s)
    return ShiftCheck(before.global_gap, after.global_gap, before.max_undercut, after.max_undercut, tol)


def corrupt(p: DiscreteProfile, s: Scenario, fraction: float = 0.2) -> DiscreteProfile:
    """Move ``fraction`` of group 1 into the single bin just before tau*; a negative control."""
    m1 = p.mass[0] * (1 - fraction)
    i = int(np.searchsorted(p.times, s.tau_star)) - 1
    m1[max(i, 0)] += fraction * p.mass[0].sum()
    return p.with_mass((m1, p.mass[1]), s.discharge)
