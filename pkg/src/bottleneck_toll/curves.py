"""Piecewise-linear and piecewise-constant functions of time."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# breakpoints closer than this (relative to the time scale) are merged
MERGE_TOL = 1e-12


def _scale(times: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(times)))) if times.size else 1.0


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """Continuous curve through ``(time, value)`` breakpoints.

    Values are interpolated linearly between breakpoints and held constant
    outside the first and last one.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("need one or more breakpoints with matching times and values")
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(self.values))):
            raise ValueError("breakpoints must be finite")

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]]) -> "PiecewiseLinearCurve":
        """Build from points in time order, merging coincident times.

        Coincident points must carry (numerically) equal values since the
        curve is continuous.
        """
        pts = [(float(t), float(v)) for t, v in points]
        if not pts:
            raise ValueError("no breakpoints")
        tscale = _scale(np.array([p[0] for p in pts]))
        vscale = _scale(np.array([p[1] for p in pts]))
        times, values = [pts[0][0]], [pts[0][1]]
        for t, v in pts[1:]:
            if t < times[-1] - MERGE_TOL * tscale:
                raise ValueError(f"breakpoint times out of order at t={t}")
            if t <= times[-1] + MERGE_TOL * tscale:
                if abs(v - values[-1]) > 1e-9 * vscale:
                    raise ValueError(f"discontinuity at t={t}: {values[-1]} vs {v}")
                continue
            times.append(t)
            values.append(v)
        return cls(tuple(times), tuple(values))

    @classmethod
    def from_slopes(cls, t_start: float, v_start: float, knots: Sequence[float], slopes: Sequence[float]):
        """Start at ``(t_start, v_start)`` and follow ``slopes[i]`` up to ``knots[i]``."""
        if len(knots) != len(slopes):
            raise ValueError("knots and slopes must have equal length")
        pts = [(t_start, v_start)]
        t, v = t_start, v_start
        for knot, slope in zip(knots, slopes):
            v = v + slope * (knot - t)
            t = knot
            pts.append((t, v))
        return cls.from_points(pts)

    @classmethod
    def constant(cls, value: float, at: float = 0.0) -> "PiecewiseLinearCurve":
        return cls((float(at),), (float(value),))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.values))

    def __call__(self, t):
        out = np.interp(t, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def _combine(self, other: "PiecewiseLinearCurve", sign: float) -> "PiecewiseLinearCurve":
        grid = np.union1d(self.times, other.times)
        vals = self(grid) + sign * other(grid)
        return PiecewiseLinearCurve.from_points(zip(grid, vals))

    def __add__(self, other):
        if isinstance(other, PiecewiseLinearCurve):
            return self._combine(other, 1.0)
        return PiecewiseLinearCurve(self.times, tuple(v + float(other) for v in self.values))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PiecewiseLinearCurve):
            return self._combine(other, -1.0)
        return self + (-float(other))

    def __mul__(self, c: float) -> "PiecewiseLinearCurve":
        return PiecewiseLinearCurve(self.times, tuple(float(c) * v for v in self.values))

    __rmul__ = __mul__

    def __neg__(self) -> "PiecewiseLinearCurve":
        return self * -1.0

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)

    def max(self) -> float:
        return float(np.max(self.values))

    def min(self) -> float:
        return float(np.min(self.values))

    def integral(self, a: float, b: float) -> float:
        """Exact integral over [a, b], including the constant tails."""
        if b < a:
            return -self.integral(b, a)
        t = np.asarray(self.times)
        inner = t[(t > a) & (t < b)]
        grid = np.concatenate([[a], inner, [b]])
        vals = self(grid)
        return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid)))

    def restrict(self, a: float, b: float) -> "PiecewiseLinearCurve":
        """Same curve on [a, b] with breakpoints added at the ends."""
        t = np.asarray(self.times)
        grid = np.concatenate([[a], t[(t > a) & (t < b)], [b]])
        return PiecewiseLinearCurve.from_points(zip(grid, self(grid)))


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function: ``levels[i]`` on ``[edges[i], edges[i+1])``, zero outside."""

    edges: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.levels) + 1:
            raise ValueError("need len(edges) == len(levels) + 1")
        if np.any(np.diff(self.edges) < 0):
            raise ValueError("edges must be nondecreasing")

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float, float]]) -> "StepFunction":
        """Build from ``(start, end, level)`` pieces laid end to end in time order.

        Gaps between pieces are filled with level zero; empty pieces are dropped.
        """
        edges: list[float] = []
        levels: list[float] = []
        for a, b, level in pieces:
            a, b = float(a), float(b)
            if b <= a:
                continue
            if edges:
                if a < edges[-1] - MERGE_TOL * _scale(np.array([a, edges[-1]])):
                    raise ValueError("pieces overlap")
                if a > edges[-1] + MERGE_TOL * _scale(np.array([a, edges[-1]])):
                    levels.append(0.0)
                    edges.append(a)
                edges.append(b)
            else:
                edges.extend([a, b])
            levels.append(float(level))
        if not edges:
            return cls((0.0,), ())
        return cls(tuple(edges), tuple(levels))

    def __call__(self, t):
        e = np.asarray(self.edges)
        lv = np.concatenate([[0.0], self.levels, [0.0]])
        out = lv[np.searchsorted(e, t, side="right")]
        return float(out) if np.ndim(out) == 0 else out

    def integral(self, a: float = -np.inf, b: float = np.inf) -> float:
        if b < a:
            return -self.integral(b, a)
        e = np.asarray(self.edges)
        lo = np.clip(e[:-1], a, b)
        hi = np.clip(e[1:], a, b)
        return float(np.sum(np.asarray(self.levels) * (hi - lo)))

    @property
    def total(self) -> float:
        return self.integral()

    def support(self) -> list[tuple[float, float]]:
        """Maximal intervals on which the level is positive."""
        out: list[tuple[float, float]] = []
        for a, b, level in zip(self.edges[:-1], self.edges[1:], self.levels):
            if level <= 0 or b <= a:
                continue
            if out and abs(out[-1][1] - a) <= MERGE_TOL * _scale(np.array([a])):
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
        return out

    def cumulative(self, start: float | None = None) -> PiecewiseLinearCurve:
        """Running integral from the first edge, as a piecewise-linear curve."""
        t0 = self.edges[0] if start is None else start
        pts = [(t0, 0.0)]
        acc = 0.0
        for a, b, level in zip(self.edges[:-1], self.edges[1:], self.levels):
            acc += level * (b - a)
            pts.append((b, acc))
        return PiecewiseLinearCurve.from_points(pts)

    def weighted_integral(self, curve: PiecewiseLinearCurve) -> float:
        """Exact integral of ``curve(t) * self(t)`` over the real line."""
        return float(
            sum(level * curve.integral(a, b) for a, b, level in zip(self.edges[:-1], self.edges[1:], self.levels))
        )

    def __add__(self, other: "StepFunction") -> "StepFunction":
        grid = np.union1d(self.edges, other.edges)
        mids = 0.5 * (grid[1:] + grid[:-1])
        return StepFunction(tuple(grid), tuple(self(mids) + other(mids)))

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction(self.edges, tuple(float(c) * v for v in self.levels))

    __rmul__ = __mul__
