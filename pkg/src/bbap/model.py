"""Problem data, feasibility semantics and solution scoring for belt assignment.

Flights are always held in non-decreasing ``t_req`` order; on a shared belt
they must be served in that order without overlapping.  Profits are integers
and every objective here is exact integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np


class MalformedSolutionError(ValueError):
    """A solution refers to flights, belts or durations that do not exist."""


@dataclass(frozen=True)
class Flight:
    id: int
    bags: int
    t_req: int


@dataclass(frozen=True)
class Belt:
    id: int
    productivity: float
    compatible_flights: frozenset[int]
    dual_station_threshold: int | None = None

    def effective_productivity(self, bags: int) -> float:
        if self.dual_station_threshold is not None and bags >= self.dual_station_threshold:
            return 2 * self.productivity
        return self.productivity


@dataclass(frozen=True)
class DurationSet:
    nominal: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class Assignment:
    flight: int
    belt: int
    start: int
    duration: int

    @property
    def finish(self) -> int:
        return self.start + self.duration


def finish(a: Assignment) -> int:
    return a.start + a.duration


@dataclass(frozen=True)
class Solution:
    assignments: tuple[Assignment, ...]
    objective: int


@dataclass(frozen=True)
class Instance:
    """Full problem statement.

    ``durations`` maps ``(belt, flight)`` to the admissible duration set for
    every compatible pair.  ``profit`` is any object with a
    ``value(inst, belt, flight, t, w) -> int`` method (see :mod:`bbap.profits`).
    """

    flights: tuple[Flight, ...]
    belts: tuple[Belt, ...]
    t_max: int
    profit: object
    durations: Mapping[tuple[int, int], DurationSet] = field(hash=False)

    @property
    def n(self) -> int:
        return len(self.flights)

    @property
    def m(self) -> int:
        return len(self.belts)

    def compatible(self, belt: int, flight: int) -> bool:
        return flight in self.belts[belt].compatible_flights

    def p(self, belt: int, flight: int, t: int, w: int) -> int:
        return self.profit.value(self, belt, flight, t, w)

    @cached_property
    def profit_rows(self) -> dict[tuple[int, int], tuple[tuple[int, ...], np.ndarray]]:
        """Per compatible pair: (durations, matrix[k, s]) of profits.

        Row ``k`` holds the profit of starting at ``s`` with duration
        ``durations[k]``; inadmissible cells (``s < t_req`` or
        ``s + w > t_max``) are NaN.
        """
        rows = {}
        for i, belt in enumerate(self.belts):
            for j in sorted(belt.compatible_flights):
                ws = self.durations[i, j].values
                mat = np.full((len(ws), self.t_max), np.nan)
                t_req = self.flights[j].t_req
                for k, w in enumerate(ws):
                    for s in range(t_req, self.t_max - w + 1):
                        mat[k, s] = self.p(i, j, s, w)
                rows[i, j] = (ws, mat)
        return rows

    @cached_property
    def cache(self) -> dict:
        """Scratch space for derived per-instance tables (filled lazily by solvers)."""
        return {}

    @cached_property
    def max_abs_profit(self) -> int:
        best = 0
        for _, mat in self.profit_rows.values():
            if np.any(~np.isnan(mat)):
                best = max(best, int(np.nanmax(np.abs(mat))))
        return best


def sort_flights(flights: Sequence[Flight]) -> list[int]:
    """Stable order of input positions by ``t_req``."""
    return sorted(range(len(flights)), key=lambda k: (flights[k].t_req, k))


def validate_instance(inst: Instance) -> list[str]:
    """Return one message per violated data invariant; empty when well formed."""
    out = []
    if inst.t_max < 1:
        out.append(f"instance: t_max must be positive (got {inst.t_max})")
    prev = None
    for pos, f in enumerate(inst.flights):
        if f.id != pos:
            out.append(f"flight {pos}: id {f.id} does not match its position")
        if f.bags < 1:
            out.append(f"flight {pos}: bags must be >= 1")
        if not 0 <= f.t_req < inst.t_max:
            out.append(f"flight {pos}: t_req out of range [0, {inst.t_max})")
        if prev is not None and f.t_req < prev:
            out.append(f"flight {pos}: flights not sorted by t_req")
        prev = f.t_req
    for i, b in enumerate(inst.belts):
        if b.productivity <= 0:
            out.append(f"belt {i}: productivity must be positive")
        if b.dual_station_threshold is not None and b.dual_station_threshold < 1:
            out.append(f"belt {i}: dual_station_threshold must be >= 1")
        bad = [j for j in b.compatible_flights if not 0 <= j < inst.n]
        if bad:
            out.append(f"belt {i}: compatible flights {sorted(bad)} out of range")
        for j in sorted(b.compatible_flights):
            if not 0 <= j < inst.n:
                continue
            ds = inst.durations.get((i, j))
            if ds is None:
                out.append(f"belt {i}, flight {j}: missing duration set")
                continue
            if not ds.values or any(w < 1 for w in ds.values):
                out.append(f"belt {i}, flight {j}: durations must be positive")
            if list(ds.values) != sorted(set(ds.values)):
                out.append(f"belt {i}, flight {j}: durations must be sorted and distinct")
            if ds.nominal not in ds.values:
                out.append(f"belt {i}, flight {j}: nominal duration not in duration set")
    for j, f in enumerate(inst.flights):
        belts = [i for i, b in enumerate(inst.belts) if j in b.compatible_flights]
        if not belts:
            out.append(f"flight {j}: not compatible with any belt")
            continue
        schedulable = any(
            f.t_req + w <= inst.t_max
            for i in belts
            if (i, j) in inst.durations
            for w in inst.durations[i, j].values
        )
        if not schedulable and 0 <= f.t_req < inst.t_max:
            out.append(f"flight {j}: unschedulable flight (no duration fits before t_max)")
    return out


@dataclass
class SolutionReport:
    violations: list[str]
    objective: int
    objective_matches: bool

    @property
    def feasible(self) -> bool:
        return not self.violations


def score(inst: Instance, assignments: Sequence[Assignment]) -> int:
    """Sum of profits, ignoring feasibility."""
    total = 0
    for a in assignments:
        total += inst.p(a.belt, a.flight, a.start, a.duration)
    return total


def check_solution(inst: Instance, sol: Solution) -> SolutionReport:
    """Audit ``sol`` against every constraint class and recompute its objective."""
    for a in sol.assignments:
        if not (0 <= a.flight < inst.n and 0 <= a.belt < inst.m):
            raise MalformedSolutionError(f"assignment {a} references unknown flight or belt")
    v = []
    counts = [0] * inst.n
    for a in sol.assignments:
        counts[a.flight] += 1
    for j, c in enumerate(counts):
        if c != 1:
            v.append(f"coverage: flight {j} assigned {c} times")
    for a in sol.assignments:
        f = inst.flights[a.flight]
        if not inst.compatible(a.belt, a.flight):
            v.append(f"compatibility: flight {a.flight} not allowed on belt {a.belt}")
        elif a.duration not in inst.durations[a.belt, a.flight].values:
            v.append(f"duration: {a.duration} not admissible for flight {a.flight} on belt {a.belt}")
        if a.start < f.t_req or a.start + a.duration > inst.t_max:
            v.append(f"window: flight {a.flight} runs [{a.start}, {a.start + a.duration}) "
                     f"outside [{f.t_req}, {inst.t_max}]")
    by_belt: dict[int, list[Assignment]] = {}
    for a in sol.assignments:
        by_belt.setdefault(a.belt, []).append(a)
    for i, items in sorted(by_belt.items()):
        items.sort(key=lambda a: a.flight)
        for x, y in zip(items, items[1:]):
            if x.finish > y.start:
                v.append(f"overlap/precedence: belt {i} flight {x.flight} ends {x.finish} "
                         f"after flight {y.flight} starts {y.start}")
    objective = 0
    for a in sol.assignments:
        try:
            objective += inst.p(a.belt, a.flight, a.start, a.duration)
        except (KeyError, ValueError):
            v.append(f"objective: no profit defined for {a}")
    return SolutionReport(v, objective, objective == sol.objective)
