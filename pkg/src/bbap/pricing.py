"""Single-belt pricing: best schedule under dual prices by dynamic programming.

``f[t, q]`` is the best reduced profit using only the first ``q`` eligible
flights with every chosen flight finished by ``t``::

    f[t, q] = max(f[t, q-1],                                  # skip flight q
                  f[t-1, q],                                  # idle minute
                  max_w f[t-w, q-1] + p(q, t-w, w) - y(q))    # take, start t-w >= t_req

Flights forced onto the belt by branching receive a uniform lift so that any
schedule holding more of them dominates; the lift is removed before the
reduced cost is reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Instance

SKIP, SHIFT, TAKE = 1, 2, 3


@dataclass(frozen=True)
class DualPrices:
    y: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class ScheduleColumn:
    belt: int
    assignments: tuple[tuple[int, int, int], ...]
    profit: int
    is_dummy: bool = False
    coverage: frozenset[int] = field(default=frozenset(), compare=False)

    @property
    def key(self):
        return (self.belt, self.is_dummy, self.assignments)

    @classmethod
    def from_assignments(cls, inst: Instance, belt: int, assignments) -> "ScheduleColumn":
        assignments = tuple(assignments)
        q = sum(inst.p(belt, j, t, w) for j, t, w in assignments)
        return cls(belt, assignments, q, False, frozenset(j for j, _, _ in assignments))

    @classmethod
    def dummy(cls, belt: int, n: int, big: int) -> "ScheduleColumn":
        return cls(belt, (), -big, True, frozenset(range(n)))


@dataclass
class PricingInput:
    inst: Instance
    belt: int
    eligible: Sequence[int]
    duals: DualPrices
    forced: frozenset[int] = frozenset()


@dataclass
class DpTable:
    values: np.ndarray      # (t_max + 1, len(eligible) + 1)
    parent: np.ndarray      # SKIP, SHIFT or TAKE + duration index; 0 on the border
    lift: float


def finish_table(inst: Instance, belt: int, flight: int):
    """Profits indexed by finish time, rows in descending duration order.

    Returns ``(start_idx, profit, k_of_row, pmin, pmax)`` where
    ``profit[r, t]`` is the profit of finishing at ``t`` with the ``r``-th
    longest duration (``-inf`` when inadmissible) and ``start_idx[r, t]`` the
    matching start, clipped into range.
    """
    key = ("finish", belt, flight)
    got = inst.cache.get(key)
    if got is None:
        ws, mat = inst.profit_rows[belt, flight]
        T = inst.t_max
        ks = list(range(len(ws) - 1, -1, -1))
        t = np.arange(T + 1)
        starts = np.empty((len(ks), T + 1), dtype=np.intp)
        prof = np.full((len(ks), T + 1), -np.inf)
        for r, k in enumerate(ks):
            s = t - ws[k]
            ok = (s >= 0) & (s < T)
            starts[r] = np.clip(s, 0, T)
            vals = np.full(T + 1, np.nan)
            vals[ok] = mat[k, s[ok]]
            prof[r] = np.where(np.isnan(vals), -np.inf, vals)
        finite = mat[~np.isnan(mat)]
        pmin = float(finite.min()) if finite.size else 0.0
        pmax = float(finite.max()) if finite.size else 0.0
        got = (starts, prof, np.array(ks, dtype=np.int16), pmin, pmax, finite.size > 0)
        inst.cache[key] = got
    return got


def lift_for(inp: PricingInput) -> float:
    if not inp.forced:
        return 0.0
    total = 0.0
    for j in inp.eligible:
        _, _, _, pmin, pmax, any_ok = finish_table(inp.inst, inp.belt, j)
        if any_ok:
            y = inp.duals.y[j]
            total += max(abs(pmax - y), abs(pmin - y))
    return 1.0 + total


def dp_fill(inp: PricingInput) -> DpTable:
    inst, T = inp.inst, inp.inst.t_max
    k = len(inp.eligible)
    lift = lift_for(inp)
    values = np.zeros((T + 1, k + 1))
    parent = np.zeros((T + 1, k + 1), dtype=np.int16)
    for q, j in enumerate(inp.eligible, start=1):
        starts, prof, ks, _, _, _ = finish_table(inst, inp.belt, j)
        bonus = lift - inp.duals.y[j] if j in inp.forced else -inp.duals.y[j]
        prev = values[:, q - 1]
        cand = prev[starts] + (prof + bonus)
        # rows run longest duration first, so argmax keeps the larger w on ties
        r = np.argmax(cand, axis=0)
        take = cand[r, np.arange(T + 1)]
        col = np.maximum.accumulate(np.maximum(take, prev))
        values[:, q] = col
        shift_eq = np.zeros(T + 1, dtype=bool)
        shift_eq[1:] = col[:-1] == col[1:]
        code = np.where(take == col, TAKE + ks[r], np.where(shift_eq, SHIFT, SKIP))
        code[0] = SKIP
        parent[:, q] = code
    return DpTable(values, parent, lift)


def backtrack(table: DpTable, inp: PricingInput) -> list[tuple[int, int, int]]:
    """Recover the optimal schedule as ``(flight, start, duration)`` in flight order."""
    t, q = table.values.shape[0] - 1, table.values.shape[1] - 1
    out = []
    while q > 0 and t > 0:
        code = table.parent[t, q]
        if code == SKIP:
            q -= 1
        elif code == SHIFT:
            t -= 1
        else:
            j = inp.eligible[q - 1]
            w = inp.inst.durations[inp.belt, j].values[code - TAKE]
            out.append((j, t - w, w))
            t -= w
            q -= 1
    out.reverse()
    return out


def reduced_profit(inp: PricingInput, schedule) -> float:
    """Sum of ``p - y`` over ``schedule`` accumulated in flight order (same order as the DP)."""
    acc = 0.0
    for j, t, w in schedule:
        acc = acc + (float(inp.inst.p(inp.belt, j, t, w)) - inp.duals.y[j])
    return acc


def solve_pricing(inp: PricingInput) -> tuple[ScheduleColumn | None, float]:
    """Best column for the belt and its reduced cost.

    Returns ``(None, -inf)`` when the forced flights cannot all be scheduled.
    """
    u = float(inp.duals.u[inp.belt])
    table = dp_fill(inp)
    sched = backtrack(table, inp)
    if inp.forced and not inp.forced <= {j for j, _, _ in sched}:
        return None, -np.inf
    col = ScheduleColumn.from_assignments(inp.inst, inp.belt, sched)
    return col, reduced_profit(inp, sched) - u
