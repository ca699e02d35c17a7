"""Restricted master problem and the column generation loop."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .lp import EQ, LE, LpProblem, LpResult, solve_lp
from .model import Assignment, Instance, Solution
from .pricing import DualPrices, PricingInput, ScheduleColumn, solve_pricing

RC_EPS = 1e-9
INT_EPS = 1e-6

__all__ = [
    "BranchConstraints", "CgOutcome", "ColumnPool", "DualPrices", "ScheduleColumn",
    "big_m", "build_rmp", "extract_integer", "run_colgen", "LpNumericalError",
]


class LpNumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class BranchConstraints:
    forced: dict = field(default_factory=dict)          # flight -> belt
    forbidden: frozenset = frozenset()                  # {(flight, belt)}

    def eligible(self, inst: Instance, belt: int) -> list[int]:
        return [j for j in sorted(inst.belts[belt].compatible_flights)
                if (j, belt) not in self.forbidden and self.forced.get(j, belt) == belt]

    def forced_on(self, belt: int) -> frozenset[int]:
        return frozenset(j for j, i in self.forced.items() if i == belt)

    def admits(self, col: ScheduleColumn) -> bool:
        if col.is_dummy:
            return True
        for j in col.coverage:
            if (j, col.belt) in self.forbidden or self.forced.get(j, col.belt) != col.belt:
                return False
        return self.forced_on(col.belt) <= col.coverage


def big_m(inst: Instance) -> int:
    """Dummy-column penalty: beats any achievable profit swing."""
    return 1 + inst.n * inst.max_abs_profit


class ColumnPool:
    """Columns per belt, deduplicated, always holding one dummy per belt."""

    def __init__(self, inst: Instance, columns: Iterable[ScheduleColumn] | None = None):
        self.inst = inst
        self.columns: list[ScheduleColumn] = []
        self.keys: set = set()
        if columns is None:
            big = big_m(inst)
            columns = [ScheduleColumn.dummy(i, inst.n, big) for i in range(inst.m)]
        for c in columns:
            self.add(c)

    def add(self, col: ScheduleColumn) -> bool:
        if col.key in self.keys:
            return False
        self.keys.add(col.key)
        self.columns.append(col)
        return True

    def __len__(self):
        return len(self.columns)

    def __contains__(self, col):
        return col.key in self.keys

    def for_belt(self, belt: int) -> list[ScheduleColumn]:
        return [c for c in self.columns if c.belt == belt]

    def filtered(self, cons: BranchConstraints) -> "ColumnPool":
        return ColumnPool(self.inst, [c for c in self.columns if cons.admits(c)])


def column_vector(col: ScheduleColumn, n: int, m: int) -> np.ndarray:
    v = np.zeros(n + m)
    v[list(col.coverage)] = 1.0
    v[n + col.belt] = 1.0
    return v


def build_rmp(inst: Instance, columns: list[ScheduleColumn]) -> LpProblem:
    """Partition rows (one per flight, ``=``) then convexity rows (one per belt, ``<=``)."""
    n, m = inst.n, inst.m
    if columns:
        A = np.column_stack([column_vector(c, n, m) for c in columns])
    else:
        A = np.zeros((n + m, 0))
    c = np.array([float(col.profit) for col in columns])
    return LpProblem(c, A, [EQ] * n + [LE] * m, np.ones(n + m))


def extract_integer(inst: Instance, values: np.ndarray, columns: list[ScheduleColumn]) -> Solution | None:
    chosen = []
    for v, col in zip(values, columns):
        if v <= INT_EPS:
            continue
        if v < 1 - INT_EPS or col.is_dummy:
            return None
        chosen.append(col)
    covered = [j for col in chosen for j in col.coverage]
    if sorted(covered) != list(range(inst.n)):
        return None
    assignments = sorted((Assignment(j, col.belt, t, w) for col in chosen for j, t, w in col.assignments),
                         key=lambda a: a.flight)
    return Solution(tuple(assignments), sum(col.profit for col in chosen))


@dataclass
class CgOutcome:
    ub: float
    values: np.ndarray
    columns: list[ScheduleColumn]
    incumbent: Solution | None
    iterations: int
    columns_added: int
    converged: bool = True
    infeasible: bool = False
    ub_history: list[float] = field(default_factory=list)

    @property
    def fractional(self) -> list[tuple[float, ScheduleColumn]]:
        return [(v, c) for v, c in zip(self.values, self.columns) if INT_EPS < v < 1 - INT_EPS]

    @property
    def uses_dummy(self) -> bool:
        return any(v > INT_EPS and c.is_dummy for v, c in zip(self.values, self.columns))


def run_colgen(inst: Instance, pool: ColumnPool, cons: BranchConstraints | None = None,
               deadline: float | None = None,
               on_lp: Callable[[LpProblem, LpResult], None] | None = None) -> CgOutcome:
    """Iterate master LP and per-belt pricing until no column prices out.

    ``pool`` is extended in place.  ``on_lp`` sees every master LP and its
    result (used for certificate auditing).
    """
    cons = cons or BranchConstraints()
    n = inst.n
    inputs = [(i, cons.eligible(inst, i), cons.forced_on(i)) for i in range(inst.m)]
    basis = None
    iterations = added = 0
    history = []
    best = None
    while True:
        rmp = build_rmp(inst, pool.columns)
        res = solve_lp(rmp, basis)
        if res.status != "optimal":
            raise LpNumericalError(f"master LP returned status {res.status}")
        if on_lp is not None:
            on_lp(rmp, res)
        basis = res.basis
        history.append(res.objective)
        iterations += 1
        inc = extract_integer(inst, res.primal, pool.columns)
        if inc is not None and (best is None or inc.objective > best.objective):
            best = inc
        duals = DualPrices(res.duals[:n], res.duals[n:])
        new = 0
        for i, elig, forced in inputs:
            col, rc = solve_pricing(PricingInput(inst, i, elig, duals, forced))
            if col is None:
                return CgOutcome(-math.inf, res.primal, list(pool.columns), None, iterations, added,
                                 True, True, history)
            if rc > RC_EPS and pool.add(col):
                new += 1
        added += new
        done = new == 0
        if done or (deadline is not None and time.monotonic() >= deadline):
            return CgOutcome(res.objective, res.primal, list(pool.columns[:len(res.primal)]), best,
                             iterations, added, done, False, history)
