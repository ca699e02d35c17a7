"""Best-first branch-and-price over flight-to-belt assignments."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .colgen import (INT_EPS, BranchConstraints, CgOutcome, ColumnPool, extract_integer,
                     run_colgen)
from .model import Assignment, Instance, Solution
from .pricing import DualPrices, PricingInput, ScheduleColumn, solve_pricing

BOUND_EPS = 1e-6


@dataclass
class BnpNode:
    constraints: BranchConstraints
    pool: ColumnPool
    ub: float
    depth: int = 0
    parent: int | None = None
    id: int = 0


@dataclass
class NodeRecord:
    id: int
    parent: int | None
    depth: int
    parent_ub: float
    ub: float
    status: str           # branched | integral | pruned-bound | infeasible | closed | timeout


@dataclass
class BnpResult:
    incumbent: Solution | None
    best_ub: float
    gap_percent: float
    nodes: int
    proven_optimal: bool
    infeasible: bool
    elapsed: float
    root_ub: float
    records: list[NodeRecord] = field(default_factory=list)
    incumbent_history: list[int] = field(default_factory=list)

    @property
    def objective(self) -> int | None:
        return None if self.incumbent is None else self.incumbent.objective


def gap_percent(ub: float, lb: float | None) -> float:
    if lb is None:
        return math.inf
    if lb <= 0:
        return 0.0 if ub <= lb else math.inf
    return max(0.0, (ub / lb - 1.0) * 100.0)


def select_branch_flight(outcome: CgOutcome, cons: BranchConstraints | None = None) -> int:
    """Flight covered by the most fractional columns; lowest index on ties.

    Flights already forced are skipped since branching on them cannot split
    the node.
    """
    frac = outcome.fractional
    if not frac:
        raise ValueError("no fractional columns: the node is integral")
    forced = cons.forced if cons is not None else {}
    counts: dict[int, int] = {}
    for _, col in frac:
        for j in col.coverage:
            if j not in forced:
                counts[j] = counts.get(j, 0) + 1
    if not counts:
        raise ValueError("every flight in a fractional column is already fixed")
    return min(counts, key=lambda j: (-counts[j], j))


def branch(inst: Instance, node: BnpNode, flight: int) -> list[BnpNode]:
    """One child per admissible belt for ``flight``; pools are filtered to admissible columns."""
    cons = node.constraints
    if flight in cons.forced:
        raise ValueError(f"flight {flight} is already fixed to belt {cons.forced[flight]}")
    children = []
    for i in range(inst.m):
        if not inst.compatible(i, flight) or (flight, i) in cons.forbidden:
            continue
        forced = dict(cons.forced)
        forced[flight] = i
        forbidden = cons.forbidden | {(flight, k) for k in range(inst.m) if k != i}
        child = BranchConstraints(forced, frozenset(forbidden))
        children.append(BnpNode(child, node.pool.filtered(child), node.ub, node.depth + 1, node.id))
    return children


def _solve_fixed(inst: Instance, cons: BranchConstraints) -> Solution | None:
    """Every flight fixed: each belt independently schedules exactly its flights."""
    zero = DualPrices(np.zeros(inst.n), np.zeros(inst.m))
    cols = []
    for i in range(inst.m):
        mine = sorted(cons.forced_on(i))
        col, _ = solve_pricing(PricingInput(inst, i, mine, zero, frozenset(mine)))
        if col is None:
            return None
        cols.append(col)
    assignments = sorted((Assignment(j, c.belt, t, w) for c in cols for j, t, w in c.assignments),
                         key=lambda a: a.flight)
    return Solution(tuple(assignments), sum(c.profit for c in cols))


def solve(inst: Instance, time_limit: float | None = None,
          on_node: Callable[[int, float, int | None, float], None] | None = None,
          on_lp=None) -> BnpResult:
    """Branch-and-price to proven optimality or until ``time_limit`` seconds elapse."""
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    counter = itertools.count()
    root = BnpNode(BranchConstraints(), ColumnPool(inst), math.inf, 0, None, 0)
    heap = [(-root.ub, 0, next(counter), root)]
    incumbent: Solution | None = None
    history: list[int] = []
    records: list[NodeRecord] = []
    nodes = 0
    root_ub = math.nan
    timed_out = False
    next_id = itertools.count(1)

    def inc_obj():
        return -math.inf if incumbent is None else incumbent.objective

    def offer(sol: Solution | None):
        nonlocal incumbent
        if sol is not None and sol.objective > inc_obj():
            incumbent = sol
            history.append(sol.objective)

    def dominated(ub: float) -> bool:
        return incumbent is not None and math.floor(ub + BOUND_EPS) <= incumbent.objective

    while heap:
        if deadline is not None and time.monotonic() >= deadline:
            timed_out = True
            break
        _, _, _, node = heapq.heappop(heap)
        if dominated(node.ub):
            continue
        nodes += 1
        out = run_colgen(inst, node.pool, node.constraints, deadline, on_lp)
        if node.depth == 0:
            root_ub = out.ub
        offer(out.incumbent)
        rec = NodeRecord(node.id, node.parent, node.depth, node.ub, out.ub, "branched")
        records.append(rec)
        if on_node is not None:
            on_node(nodes, _best_ub(heap, out.ub, inc_obj()), None if incumbent is None else incumbent.objective,
                    time.monotonic() - t0)
        if out.infeasible:
            rec.status = "infeasible"
            continue
        if not out.converged:
            # the partial LP value is not a proven bound; keep the inherited one
            rec.status = "timeout"
            heapq.heappush(heap, (-node.ub, -node.depth, next(counter), node))
            timed_out = True
            break
        node.ub = out.ub
        if dominated(out.ub):
            rec.status = "integral" if not out.fractional else "pruned-bound"
            continue
        if not out.fractional:
            # integral but not dummy-free: no schedule satisfies the branching decisions
            rec.status = "infeasible"
            continue
        try:
            flight = select_branch_flight(out, node.constraints)
        except ValueError:
            free = [j for j in range(inst.n) if j not in node.constraints.forced]
            if not free:
                offer(_solve_fixed(inst, node.constraints))
                rec.status = "closed"
                continue
            flight = free[0]
        for child in branch(inst, node, flight):
            child.id = next(next_id)
            heapq.heappush(heap, (-child.ub, -child.depth, next(counter), child))

    elapsed = time.monotonic() - t0
    open_ubs = [-k[0] for k in heap]
    best_ub = max(open_ubs + [inc_obj()]) if (open_ubs or incumbent is not None) else -math.inf
    proven = not heap and not timed_out
    if proven and incumbent is not None:
        best_ub = incumbent.objective
    lb = None if incumbent is None else incumbent.objective
    gap = 0.0 if proven and incumbent is not None else gap_percent(best_ub, lb)
    return BnpResult(incumbent, best_ub, gap, nodes, proven, proven and incumbent is None, elapsed,
                     root_ub, records, history)


def _best_ub(heap, current: float, inc: float) -> float:
    vals = [-k[0] for k in heap] + [inc]
    if math.isfinite(current):
        vals.append(current)
    return max(vals)
