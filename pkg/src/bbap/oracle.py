"""Brute-force exact solver for tiny instances.

Enumerates every flight-to-belt map and schedules each belt's flights with a
forward recursion over (next flight, earliest free minute) in which every
flight is mandatory.  Shares nothing with the pricing code beyond the data
model and the profit lookup.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .model import Assignment, Instance, Solution


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_flights: int = 8
    max_belts: int = 3
    max_tmax: int = 30

    def __post_init__(self):
        if min(self.max_flights, self.max_belts, self.max_tmax) < 1:
            raise ValueError("oracle limits must be positive")


NEG = float("-inf")


def best_belt_schedule(inst: Instance, belt: int, flights: tuple[int, ...]):
    """Best (profit, [(flight, start, duration)]) serving all ``flights`` in order, or None."""

    @lru_cache(maxsize=None)
    def go(k: int, free: int):
        if k == len(flights):
            return 0, ()
        j = flights[k]
        t_req = inst.flights[j].t_req
        best = None
        for w in inst.durations[belt, j].values:
            for s in range(max(free, t_req), inst.t_max - w + 1):
                rest = go(k + 1, s + w)
                if rest is None:
                    continue
                val = inst.p(belt, j, s, w) + rest[0]
                if best is None or val > best[0]:
                    best = (val, ((j, s, w),) + rest[1])
        return best

    return go(0, 0)


def oracle_solve(inst: Instance, limits: OracleLimits = OracleLimits()) -> tuple[Solution, int] | None:
    if inst.n > limits.max_flights or inst.m > limits.max_belts or inst.t_max > limits.max_tmax:
        raise OracleLimitError(
            f"instance ({inst.n} flights, {inst.m} belts, t_max {inst.t_max}) exceeds oracle limits "
            f"({limits.max_flights}, {limits.max_belts}, {limits.max_tmax})")
    options = [[i for i in range(inst.m) if inst.compatible(i, j)] for j in range(inst.n)]
    cache: dict[tuple[int, tuple[int, ...]], object] = {}
    best = None
    for mapping in itertools.product(*options):
        total = 0
        plan = []
        for i in range(inst.m):
            mine = tuple(j for j in range(inst.n) if mapping[j] == i)
            key = (i, mine)
            if key not in cache:
                cache[key] = best_belt_schedule(inst, i, mine)
            got = cache[key]
            if got is None:
                break
            total += got[0]
            plan.extend(Assignment(j, i, s, w) for j, s, w in got[1])
        else:
            if best is None or total > best[1]:
                best = (plan, total)
    if best is None:
        return None
    plan, total = best
    return Solution(tuple(sorted(plan, key=lambda a: a.flight)), total), total
