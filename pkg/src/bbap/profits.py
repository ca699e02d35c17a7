"""Profit function, duration sets and the seeded random instance generator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .model import Belt, DurationSet, Flight, Instance, sort_flights

MASK64 = (1 << 64) - 1


class DomainError(ValueError):
    pass


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, Weyl increment
    0x9E3779B97F4A7C15 and the Stafford variant-13 finalizer.

    Chosen because it is trivially portable, so a seed identifies the same
    instance in any language.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi] (rejection sampling, no modulo bias)."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span


@dataclass(frozen=True)
class ProfitParams:
    alpha: float = 0.5
    beta1: float = 500.0
    beta2: float = 500.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie strictly between 0 and 1")
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise DomainError("beta1 and beta2 must be positive")


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def profit(params: ProfitParams, t_max: int, t_req: int, nominal: int, t: int, w: int) -> int:
    """Weighted sum of a duration sigmoid and a linear start-time decay, rounded once."""
    if t_max == t_req:
        raise DomainError("t_req equals t_max: start-time term undefined")
    d = w - nominal
    # e^d / (1 + e^d) written to stay finite for large |d|
    sig = 1.0 / (1.0 + math.exp(-d)) if d >= 0 else math.exp(d) / (1.0 + math.exp(d))
    f = params.beta1 * sig
    g = params.beta2 * (t_max - t) / (t_max - t_req)
    return round_half_away(params.alpha * f + (1 - params.alpha) * g)


@dataclass(frozen=True)
class FormulaProfit:
    params: ProfitParams

    def value(self, inst: Instance, belt: int, flight: int, t: int, w: int) -> int:
        return profit(self.params, inst.t_max, inst.flights[flight].t_req,
                      inst.durations[belt, flight].nominal, t, w)


@dataclass(frozen=True)
class TableProfit:
    """Explicit ``(belt, flight, t, w) -> profit`` lookup."""

    table: Mapping[tuple[int, int, int, int], int] = field(hash=False)

    def value(self, inst: Instance, belt: int, flight: int, t: int, w: int) -> int:
        return self.table[belt, flight, t, w]


def nominal_duration(belt: Belt, flight: Flight) -> int:
    if flight.id not in belt.compatible_flights:
        raise DomainError(f"flight {flight.id} is not compatible with belt {belt.id}")
    rate = belt.effective_productivity(flight.bags)
    return max(1, math.ceil(flight.bags / rate))


def build_duration_set(nominal: int) -> DurationSet:
    """Five durations two minutes apart: up to two below nominal, the rest above."""
    if nominal < 1:
        raise DomainError("nominal duration must be >= 1")
    below = [w for w in (nominal - 4, nominal - 2) if w >= 1]
    above = [nominal + 2 * k for k in range(1, 5 - len(below))]
    return DurationSet(nominal, tuple(below + [nominal] + above))


@dataclass(frozen=True)
class GenConfig:
    n: int = 30
    m: int = 5
    t_max: int = 120
    treq_frac: float = 0.5
    bag_range: tuple[int, int] = (50, 300)
    productivity_range: tuple[int, int] = (10, 20)
    alpha: float = 0.5
    beta1: float = 500.0
    beta2: float = 500.0
    seed: int = 0

    def __post_init__(self):
        if min(self.n, self.m, self.t_max) < 1:
            raise DomainError("n, m and t_max must be >= 1")
        if not 0 < self.treq_frac <= 1:
            raise DomainError("treq_frac must lie in (0, 1]")
        for lo, hi in (self.bag_range, self.productivity_range):
            if lo > hi or lo < 1:
                raise DomainError(f"invalid range [{lo}, {hi}]")


def build_instance(flights, belts, t_max, profit_source, durations=None) -> Instance:
    """Assemble an instance from flights in arbitrary order.

    Flights are re-indexed into stable ``t_req`` order and every reference
    (compatibility, durations, profit tables) is remapped.  When
    ``durations`` is None they are derived with :func:`nominal_duration`
    and :func:`build_duration_set`.
    """
    order = sort_flights(flights)
    new_of = {flights[k].id: pos for pos, k in enumerate(order)}
    sorted_flights = tuple(Flight(pos, flights[k].bags, flights[k].t_req) for pos, k in enumerate(order))
    new_belts = tuple(
        Belt(i, b.productivity, frozenset(new_of[j] for j in b.compatible_flights), b.dual_station_threshold)
        for i, b in enumerate(belts)
    )
    if durations is None:
        ds = {}
        for b in new_belts:
            for j in b.compatible_flights:
                ds[b.id, j] = build_duration_set(nominal_duration(b, sorted_flights[j]))
    else:
        ds = {(i, new_of[j]): d for (i, j), d in durations.items()}
    if isinstance(profit_source, TableProfit):
        profit_source = TableProfit({(i, new_of[j], t, w): p for (i, j, t, w), p in profit_source.table.items()})
    return Instance(sorted_flights, new_belts, t_max, profit_source, ds)


def generate(cfg: GenConfig) -> Instance:
    """Random instance; draw order is all productivities, then all bag counts, then all t_req."""
    rng = SplitMix64(cfg.seed)
    prods = [rng.randint(*cfg.productivity_range) for _ in range(cfg.m)]
    bags = [rng.randint(*cfg.bag_range) for _ in range(cfg.n)]
    hi = math.floor(cfg.treq_frac * cfg.t_max)
    hi = min(hi, cfg.t_max - 1)
    treq = [rng.randint(0, hi) for _ in range(cfg.n)]
    flights = [Flight(j, bags[j], treq[j]) for j in range(cfg.n)]
    everyone = frozenset(range(cfg.n))
    belts = [Belt(i, prods[i], everyone) for i in range(cfg.m)]
    source = FormulaProfit(ProfitParams(cfg.alpha, cfg.beta1, cfg.beta2))
    return build_instance(flights, belts, cfg.t_max, source)
