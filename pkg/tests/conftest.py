import random

import numpy as np
import pytest

from bbap.model import Belt, DurationSet, Flight
from bbap.pricing import DualPrices
from bbap.profits import FormulaProfit, GenConfig, ProfitParams, TableProfit, build_instance, generate

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_instance(flights, t_max, belts=None, durations=None, profit=None):
    """flights: list of (bags, t_req); belts: list of (productivity, compatible or None)."""
    fl = [Flight(k, b, t) for k, (b, t) in enumerate(flights)]
    belts = belts or [(10, None)]
    bl = []
    for i, spec in enumerate(belts):
        comp = frozenset(range(len(fl))) if spec[1] is None else frozenset(spec[1])
        bl.append(Belt(i, spec[0], comp, spec[2] if len(spec) > 2 else None))
    if durations is not None:
        durations = {k: DurationSet(nom, tuple(vals)) for k, (nom, vals) in durations.items()}
    return build_instance(fl, bl, t_max, profit or FormulaProfit(ProfitParams()), durations)


def small_config(seed, rng=None):
    """Oracle-sized generator settings: n <= 8, m <= 3, t_max <= 30."""
    rng = rng or random.Random(seed)
    return GenConfig(n=rng.randint(2, 8), m=rng.randint(1, 3), t_max=rng.randint(15, 30),
                     treq_frac=rng.choice([0.5, 0.75]), bag_range=(5, 30), productivity_range=(5, 10),
                     alpha=rng.choice([0.5, 0.8]), seed=seed)


def small_instance(seed):
    return generate(small_config(seed))


def random_pricing_case(seed):
    """Single-belt instance with an arbitrary explicit profit table and dyadic duals.

    Returns ``(inst, duals)``.  Duals are multiples of 1/64 so that every
    partial sum is exact in binary floating point.
    """
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    T = rng.randint(5, 25)
    flights = [(rng.randint(1, 50), rng.randint(0, T - 1)) for _ in range(n)]
    durs, table = {}, {}
    for j in range(n):
        ws = sorted(rng.sample(range(1, 9), rng.randint(1, 3)))
        durs[0, j] = (ws[0], ws)
    # durations and the profit table refer to input positions; build_instance remaps them
    for j in range(n):
        for w in durs[0, j][1]:
            for t in range(T):
                table[0, j, t, w] = rng.randint(-40, 60)
    inst = build_instance([Flight(k, b, t) for k, (b, t) in enumerate(flights)],
                          [Belt(0, 10, frozenset(range(n)))], T, TableProfit(table),
                          {k: DurationSet(nom, tuple(v)) for k, (nom, v) in durs.items()})
    maxp = max(abs(v) for v in table.values())
    y = np.array([rng.randint(-64 * maxp, 64 * maxp) / 64 for _ in range(n)])
    u = np.array([rng.randint(0, 64 * maxp) / 64])
    return inst, DualPrices(y, u)


def brute_force_schedules(inst, belt, eligible):
    """Every feasible single-belt schedule over ``eligible`` (flight order kept)."""
    T = inst.t_max

    def go(k, free):
        if k == len(eligible):
            yield ()
            return
        yield from go(k + 1, free)
        j = eligible[k]
        for w in inst.durations[belt, j].values:
            for s in range(max(free, inst.flights[j].t_req), T - w + 1):
                for rest in go(k + 1, s + w):
                    yield ((j, s, w),) + rest

    yield from go(0, 0)


def brute_force_pricing(inst, belt, eligible, duals, forced=frozenset()):
    """Best reduced profit (without the belt dual) by full enumeration; None if forced set impossible."""
    best = None
    best_s = None
    for sched in brute_force_schedules(inst, belt, eligible):
        if not forced <= {j for j, _, _ in sched}:
            continue
        acc = 0.0
        for j, t, w in sched:
            acc = acc + (float(inst.p(belt, j, t, w)) - duals.y[j])
        if best is None or acc > best:
            best, best_s = acc, sched
    return best, best_s


@pytest.fixture
def tiny():
    return make_instance([(100, 0), (95, 5)], 40)
