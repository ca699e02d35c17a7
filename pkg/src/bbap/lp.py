"""Dense revised simplex for small master problems.

Solves ``max c x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= 0`` and returns
primal values together with row duals.  Internally every row owns one
auxiliary column (a slack, or an artificial where no slack gives a feasible
start); auxiliaries come first so that appending structural columns keeps a
previous basis valid for warm starts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

EQ, LE = "=", "<="

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
REFACTOR_EVERY = 50


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    senses: list[str]
    b: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.asarray(self.A, dtype=float).reshape(len(self.senses), len(self.c))
        self.b = np.asarray(self.b, dtype=float)
        if not self.senses:
            raise ValueError("an LP needs at least one row")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("LP coefficients must be finite")
        bad = set(self.senses) - {EQ, LE}
        if bad:
            raise ValueError(f"unsupported row relation(s) {bad}")

    @classmethod
    def from_rows(cls, c: Sequence[float], rows: Sequence[tuple[Mapping[int, float], str, float]]):
        A = np.zeros((len(rows), len(c)))
        for r, (coefs, _, _) in enumerate(rows):
            for k, v in coefs.items():
                A[r, k] = v
        return cls(np.asarray(c, float), A, [s for _, s, _ in rows], np.array([rhs for _, _, rhs in rows], float))

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LpResult:
    status: str                     # optimal | infeasible | unbounded | numerical-failure
    primal: np.ndarray
    duals: np.ndarray
    objective: float
    basis: list[int] = field(default_factory=list)
    iterations: int = 0


class _Simplex:
    def __init__(self, p: LpProblem):
        self.p = p
        r, k = p.shape
        self.r, self.k = r, k
        aux = np.zeros((r, r))
        self.artificial = np.zeros(r, dtype=bool)
        for row in range(r):
            if p.senses[row] == LE and p.b[row] >= 0:
                aux[row, row] = 1.0
            elif p.senses[row] == LE:
                # slack cannot start basic; use an artificial (sign flips the row value)
                aux[row, row] = -1.0
                self.artificial[row] = True
            else:
                aux[row, row] = 1.0 if p.b[row] >= 0 else -1.0
                self.artificial[row] = True
        # <= rows with negative rhs still need a real slack: append it after the structurals
        self.extra_slack_rows = [row for row in range(r) if p.senses[row] == LE and p.b[row] < 0]
        extra = np.zeros((r, len(self.extra_slack_rows)))
        for e, row in enumerate(self.extra_slack_rows):
            extra[row, e] = 1.0
        self.M = np.hstack([aux, p.A, extra])
        self.ncol = self.M.shape[1]
        self.is_art = np.zeros(self.ncol, dtype=bool)
        self.is_art[:r] = self.artificial
        self.iterations = 0

    def refactor(self):
        B = self.M[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.p.b
        self.since_refactor = 0

    def install(self, basis):
        self.basis = list(basis)
        self.in_basis = np.zeros(self.ncol, dtype=bool)
        self.in_basis[self.basis] = True
        self.refactor()

    def run(self, cost: np.ndarray, allow: np.ndarray, limit: int) -> str:
        r = self.r
        bland = False
        degenerate = 0
        stall_limit = 5 * (r + self.ncol)
        while True:
            if self.iterations >= limit:
                return "numerical-failure"
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.M
            cand = allow & ~self.in_basis & (d > PIVOT_TOL)
            if not cand.any():
                return "optimal"
            if bland:
                e = int(np.flatnonzero(cand)[0])
            else:
                e = int(np.argmax(np.where(cand, d, -np.inf)))
            a = self.Binv @ self.M[:, e]
            basic_art = self.is_art[self.basis]
            ratios = np.full(r, np.inf)
            pos = a > PIVOT_TOL
            ratios[pos] = np.maximum(self.xB[pos], 0.0) / a[pos]
            # an artificial kept in the basis after phase one is pinned at zero
            pinned = basic_art & (np.abs(a) > PIVOT_TOL) & ~pos & self.phase2
            ratios[pinned] = 0.0
            if not np.isfinite(ratios).any():
                return "unbounded"
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12)
            if bland:
                leave = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            else:
                leave = int(ties[np.argmax(np.abs(a[ties]))])
            self.pivot(leave, e, a, float(ratios[leave]))
            self.iterations += 1
            if best <= 1e-12:
                degenerate += 1
                if degenerate > stall_limit and not bland:
                    log.debug("switching to Bland's rule after %d degenerate pivots", degenerate)
                    bland = True
            else:
                degenerate = 0

    def pivot(self, leave: int, enter: int, a: np.ndarray, theta: float):
        piv = a[leave]
        self.xB = self.xB - theta * a
        self.xB[leave] = theta
        row = self.Binv[leave] / piv
        self.Binv = self.Binv - np.outer(a, row)
        self.Binv[leave] = row
        self.in_basis[self.basis[leave]] = False
        self.basis[leave] = enter
        self.in_basis[enter] = True
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()


def solve_lp(p: LpProblem, basis: Sequence[int] | None = None, max_iter: int | None = None) -> LpResult:
    """Maximize ``p``; ``basis`` (internal indices from a previous result) warm-starts phase two."""
    s = _Simplex(p)
    r = s.r
    limit = max_iter or 50 * (r + s.ncol) + 1000
    nk = len(s.extra_slack_rows)
    cost2 = np.concatenate([np.zeros(r), p.c, np.zeros(nk)])
    allow2 = ~s.is_art
    s.phase2 = False

    warm = False
    if basis is not None and len(basis) == r and len(set(basis)) == r and max(basis) < s.ncol:
        try:
            s.install(basis)
            xb = s.xB
            warm = bool(np.all(xb >= -FEAS_TOL) and np.all(np.abs(xb[s.is_art[s.basis]]) <= FEAS_TOL))
        except np.linalg.LinAlgError:
            warm = False
    if not warm:
        s.install(list(range(r)))
        cost1 = -s.is_art.astype(float)
        if s.is_art.any():
            st = s.run(cost1, np.ones(s.ncol, dtype=bool), limit)
            if st != "optimal":
                return _fail(p, st, s)
            if cost1[s.basis] @ s.xB < -FEAS_TOL:
                return _fail(p, "infeasible", s)
    s.phase2 = True
    for attempt in range(3):
        st = s.run(cost2, allow2, limit)
        if st != "optimal":
            return _fail(p, st, s)
        s.refactor()
        res = _certify(p, s, cost2)
        if res is not None:
            return res
        log.debug("certificate check failed, refactoring (attempt %d)", attempt)
    return _fail(p, "numerical-failure", s)


def _fail(p: LpProblem, status: str, s: _Simplex) -> LpResult:
    r, k = p.shape
    return LpResult(status, np.full(k, np.nan), np.full(r, np.nan), np.nan, [], s.iterations)


def _certify(p: LpProblem, s: _Simplex, cost: np.ndarray) -> LpResult | None:
    r, k = p.shape
    full = np.zeros(s.ncol)
    full[s.basis] = np.maximum(s.xB, 0.0)
    x = full[r:r + k]
    y = cost[s.basis] @ s.Binv
    act = p.A @ x
    scale = 1.0 + np.abs(p.b)
    eq = np.array([sn == EQ for sn in p.senses])
    if np.any(np.abs(act - p.b)[eq] > FEAS_TOL * scale[eq]) or np.any((act - p.b)[~eq] > FEAS_TOL * scale[~eq]):
        return None
    if np.any(full[s.is_art] > FEAS_TOL):
        return None
    d = p.c - y @ p.A
    if np.any(d > FEAS_TOL * (1 + np.abs(p.c))) or np.any(y[~eq] < -FEAS_TOL):
        return None
    return LpResult("optimal", x, y, float(p.c @ x), list(s.basis), s.iterations)


def certificate(p: LpProblem, res: LpResult) -> dict:
    """Optimality evidence for an ``optimal`` result.

    ``duality_gap`` is ``|c x - b y|``; ``row_cs`` / ``col_cs`` are the worst
    ``|dual * slack|`` and ``|reduced cost * value|``; ``primal_infeas`` and
    ``dual_infeas`` are the worst bound violations.
    """
    x, y = res.primal, res.duals
    act = p.A @ x
    slack = p.b - act
    eq = np.array([s == EQ for s in p.senses])
    d = p.c - y @ p.A
    return {
        "duality_gap": abs(float(p.c @ x) - float(p.b @ y)),
        "row_cs": float(np.max(np.abs(y * slack), initial=0.0)),
        "col_cs": float(np.max(np.abs(d * x), initial=0.0)),
        "primal_infeas": float(max(np.max(np.abs(slack[eq]), initial=0.0), np.max(-slack[~eq], initial=0.0),
                                   np.max(-x, initial=0.0))),
        "dual_infeas": float(max(np.max(d, initial=0.0), np.max(-y[~eq], initial=0.0))),
    }
