"""Instance / solution files and compact-model LP export.

Both file types are JSON documents with a ``format_version`` key.  Emission
is canonical (sorted keys, fixed indentation) so equal data gives equal bytes.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import TextIO

from .model import Assignment, Belt, DurationSet, Flight, Instance, Solution
from .profits import FormulaProfit, ProfitParams, TableProfit, build_duration_set, build_instance, nominal_duration

FORMAT_VERSION = 1
DURATION_RULE = "spaced-five"


class FormatError(ValueError):
    """Input document does not follow the expected schema."""


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def _check_keys(obj, required, optional=(), where="document"):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise FormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise FormatError(f"{where}: missing keys {sorted(missing)}")


def _follows_rule(inst: Instance) -> bool:
    for (i, j), ds in inst.durations.items():
        try:
            if build_duration_set(nominal_duration(inst.belts[i], inst.flights[j])) != ds:
                return False
        except ValueError:
            return False
    return True


def instance_to_dict(inst: Instance) -> dict:
    belts = []
    for b in inst.belts:
        d = {"id": b.id, "productivity": _num(b.productivity), "compatible_flights": sorted(b.compatible_flights)}
        if b.dual_station_threshold is not None:
            d["dual_station_threshold"] = b.dual_station_threshold
        belts.append(d)
    flights = [{"id": f.id, "bags": f.bags, "t_req": f.t_req} for f in inst.flights]
    src = inst.profit
    if isinstance(src, FormulaProfit):
        prof = {"formula": {"alpha": src.params.alpha, "beta1": _num(src.params.beta1),
                            "beta2": _num(src.params.beta2)}}
    elif isinstance(src, TableProfit):
        prof = {"table": [[i, j, t, w, p] for (i, j, t, w), p in sorted(src.table.items())]}
    else:
        raise FormatError(f"cannot serialize profit source {type(src).__name__}")
    if _follows_rule(inst):
        durs = {"rule": DURATION_RULE}
    else:
        durs = {"explicit": [[i, j, ds.nominal, list(ds.values)] for (i, j), ds in sorted(inst.durations.items())]}
    return {"format_version": FORMAT_VERSION, "t_max": inst.t_max, "belts": belts, "flights": flights,
            "profit": prof, "durations": durs}


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n"


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(dumps_instance(inst).encode()).hexdigest()


def instance_from_dict(doc: dict) -> Instance:
    _check_keys(doc, ["format_version", "t_max", "belts", "flights", "profit", "durations"])
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {doc['format_version']}")
    try:
        flights = []
        for k, f in enumerate(doc["flights"]):
            _check_keys(f, ["id", "bags", "t_req"], where=f"flights[{k}]")
            flights.append(Flight(int(f["id"]), int(f["bags"]), int(f["t_req"])))
        ids = [f.id for f in flights]
        if sorted(ids) != list(range(len(ids))):
            raise FormatError("flight ids must be 0..n-1 without gaps")
        belts = []
        for k, b in enumerate(doc["belts"]):
            _check_keys(b, ["id", "productivity", "compatible_flights"], ["dual_station_threshold"],
                        where=f"belts[{k}]")
            if b["id"] != k:
                raise FormatError(f"belts[{k}]: id must equal position")
            compat = frozenset(int(j) for j in b["compatible_flights"])
            if not compat <= set(ids):
                raise FormatError(f"belts[{k}]: unknown flight in compatible_flights")
            thr = b.get("dual_station_threshold")
            belts.append(Belt(k, _num(b["productivity"]), compat, None if thr is None else int(thr)))
        prof = doc["profit"]
        _check_keys(prof, [], ["formula", "table"], where="profit")
        if len(prof) != 1:
            raise FormatError("profit: give exactly one of formula or table")
        if "formula" in prof:
            fm = prof["formula"]
            _check_keys(fm, ["alpha", "beta1", "beta2"], where="profit.formula")
            source = FormulaProfit(ProfitParams(float(fm["alpha"]), _num(fm["beta1"]), _num(fm["beta2"])))
        else:
            source = TableProfit({(int(i), int(j), int(t), int(w)): int(p) for i, j, t, w, p in prof["table"]})
        durs = doc["durations"]
        _check_keys(durs, [], ["rule", "explicit"], where="durations")
        if len(durs) != 1:
            raise FormatError("durations: give exactly one of rule or explicit")
        if "rule" in durs:
            if durs["rule"] != DURATION_RULE:
                raise FormatError(f"durations: unknown rule {durs['rule']!r}")
            ds = None
        else:
            ds = {(int(i), int(j)): DurationSet(int(nom), tuple(int(w) for w in vals))
                  for i, j, nom, vals in durs["explicit"]}
        return build_instance(flights, belts, int(doc["t_max"]), source, ds)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed instance: {exc}") from exc


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(doc)


def read_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def _finite(x):
    return None if x is None or not math.isfinite(x) else round(float(x), 6)


def dumps_solution(inst: Instance, sol: Solution, meta: dict | None = None) -> str:
    meta = meta or {}
    doc = {
        "format_version": FORMAT_VERSION,
        "instance_digest": instance_digest(inst),
        "assignments": [{"flight": a.flight, "belt": a.belt, "start": a.start, "duration": a.duration}
                        for a in sol.assignments],
        "objective": sol.objective,
        "solver": {
            "ub": _finite(meta.get("ub")),
            "gap_percent": _finite(meta.get("gap_percent")),
            "nodes": meta.get("nodes"),
            "elapsed_seconds": _finite(meta.get("elapsed_seconds")),
            "proven_optimal": meta.get("proven_optimal"),
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads_solution(text: str) -> tuple[Solution, str, dict]:
    """Return ``(solution, instance_digest, solver_metadata)``."""
    try:
        doc = json.loads(text)
        _check_keys(doc, ["format_version", "instance_digest", "assignments", "objective"], ["solver"])
        if doc["format_version"] != FORMAT_VERSION:
            raise FormatError(f"unsupported format_version {doc['format_version']}")
        assignments = []
        for k, a in enumerate(doc["assignments"]):
            _check_keys(a, ["flight", "belt", "start", "duration"], where=f"assignments[{k}]")
            assignments.append(Assignment(int(a["flight"]), int(a["belt"]), int(a["start"]), int(a["duration"])))
        meta = doc.get("solver") or {}
        _check_keys(meta, [], ["ub", "gap_percent", "nodes", "elapsed_seconds", "proven_optimal"], where="solver")
        return Solution(tuple(assignments), int(doc["objective"])), str(doc["instance_digest"]), meta
    except FormatError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed solution: {exc}") from exc


# ---------------------------------------------------------------- LP export

def _var(i, j, t, w):
    return f"x_{i}_{j}_{t}_{w}"


def _terms(coefs):
    out = []
    for k, (coef, name) in enumerate(coefs):
        sign = "-" if coef < 0 else "+"
        if k == 0:
            out.append(f"{'-' if coef < 0 else ''}{abs(coef)} {name}")
        else:
            out.append(f"{sign} {abs(coef)} {name}")
    return out


def _write_row(fh: TextIO, label: str, coefs, tail: str):
    terms = _terms(coefs)
    fh.write(f" {label}:")
    for k in range(0, len(terms), 8):
        fh.write(" " + " ".join(terms[k:k + 8]) + "\n")
        if k + 8 < len(terms):
            fh.write("  ")
    if not terms:
        fh.write(" 0 " + "\n")
    if tail:
        fh.write(f"  {tail}\n")


def admissible_vars(inst: Instance, i: int, j: int):
    for w in inst.durations[i, j].values:
        for t in range(inst.flights[j].t_req, inst.t_max - w + 1):
            yield t, w


def export_compact_lp(inst: Instance, fh: TextIO) -> None:
    """Write the compact time-indexed model with big-M pairwise rows, LP text format."""
    T = inst.t_max
    fh.write("\\ Baggage belt assignment: compact model\n")
    fh.write(f"\\ flights {inst.n}, belts {inst.m}, t_max {T}\n")
    fh.write("Maximize\n")
    obj = [(inst.p(i, j, t, w), _var(i, j, t, w))
           for i in range(inst.m) for j in sorted(inst.belts[i].compatible_flights)
           for t, w in admissible_vars(inst, i, j)]
    _write_row(fh, "profit", obj, "")
    fh.write("Subject To\n")
    for j in range(inst.n):
        row = [(1, _var(i, j, t, w)) for i in range(inst.m) if inst.compatible(i, j)
               for t, w in admissible_vars(inst, i, j)]
        _write_row(fh, f"assign_{j}", row, "= 1")
    for i in range(inst.m):
        mine = sorted(inst.belts[i].compatible_flights)
        for a, j in enumerate(mine):
            for jp in mine[a + 1:]:
                row = [(t + w + T, _var(i, j, t, w)) for t, w in admissible_vars(inst, i, j)]
                row += [(T - t, _var(i, jp, t, w)) for t, w in admissible_vars(inst, i, jp)]
                _write_row(fh, f"prec_{i}_{j}_{jp}", row, f"<= {2 * T}")
    fh.write("Binaries\n")
    for i in range(inst.m):
        for j in sorted(inst.belts[i].compatible_flights):
            for t, w in admissible_vars(inst, i, j):
                fh.write(f" {_var(i, j, t, w)}\n")
    fh.write("End\n")
