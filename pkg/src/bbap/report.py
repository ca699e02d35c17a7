"""Benchmark records, table rows and figures."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .model import Instance, Solution  # noqa: E402

FAMILIES = {
    "n30m5": dict(n=30, m=5, t_max=120),
    "n50m10": dict(n=50, m=10, t_max=120),
}

RECORD_FIELDS = ["family", "seed", "alpha", "treq_frac", "objective", "ub", "time", "gap", "optimal", "nodes"]


@dataclass
class BenchRecord:
    family: str
    seed: int
    alpha: float
    treq_frac: float
    objective: int | None
    ub: float
    time: float
    gap: float
    optimal: bool
    nodes: int


@dataclass
class BenchSummary:
    count: int
    avg_time: float
    avg_gap: float
    n_opt: int
    avg_nodes: float

    def row(self) -> str:
        return (f"time {self.avg_time:.2f}\tgap(%) {self.avg_gap:.2f}\t"
                f"#opt {self.n_opt}/{self.count}\t#nodes {self.avg_nodes:.2f}")


def summarize(records: list[BenchRecord]) -> BenchSummary:
    k = len(records)
    if not k:
        return BenchSummary(0, math.nan, math.nan, 0, math.nan)
    return BenchSummary(
        k,
        sum(r.time for r in records) / k,
        sum(r.gap for r in records) / k,
        sum(1 for r in records if r.optimal),
        sum(r.nodes for r in records) / k,
    )


def records_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, RECORD_FIELDS, delimiter="\t", lineterminator="\n")
    w.writeheader()
    for r in records:
        d = asdict(r)
        d["time"] = f"{r.time:.2f}"
        d["gap"] = f"{r.gap:.2f}"
        d["ub"] = f"{r.ub:.2f}"
        w.writerow(d)
    return buf.getvalue()


def read_records(text: str) -> list[BenchRecord]:
    rows = csv.DictReader(io.StringIO(text), delimiter="\t")
    out = []
    for d in rows:
        out.append(BenchRecord(d["family"], int(d["seed"]), float(d["alpha"]), float(d["treq_frac"]),
                               None if d["objective"] in ("", "None") else int(d["objective"]),
                               float(d["ub"]), float(d["time"]), float(d["gap"]),
                               d["optimal"] == "True", int(d["nodes"])))
    return out


def plot_bench(records: list[BenchRecord], path) -> Path:
    """Per-seed time, gap and node count as three stacked bar panels."""
    path = Path(path)
    seeds = [str(r.seed) for r in records]
    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
    colors = ["tab:green" if r.optimal else "tab:red" for r in records]
    axes[0].bar(seeds, [r.time for r in records], color=colors)
    axes[0].set_ylabel("time (s)")
    axes[1].bar(seeds, [r.gap if math.isfinite(r.gap) else 0 for r in records], color=colors)
    axes[1].set_ylabel("gap (%)")
    axes[2].bar(seeds, [r.nodes for r in records], color=colors)
    axes[2].set_ylabel("# nodes")
    axes[2].set_xlabel("seed")
    if records:
        r0 = records[0]
        axes[0].set_title(f"{r0.family}, alpha={r0.alpha}, t_req frac={r0.treq_frac} (green = proven optimal)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_schedule(inst: Instance, sol: Solution, path) -> Path:
    """Gantt chart: one lane per belt, bars from start to finish, ticks at t_req."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(10, 0.6 * inst.m + 1.5))
    cmap = plt.get_cmap("tab20")
    for a in sol.assignments:
        ax.barh(a.belt, a.duration, left=a.start, height=0.6, color=cmap(a.flight % 20), edgecolor="black")
        ax.text(a.start + a.duration / 2, a.belt, str(a.flight), ha="center", va="center", fontsize=7)
        ax.plot([inst.flights[a.flight].t_req] * 2, [a.belt - 0.35, a.belt - 0.3], color="black", lw=1)
    ax.set_yticks(range(inst.m))
    ax.set_yticklabels([f"belt {i}" for i in range(inst.m)])
    ax.set_xlim(0, inst.t_max)
    ax.set_xlabel("minute")
    ax.set_title(f"objective {sol.objective}")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
