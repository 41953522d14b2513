"""Benchmark suites, gap reports and the four-site golden example."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import greedy_policy, random_policy, rollout
from .environment import reset
from .errors import DimensionError, IllegalActionError, SizeError
from .exact import DEFAULT_CAP, solve_exact_dp
from .instance import Instance, generate
from .neural import load_checkpoint
from .objective import evaluate, optimality_gap
from .ppo import evaluate_policy

HELDOUT_SEED_BASE = 100_000

# ------------------------------------------------------------------ golden example


def golden_instance(d24: float = 240.0, d34: float = 50.0) -> Instance:
    """Four sites, D = 60.  Sites are 0-based here; the walkthrough labels them 1..4."""
    d = np.full((4, 4), 240.0)
    np.fill_diagonal(d, 0.0)
    for (i, j), v in {(0, 1): 3.0, (0, 2): 5.0, (1, 2): 6.0, (2, 3): d34, (0, 3): 240.0, (1, 3): d24}.items():
        d[i, j] = d[j, i] = v
    return Instance(4, 60.0, d)


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)  # (name, passed, detail)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    @property
    def failed_step(self):
        for name, ok, _ in self.checks:
            if not ok:
                return name
        return None

    def add(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))
        return ok

    def lines(self) -> list:
        return [f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
                for name, ok, detail in self.checks]


def verify_golden(inst: Instance = None) -> CheckReport:
    """Replay the four-site walkthrough; stops at the first failing check."""
    inst = inst if inst is not None else golden_instance()
    rep = CheckReport()
    one_based = lambda edges: sorted((i + 1, j + 1) for i, j in edges)

    state = reset(inst)
    avail = one_based(state.available_edges)
    if not rep.add("initial availability", avail == [(1, 2), (1, 3), (2, 3), (3, 4)], f"available={avail}"):
        return rep
    try:
        first = state.step((1, 2))
    except IllegalActionError as exc:
        rep.add("choose (2,3)", False, str(exc))
        return rep
    rep.add("choose (2,3)", True)
    if not rep.add("(3,4) removed", one_based(first.removed_edges) == [(3, 4)],
                   f"removed={one_based(first.removed_edges)}"):
        return rep
    try:
        second = state.step((0, 2))
    except IllegalActionError as exc:
        rep.add("choose (1,3)", False, str(exc))
        return rep
    rep.add("choose (1,3)", True)
    if not rep.add("(1,2) added", (1, 2) in one_based(second.added_edges),
                   f"added={one_based(second.added_edges)}"):
        return rep
    if not rep.add("terminal", second.terminal):
        return rep
    value = evaluate(inst, state.partition())
    if not rep.add("objective 74", value == 74.0, f"objective={value}"):
        return rep
    _, best = solve_exact_dp(inst)
    rep.add("exact optimum 74", best == 74.0, f"optimum={best}")
    return rep


# ------------------------------------------------------------------ suites


@dataclass(frozen=True)
class SuiteSpec:
    env: str
    n: int
    count: int
    seed_base: int = HELDOUT_SEED_BASE
    threshold: float = 60.0

    def instances(self) -> list:
        # seed = seed_base + index, so any row can be regenerated on its own
        return [generate(self.env, self.n, self.seed_base + i, self.threshold) for i in range(self.count)]


@dataclass(frozen=True)
class GapRow:
    instance_id: int
    method: str
    objective: float
    reference: float
    gap: float


STAT_NAMES = ("mean", "median", "min", "max")


@dataclass
class GapReport:
    rows: list
    reference_mode: str = "exact"

    @property
    def label(self) -> str:
        return "opt. gap" if self.reference_mode == "exact" else "regret vs best-known"

    @property
    def methods(self) -> list:
        seen = []
        for r in self.rows:
            if r.method not in seen:
                seen.append(r.method)
        return seen

    def gaps(self, method) -> list:
        return [r.gap for r in self.rows if r.method == method]

    def aggregates(self) -> dict:
        out = {}
        for m in self.methods:
            g = self.gaps(m)
            out[m] = {"mean": float(np.mean(g)), "median": float(statistics.median(g)),
                      "min": float(min(g)), "max": float(max(g))}
        return out


def _method_runner(method: str, suite: SuiteSpec, cap: int):
    if method == "random":
        return lambda insts: [rollout(inst, random_policy, suite.seed_base + i)[1] for i, inst in enumerate(insts)]
    if method == "greedy":
        return lambda insts: [rollout(inst, greedy_policy, 0)[1] for inst in insts]
    if method == "exact":
        if suite.n > cap:
            raise SizeError(f"exact method capped at n={cap}, suite has n={suite.n}")
        return lambda insts: [solve_exact_dp(inst, cap)[1] for inst in insts]
    if method.startswith("checkpoint:"):
        actor, critic, _ = load_checkpoint(method.split(":", 1)[1])
        if critic.n != suite.n:
            raise DimensionError(f"checkpoint was trained for n={critic.n}, suite has n={suite.n}")
        return lambda insts: evaluate_policy(insts, actor, greedy=True)
    raise ValueError(f"unknown method {method!r}")


def run_suite(methods, suite: SuiteSpec, reference_mode: str = "exact", cap: int = DEFAULT_CAP,
              instances=None, timings: dict = None) -> GapReport:
    """Run every method on every instance and price it against the reference.

    ``reference_mode`` is ``"exact"`` (subset DP, needs n <= cap) or
    ``"best-known"`` (per-instance best over the methods run).
    """
    if reference_mode not in ("exact", "best-known"):
        raise ValueError(f"unknown reference mode {reference_mode!r}")
    if reference_mode == "exact" and suite.n > cap:
        raise SizeError(f"exact reference capped at n={cap}, suite has n={suite.n}")
    insts = instances if instances is not None else suite.instances()
    runners = {m: _method_runner(m, suite, cap) for m in methods}
    results = {}
    for m, run in runners.items():
        t0 = time.perf_counter()
        results[m] = run(insts)
        if timings is not None:
            timings[m] = time.perf_counter() - t0
    if reference_mode == "exact":
        refs = [solve_exact_dp(inst, cap)[1] for inst in insts]
    else:
        refs = [min(results[m][k] for m in methods) for k in range(len(insts))]
    rows = [
        GapRow(k, m, results[m][k], refs[k], optimality_gap(results[m][k], refs[k]))
        for m in methods
        for k in range(len(insts))
    ]
    return GapReport(rows, reference_mode)


# ------------------------------------------------------------------ export


ROW_FIELDS = ["instance_id", "method", "objective", "reference", "gap"]


def format_table(report: GapReport) -> str:
    if not report.rows:
        raise ValueError("empty report")
    agg = report.aggregates()
    methods = report.methods
    label = report.label
    head = [""] + methods
    body = [[f"{stat.capitalize()} {label}"] + [f"{100 * agg[m][stat]:.2f}%" for m in methods]
            for stat in STAT_NAMES]
    widths = [max(len(r[c]) for r in [head] + body) for c in range(len(head))]
    fmt = lambda r: "  ".join(cell.ljust(w) if c == 0 else cell.rjust(w) for c, (cell, w) in enumerate(zip(r, widths)))
    rule = "-" * len(fmt(head))
    return "\n".join([rule, fmt(head), rule] + [fmt(r) for r in body] + [rule]) + "\n"


def export_tables(report: GapReport, path) -> tuple:
    """Write ``<path>.csv`` (per-instance rows) and ``<path>.txt`` (aggregates)."""
    if not report.rows:
        raise ValueError("empty report")
    base = Path(path)
    if base.suffix in (".csv", ".txt"):
        base = base.with_suffix("")
    csv_path, txt_path = base.with_suffix(".csv"), base.with_suffix(".txt")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ROW_FIELDS + ["reference_mode"])
        for r in report.rows:
            w.writerow([r.instance_id, r.method, repr(r.objective), repr(r.reference), repr(r.gap),
                        report.reference_mode])
    txt_path.write_text(format_table(report), encoding="utf-8")
    return csv_path, txt_path


def read_report(path) -> GapReport:
    rows, mode = [], "exact"
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            mode = rec.get("reference_mode") or mode
            rows.append(GapRow(int(rec["instance_id"]), rec["method"], float(rec["objective"]),
                               float(rec["reference"]), float(rec["gap"])))
    if not rows:
        raise ValueError(f"no rows in {path}")
    return GapReport(rows, mode)
