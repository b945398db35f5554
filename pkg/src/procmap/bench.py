"""Run techniques over a materialized log and sweep budgets."""
from __future__ import annotations

import csv
import logging
import math
import re
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .errors import UnknownTechnique
from .evaluate import BYTES_PER_WORD, accuracy, offline_dfg
from .events import Event
from .graph import PolicyKind, Snapshot, lossless_budget, lossless_budget_directed
from .lcb import LossyCountingBudget
from .miner import WORD_COSTS, MinerConfig, StreamMiner

log = logging.getLogger(__name__)

TECHNIQUES = ("lru", "lfu", "lfu-da", "lcb")
CSV_HEADER = ("technique", "budget", "accuracy", "peak_memory_words",
              "peak_memory_bytes", "ms_per_event", "events_processed")

_BUDGET_RE = re.compile(r"^(lossless|directed)(\d*)$")


def parse_budget(text: str, n_activities: Optional[int] = None) -> int:
    """Element count, or ``losslessN`` / ``directedN`` (N defaults to ``n_activities``)."""
    text = str(text).strip().lower()
    if text.isdigit():
        return int(text)
    m = _BUDGET_RE.match(text)
    if not m:
        raise ValueError(f"bad budget {text!r}")
    if m.group(2):
        n = int(m.group(2))
    elif n_activities is not None:
        n = n_activities
    else:
        raise ValueError(f"budget {text!r} needs an activity count")
    return lossless_budget(n) if m.group(1) == "lossless" else lossless_budget_directed(n)


def make_miner(technique: str, budget: int, b_rc: int = 10_000, end_activities=(),
               case_ttl: Optional[int] = None, trace=None):
    technique = technique.lower()
    if technique not in WORD_COSTS:
        raise UnknownTechnique(f"unknown technique {technique!r}")
    if technique == "lcb":
        return LossyCountingBudget(budget)
    cfg = MinerConfig(PolicyKind.parse(technique), budget, b_rc, frozenset(end_activities), case_ttl)
    return StreamMiner(cfg, trace=trace)


@dataclass
class RunResult:
    snapshot: Snapshot
    peak_memory_words: int
    ms_per_event: float
    p99_ms_per_event: float
    events_processed: int


def run(events: Iterable[Event], technique: str, budget: int, b_rc: int = 10_000,
        end_activities=(), case_ttl: Optional[int] = None, timing: bool = True) -> RunResult:
    """Feed ``events`` through one technique, tracking peak memory words.

    Timing covers only the update call for each event, not the source.
    """
    miner = make_miner(technique, budget, b_rc, end_activities, case_ttl)
    observe, mem = miner.observe, miner.memory_words
    peak = 0
    n = 0
    samples: List[int] = []
    if timing:
        clock = time.perf_counter_ns
        append = samples.append
        for e in events:
            t0 = clock()
            observe(e)
            append(clock() - t0)
            w = mem()
            if w > peak:
                peak = w
        n = len(samples)
    else:
        for e in events:
            observe(e)
            w = mem()
            if w > peak:
                peak = w
            n += 1
    mean = p99 = 0.0
    if timing and samples:
        mean = sum(samples) / n / 1e6
        p99 = (statistics.quantiles(samples, n=100)[98] if n > 1 else samples[0]) / 1e6
    snap = miner.snapshot()
    meta = dict(snap.meta)
    meta.update(peak_memory_words=peak, events_processed=n)
    if timing:
        meta.update(ms_per_event=round(mean, 6), p99_ms_per_event=round(p99, 6))
    snap = Snapshot(snap.nodes, snap.arcs, snap.idx, snap.starts, snap.ends, meta)
    return RunResult(snap, peak, mean, p99, n)


def auto_budgets(lo: int, hi: int, points: int = 12) -> List[int]:
    """Roughly geometric, strictly increasing integers from ``lo`` to ``hi``."""
    if hi <= lo or points < 2:
        return [max(lo, hi)]
    ratio = (hi / lo) ** (1 / (points - 1))
    out = []
    for i in range(points):
        b = hi if i == points - 1 else int(round(lo * ratio ** i))
        if not out or b > out[-1]:
            out.append(b)
    return out


@dataclass
class BenchRow:
    technique: str
    budget: int
    accuracy: Optional[float]
    peak_memory_words: Optional[int]
    ms_per_event: Optional[float]
    events_processed: int
    error: Optional[str] = None

    @property
    def peak_memory_bytes(self) -> Optional[int]:
        if self.peak_memory_words is None:
            return None
        return self.peak_memory_words * BYTES_PER_WORD

    def csv_fields(self, timing: bool = True) -> list:
        def fmt(v):
            return "" if v is None else v
        ms = "" if self.ms_per_event is None or not timing else f"{self.ms_per_event:.6f}"
        return [self.technique, self.budget, fmt(self.accuracy), fmt(self.peak_memory_words),
                fmt(self.peak_memory_bytes), ms, self.events_processed]


def bench(events: Sequence[Event], techniques: Sequence[str], budgets, b_rc: int = 10_000,
          end_activities=(), case_ttl: Optional[int] = None, timing: bool = True,
          complete: Optional[Snapshot] = None) -> List[BenchRow]:
    """One fresh run per (technique, budget) pair, scored against the offline graph.

    ``budgets`` is either a list of element counts shared by all techniques
    or a mapping from technique to its own list.  A failing run is logged
    and yields a row with empty metrics.
    """
    if complete is None:
        complete = offline_dfg(events)
    rows = []
    for tech in techniques:
        tech_budgets = budgets[tech] if isinstance(budgets, dict) else budgets
        for b in tech_budgets:
            try:
                res = run(events, tech, b, b_rc, end_activities, case_ttl, timing)
                acc = accuracy(complete, res.snapshot)
                rows.append(BenchRow(tech, b, float(acc.accuracy), res.peak_memory_words,
                                     res.ms_per_event if timing else None, res.events_processed))
            except Exception as exc:  # keep sweeping; the row records the failure
                log.error("run %s budget=%s failed: %s", tech, b, exc)
                rows.append(BenchRow(tech, b, None, None, None, 0, error=str(exc)))
    rows.sort(key=lambda r: (r.technique, r.budget))
    return rows


def default_budgets(techniques: Sequence[str], n_activities: int, n_cases: int = 0,
                    points: int = 12) -> dict:
    """Geometric sweep from 2 up to the directed lossless bound.

    LCB keeps case items in the same pool and never expires them, so its
    sweep extends by the number of cases in the log.
    """
    hi = lossless_budget_directed(max(1, n_activities))
    out = {}
    for tech in techniques:
        top = hi + n_cases if tech == "lcb" else hi
        out[tech] = auto_budgets(2, top, points)
    return out


def write_rows(rows: Iterable[BenchRow], out, timing: bool = True):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields(timing))


def read_rows(fh) -> List[dict]:
    return list(csv.DictReader(fh))


def min_memory_for(rows: Iterable[BenchRow], technique: str, target: float) -> float:
    """Smallest peak memory among rows of ``technique`` reaching ``target`` accuracy."""
    best = math.inf
    for r in rows:
        if r.technique == technique and r.accuracy is not None and r.accuracy >= target:
            best = min(best, r.peak_memory_words)
    return best
