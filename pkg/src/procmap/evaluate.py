"""Exact offline graph, accuracy against it, and word-based memory cost."""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import UnknownTechnique, ZeroTotalFrequency
from .events import Event
from .graph import Snapshot
from .miner import WORD_COSTS

BYTES_PER_WORD = 4


def offline_dfg(events: Iterable[Event]) -> Snapshot:
    """Directly-follows graph of a complete log.

    Events are stably sorted by timestamp, so ties keep their input order.
    """
    ordered = sorted(events, key=lambda e: e.timestamp)
    last = {}
    nodes: Counter = Counter()
    arcs: Counter = Counter()
    starts: Counter = Counter()
    for case_id, activity, _ in ordered:
        nodes[activity] += 1
        prev = last.get(case_id)
        if prev is None:
            starts[activity] += 1
        else:
            arcs[(prev, activity)] += 1
        last[case_id] = activity
    ends = Counter(last.values())
    return Snapshot(nodes=dict(nodes), arcs=dict(arcs), idx=len(ordered),
                    starts=dict(starts), ends=dict(ends))


@dataclass(frozen=True)
class Accuracy:
    loss: int
    total_frequency: int
    accuracy: Fraction      # clamped to [0, 1]
    raw_accuracy: Fraction  # may go negative when spurious mass is large


def accuracy(complete: Snapshot, discovered: Snapshot) -> Accuracy:
    """Compare relation frequencies of ``discovered`` against ``complete``.

    Loss sums ``|f_complete - f_discovered|`` over the union of relations,
    a missing relation counting as frequency 0.  Node frequencies are not
    part of the metric.
    """
    total = sum(complete.arcs.values())
    if total <= 0:
        raise ZeroTotalFrequency("the complete graph has no relations")
    ref, got = complete.arcs, discovered.arcs
    loss = 0
    for key, f in ref.items():
        loss += abs(f - got.get(key, 0))
    for key, f in got.items():
        if key not in ref:
            loss += f
    raw = 1 - Fraction(loss, total)
    return Accuracy(loss, total, max(raw, Fraction(0)), raw)


def memory_words(technique: str, n_nodes: int, n_arcs: int, n_cases: int) -> int:
    try:
        a, r, c = WORD_COSTS[technique.lower()]
    except KeyError:
        raise UnknownTechnique(f"unknown technique {technique!r}") from None
    if min(n_nodes, n_arcs, n_cases) < 0:
        raise ValueError("counts must be non-negative")
    return a * n_nodes + r * n_arcs + c * n_cases


@dataclass(frozen=True)
class EvalReport:
    loss: int
    total_frequency: int
    accuracy: Fraction
    raw_accuracy: Fraction
    memory_words: int
    ms_per_event: float
    technique: str = ""
    budget: Optional[int] = None
    events_processed: int = 0

    @property
    def memory_bytes(self) -> int:
        return self.memory_words * BYTES_PER_WORD

    def to_dict(self) -> dict:
        d = asdict(self)
        d["accuracy"] = float(self.accuracy)
        d["accuracy_exact"] = str(self.accuracy)
        d["raw_accuracy"] = float(self.raw_accuracy)
        d["memory_bytes"] = self.memory_bytes
        return d


def evaluate(complete: Snapshot, discovered: Snapshot, memory_words: int = 0,
             ms_per_event: float = 0.0) -> EvalReport:
    acc = accuracy(complete, discovered)
    meta = discovered.meta or {}
    return EvalReport(
        loss=acc.loss,
        total_frequency=acc.total_frequency,
        accuracy=acc.accuracy,
        raw_accuracy=acc.raw_accuracy,
        memory_words=memory_words,
        ms_per_event=ms_per_event,
        technique=str(meta.get("technique", "")),
        budget=meta.get("budget"),
        events_processed=discovered.idx,
    )
