"""Online process-map construction with cache-replacement eviction."""
from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Optional, TextIO, Tuple

from .errors import EmptyStore
from .events import Event, check_event
from .graph import ArcResult, PolicyKind, ProcessMap, Snapshot, TouchResult
from .policies import AgingState, evict_once

# Words per stored activity, relation and case, by technique.
WORD_COSTS = {
    "lcb": (3, 4, 4),
    "lru": (3, 4, 3),
    "lfu": (2, 3, 3),
    "lfu-da": (3, 4, 3),
}


class RunningCaseStore:
    """Last activity of every open case, capped at ``budget`` cases.

    Entries are kept in update order so the least recently updated case is
    always first.
    """

    def __init__(self, budget: int):
        if budget < 1:
            raise ValueError("budget must be positive")
        self.budget = budget
        # case_id -> [last_activity, last_update_idx, first_seen_timestamp]
        self.entries: "OrderedDict[str, list]" = OrderedDict()

    def __len__(self):
        return len(self.entries)

    def __contains__(self, case_id):
        return case_id in self.entries

    def get(self, case_id):
        return self.entries.get(case_id)

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.budget

    def evict_case(self) -> str:
        """Remove and return the least recently updated case."""
        if not self.entries:
            raise EmptyStore("no cases to evict")
        case_id, _ = self.entries.popitem(last=False)
        return case_id

    def put(self, case_id: str, activity: str, idx: int, first_seen: int):
        entry = self.entries.get(case_id)
        if entry is None:
            self.entries[case_id] = [activity, idx, first_seen]
        else:
            entry[0] = activity
            entry[1] = idx
            self.entries.move_to_end(case_id)

    def discard(self, case_id: str):
        self.entries.pop(case_id, None)


@dataclass
class MinerConfig:
    policy: PolicyKind = PolicyKind.LFU
    b_pm: int = 1000
    b_rc: int = 1000
    end_activities: FrozenSet[str] = frozenset()
    case_ttl: Optional[int] = None  # milliseconds

    def __post_init__(self):
        if isinstance(self.policy, str):
            self.policy = PolicyKind.parse(self.policy)
        if self.b_pm < 2:
            raise ValueError("b_pm must be at least 2")
        if self.b_rc < 1:
            raise ValueError("b_rc must be positive")
        if self.case_ttl is not None and self.case_ttl < 0:
            raise ValueError("case_ttl must be non-negative")
        self.end_activities = frozenset(self.end_activities)


@dataclass
class UpdateReport:
    evicted_map_entries: int = 0
    evicted_cases: int = 0
    relation_recorded: Optional[Tuple[str, str]] = None
    case_expired: bool = False
    # set when the case had a predecessor but the arc could not be stored
    relation_dropped: bool = False


class StreamMiner:
    """Maintains a budgeted directly-follows graph from an event stream.

    Not thread-safe: feed it from one thread and hand :meth:`snapshot`
    results to others.
    """

    technique: str

    def __init__(self, config: MinerConfig, trace: Optional[TextIO] = None):
        self.config = config
        self.policy = config.policy
        self.technique = config.policy.value
        self.pmap = ProcessMap(config.b_pm, config.policy)
        self.cases = RunningCaseStore(config.b_rc)
        self.aging = AgingState()
        self.idx = 0
        self.trace = trace
        self._track_bounds = bool(config.end_activities)
        self._starts: dict = {}
        self._ends: dict = {}
        a, r, c = WORD_COSTS[self.technique]
        if config.case_ttl is not None:
            c += 1  # first-seen timestamp
        self._costs = (a, r, c)

    def is_expired(self, case_id: str, event: Event, first_seen: Optional[int] = None) -> bool:
        """Whether ``case_id`` should leave the running-case store after ``event``."""
        cfg = self.config
        if event.activity in cfg.end_activities:
            return True
        if cfg.case_ttl is not None:
            if first_seen is None:
                entry = self.cases.get(case_id)
                first_seen = entry[2] if entry is not None else event.timestamp
            return event.timestamp - first_seen > cfg.case_ttl
        return False

    def _evict(self) -> int:
        return evict_once(self.policy, self.pmap, self.aging)

    def observe(self, event: Event) -> UpdateReport:
        check_event(event)
        pmap = self.pmap
        case_id, activity, _ = event
        stamp = self.idx + 1
        aging = self.aging.L
        report = UpdateReport()

        if pmap.touch_activity(activity, stamp) is TouchResult.MISSING:
            if pmap.full:
                report.evicted_map_entries += self._evict()
                aging = self.aging.L
            pmap.insert_activity(activity, stamp, aging)

        entry = self.cases.get(case_id)
        if entry is not None:
            prev = entry[0]
            first_seen = entry[2]
            if prev in pmap.nodes and activity in pmap.nodes:
                result = pmap.touch_or_insert_arc(prev, activity, stamp, aging)
                if result is ArcResult.NEEDS_ROOM:
                    report.evicted_map_entries += self._evict()
                    aging = self.aging.L
                    # the eviction may have taken one of the arc's own endpoints
                    if prev in pmap.nodes and activity in pmap.nodes:
                        result = pmap.touch_or_insert_arc(prev, activity, stamp, aging)
                    else:
                        result = None
                if result is None:
                    report.relation_dropped = True
                else:
                    report.relation_recorded = (prev, activity)
            else:
                report.relation_dropped = True
        else:
            first_seen = event.timestamp
            if self.cases.full:
                self.cases.evict_case()
                report.evicted_cases += 1
            if self._track_bounds:
                self._starts[activity] = self._starts.get(activity, 0) + 1
        self.cases.put(case_id, activity, stamp, first_seen)

        if self.is_expired(case_id, event, first_seen):
            self.cases.discard(case_id)
            report.case_expired = True
            if self._track_bounds and activity in self.config.end_activities:
                self._ends[activity] = self._ends.get(activity, 0) + 1

        self.idx = stamp
        if self.trace is not None:
            self._write_trace(event, report)
        return report

    def _write_trace(self, event: Event, report: UpdateReport):
        rec = {
            "idx": self.idx,
            "case": event.case_id,
            "activity": event.activity,
            "relation": list(report.relation_recorded) if report.relation_recorded else None,
            "relation_dropped": report.relation_dropped,
            "evicted_map_entries": report.evicted_map_entries,
            "evicted_cases": report.evicted_cases,
            "case_expired": report.case_expired,
        }
        if self.policy is PolicyKind.LFU_DA:
            rec["L"] = self.aging.L
        self.trace.write(json.dumps(rec, sort_keys=True) + "\n")

    def feed(self, events: Iterable[Event]) -> "StreamMiner":
        for e in events:
            self.observe(e)
        return self

    def memory_words(self) -> int:
        a, r, c = self._costs
        return a * len(self.pmap.nodes) + r * len(self.pmap.arcs) + c * len(self.cases)

    def snapshot(self) -> Snapshot:
        bounds = {}
        if self._track_bounds:
            bounds = {"starts": dict(self._starts), "ends": dict(self._ends)}
        meta = {"technique": self.technique, "budget": self.config.b_pm}
        return self.pmap.snapshot(self.idx, meta=meta, **bounds)
