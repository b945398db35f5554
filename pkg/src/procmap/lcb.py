"""Lossy Counting with Budget baseline.

One shared pool of at most ``budget`` items covers activities, relations
and running cases.  Every item carries its observed count ``f`` and the
maximal under-count ``delta`` it may have accumulated before insertion.
When an insertion hits a full pool the bucket index ``w`` is advanced and
every item with ``f + delta <= w`` is dropped; if nothing qualifies, ``w``
keeps advancing until something does.

Case items are never expired by end events; they leave the pool only
through cleanup, like every other item.

This is a reconstruction from the published prose description; it is meant
as a comparison baseline, not a reference implementation.
"""
from __future__ import annotations

import heapq
from typing import Dict, Iterable, Tuple

from .events import Event, check_event
from .graph import Snapshot
from .miner import WORD_COSTS, UpdateReport

ACTIVITY, RELATION, CASE = "a", "r", "c"

_HEAP_SLACK = 64


class LcbItem:
    __slots__ = ("f", "delta", "seq", "payload")

    def __init__(self, f, delta, seq, payload=None):
        self.f = f
        self.delta = delta
        self.seq = seq
        self.payload = payload  # last activity, for case items

    def __repr__(self):
        return f"LcbItem(f={self.f}, delta={self.delta}, payload={self.payload!r})"


class LossyCountingBudget:
    technique = "lcb"

    def __init__(self, budget: int):
        if budget < 1:
            raise ValueError("budget must be positive")
        self.budget = budget
        self.items: Dict[Tuple[str, object], LcbItem] = {}
        self.w = 0
        self.idx = 0
        self._seq = 0
        self._heap: list = []  # (f + delta, seq, key), lazily invalidated
        self._counts = {ACTIVITY: 0, RELATION: 0, CASE: 0}

    def __len__(self):
        return len(self.items)

    @property
    def full(self) -> bool:
        return len(self.items) >= self.budget

    def _push(self, key, item):
        if len(self._heap) > 2 * len(self.items) + _HEAP_SLACK:
            self._heap = [(it.f + it.delta, it.seq, k) for k, it in self.items.items()]
            heapq.heapify(self._heap)
        heapq.heappush(self._heap, (item.f + item.delta, item.seq, key))

    def _top(self):
        """Heap top with an up-to-date bound, or None when empty.

        ``f + delta`` only grows while an item lives, so stored bounds are
        lower bounds and stale ones are refreshed in place.
        """
        heap, items = self._heap, self.items
        while heap:
            bound, seq, key = heap[0]
            item = items.get(key)
            if item is None or item.seq != seq:
                heapq.heappop(heap)
                continue
            current = item.f + item.delta
            if current == bound:
                return bound, key
            heapq.heapreplace(heap, (current, seq, key))
        return None

    def _remove(self, key):
        del self.items[key]
        self._counts[key[0]] -= 1

    def cleanup(self) -> int:
        """Advance ``w`` and drop every item with ``f + delta <= w``.

        Returns the number of items removed (at least one unless empty).
        """
        self.w += 1
        top = self._top()
        if top is None:
            return 0
        if top[0] > self.w:
            # same result as relaxing w one step at a time
            self.w = top[0]
        removed = 0
        while top is not None and top[0] <= self.w:
            heapq.heappop(self._heap)
            self._remove(top[1])
            removed += 1
            top = self._top()
        return removed

    def _count(self, key, payload=None) -> int:
        """Increment ``key`` or insert it; returns items removed by cleanup."""
        item = self.items.get(key)
        if item is not None:
            item.f += 1
            if payload is not None:
                item.payload = payload
            return 0
        removed = self.cleanup() if len(self.items) >= self.budget else 0
        self._seq += 1
        item = LcbItem(1, self.w, self._seq, payload)
        self.items[key] = item
        self._counts[key[0]] += 1
        self._push(key, item)
        return removed

    def observe(self, event: Event) -> UpdateReport:
        check_event(event)
        case_id, activity, _ = event
        report = UpdateReport()
        removed = self._count((ACTIVITY, activity))
        case_key = (CASE, case_id)
        case_item = self.items.get(case_key)
        if case_item is not None:
            prev = case_item.payload
            removed += self._count((RELATION, (prev, activity)))
            report.relation_recorded = (prev, activity)
        removed += self._count(case_key, activity)
        report.evicted_map_entries = removed
        self.idx += 1
        return report

    def feed(self, events: Iterable[Event]) -> "LossyCountingBudget":
        for e in events:
            self.observe(e)
        return self

    def counts(self):
        """(activities, relations, cases) currently stored."""
        c = self._counts
        return c[ACTIVITY], c[RELATION], c[CASE]

    def memory_words(self) -> int:
        a, r, c = WORD_COSTS["lcb"]
        n = self._counts
        return a * n[ACTIVITY] + r * n[RELATION] + c * n[CASE]

    def snapshot(self) -> Snapshot:
        """Graph view of the activity and relation items.

        Relations whose endpoint activity was cleaned up are kept; the
        missing endpoint is exported with frequency 0.
        """
        nodes: Dict[str, int] = {}
        arcs = {}
        for (kind, ref), item in self.items.items():
            if kind == ACTIVITY:
                nodes[ref] = item.f
            elif kind == RELATION:
                arcs[ref] = item.f
        for s, t in arcs:
            nodes.setdefault(s, 0)
            nodes.setdefault(t, 0)
        meta = {"technique": "lcb", "budget": self.budget}
        return Snapshot(nodes=nodes, arcs=arcs, idx=self.idx, meta=meta)
