"""Budgeted directly-follows graph.

A :class:`ProcessMap` holds activity nodes and directly-follows arcs, each
annotated with an observation frequency and the bookkeeping the eviction
policies need (recency stamp, aging credit, insertion sequence).  The
number of stored elements ``len(nodes) + len(arcs)`` never exceeds the
budget.

Every map keeps, for its eviction policy, one lazy min-heap over nodes and
one over arcs keyed by ``(score, insertion sequence)``.  Scores of a live
entry never decrease, so a heap key is always a lower bound of the entry's
current key: touches leave the heap alone and stale keys are refreshed when
they reach the top.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Mapping, Optional, Tuple

from .errors import BudgetViolation, DanglingEndpoint, NotFound

ArcKey = Tuple[str, str]

_HEAP_SLACK = 64


class PolicyKind(enum.Enum):
    LRU = "lru"
    LFU = "lfu"
    LFU_DA = "lfu-da"

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        norm = text.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == norm:
                return kind
        raise ValueError(f"unknown policy {text!r}")


class ElementKind(enum.Enum):
    NODE = "node"
    ARC = "arc"


class TouchResult(enum.Enum):
    INCREMENTED = "incremented"
    MISSING = "missing"


class ArcResult(enum.Enum):
    INCREMENTED = "incremented"
    INSERTED = "inserted"
    NEEDS_ROOM = "needs_room"


class NodeEntry:
    __slots__ = ("activity", "frequency", "last_seen_idx", "aging_credit", "seq")

    def __init__(self, activity, frequency=1, last_seen_idx=0, aging_credit=0, seq=0):
        self.activity = activity
        self.frequency = frequency
        self.last_seen_idx = last_seen_idx
        self.aging_credit = aging_credit
        self.seq = seq

    @property
    def key(self):
        return self.activity

    def __repr__(self):
        return (f"NodeEntry({self.activity!r}, frequency={self.frequency}, "
                f"last_seen_idx={self.last_seen_idx}, aging_credit={self.aging_credit})")


class ArcEntry:
    __slots__ = ("source", "target", "frequency", "last_seen_idx", "aging_credit", "seq")

    def __init__(self, source, target, frequency=1, last_seen_idx=0, aging_credit=0, seq=0):
        self.source = source
        self.target = target
        self.frequency = frequency
        self.last_seen_idx = last_seen_idx
        self.aging_credit = aging_credit
        self.seq = seq

    @property
    def key(self) -> ArcKey:
        return (self.source, self.target)

    def __repr__(self):
        return (f"ArcEntry({self.source!r}->{self.target!r}, frequency={self.frequency}, "
                f"last_seen_idx={self.last_seen_idx}, aging_credit={self.aging_credit})")


def score(policy: PolicyKind, entry, aging=None) -> int:
    """Eviction score of ``entry`` under ``policy``; lower scores go first.

    ``aging`` is accepted for symmetry with the other policy operations.
    LFU-DA scores with the aging credit stored at insertion time, not with
    the current aging factor.
    """
    if policy is PolicyKind.LFU:
        return entry.frequency
    if policy is PolicyKind.LRU:
        return entry.last_seen_idx
    return entry.frequency + entry.aging_credit


def lossless_budget(n_activities: int) -> int:
    """Element budget ``N(N+1)/2 + N`` (clique arcs, self-loops and nodes).

    This counts each unordered pair once. A directed graph may hold ``N*N``
    arcs, so use :func:`lossless_budget_directed` when eviction must be
    ruled out.
    """
    if n_activities < 1:
        raise ValueError("n_activities must be >= 1")
    return n_activities * (n_activities + 1) // 2 + n_activities


def lossless_budget_directed(n_activities: int) -> int:
    """``N*N + N``: every ordered pair including self-loops, plus the nodes."""
    if n_activities < 1:
        raise ValueError("n_activities must be >= 1")
    return n_activities * n_activities + n_activities


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of a directly-follows graph.

    ``starts``/``ends`` count how many cases began/ended with each activity;
    they are only populated when the producer tracked case boundaries.
    """

    nodes: Mapping[str, int]
    arcs: Mapping[ArcKey, int]
    idx: int = 0
    starts: Optional[Mapping[str, int]] = None
    ends: Optional[Mapping[str, int]] = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("nodes", "arcs", "starts", "ends", "meta"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(value)))

    def same_graph(self, other: "Snapshot") -> bool:
        """True when node and arc frequencies are identical."""
        return dict(self.nodes) == dict(other.nodes) and dict(self.arcs) == dict(other.arcs)

    @property
    def total_relation_frequency(self) -> int:
        return sum(self.arcs.values())


class ProcessMap:
    """Directly-follows graph bounded to ``budget`` elements (nodes + arcs)."""

    def __init__(self, budget: int, policy: PolicyKind = PolicyKind.LFU):
        if budget < 1:
            raise ValueError("budget must be positive")
        self.budget = budget
        self.policy = policy
        self.nodes: Dict[str, NodeEntry] = {}
        self.arcs: Dict[ArcKey, ArcEntry] = {}
        self._out: Dict[str, set] = {}
        self._in: Dict[str, set] = {}
        self._seq = 0
        self._node_heap: list = []
        self._arc_heap: list = []

    def __len__(self):
        return len(self.nodes) + len(self.arcs)

    def __repr__(self):
        return f"ProcessMap(budget={self.budget}, nodes={len(self.nodes)}, arcs={len(self.arcs)})"

    @property
    def full(self) -> bool:
        return len(self.nodes) + len(self.arcs) >= self.budget

    def _push(self, heap, table, entry):
        if len(heap) > 2 * len(table) + _HEAP_SLACK:
            # drop keys of removed entries
            heap[:] = [(score(self.policy, e), e.seq, k) for k, e in table.items()]
            heapq.heapify(heap)
        heapq.heappush(heap, (score(self.policy, entry), entry.seq, entry.key))

    def _peek(self, heap, table):
        policy = self.policy
        while heap:
            s, seq, key = heap[0]
            entry = table.get(key)
            if entry is None or entry.seq != seq:
                heapq.heappop(heap)
                continue
            current = score(policy, entry)
            if current == s:
                return entry
            heapq.heapreplace(heap, (current, seq, key))
        return None

    def min_node(self) -> Optional[NodeEntry]:
        """Node with the smallest (score, insertion sequence), or None."""
        return self._peek(self._node_heap, self.nodes)

    def min_arc(self) -> Optional[ArcEntry]:
        return self._peek(self._arc_heap, self.arcs)

    def touch_activity(self, activity: str, idx: int, aging: int = 0) -> TouchResult:
        entry = self.nodes.get(activity)
        if entry is None:
            return TouchResult.MISSING
        entry.frequency += 1
        if idx > entry.last_seen_idx:
            entry.last_seen_idx = idx
        return TouchResult.INCREMENTED

    def insert_activity(self, activity: str, idx: int, aging: int = 0) -> NodeEntry:
        if len(self.nodes) + len(self.arcs) >= self.budget:
            raise BudgetViolation(f"map is full ({self.budget} elements)")
        if activity in self.nodes:
            raise ValueError(f"activity {activity!r} already present")
        self._seq += 1
        entry = NodeEntry(activity, 1, idx, aging, self._seq)
        self.nodes[activity] = entry
        self._out[activity] = set()
        self._in[activity] = set()
        self._push(self._node_heap, self.nodes, entry)
        return entry

    def touch_or_insert_arc(self, source: str, target: str, idx: int, aging: int = 0) -> ArcResult:
        key = (source, target)
        entry = self.arcs.get(key)
        if entry is not None:
            entry.frequency += 1
            if idx > entry.last_seen_idx:
                entry.last_seen_idx = idx
            return ArcResult.INCREMENTED
        if source not in self.nodes or target not in self.nodes:
            missing = source if source not in self.nodes else target
            raise DanglingEndpoint(f"activity {missing!r} is not in the map")
        if len(self.nodes) + len(self.arcs) >= self.budget:
            return ArcResult.NEEDS_ROOM
        self._seq += 1
        entry = ArcEntry(source, target, 1, idx, aging, self._seq)
        self.arcs[key] = entry
        self._out[source].add(target)
        self._in[target].add(source)
        self._push(self._arc_heap, self.arcs, entry)
        return ArcResult.INSERTED

    def remove_element(self, kind: ElementKind, key) -> int:
        """Remove an arc, or a node together with every arc touching it.

        Returns the number of entries removed.
        """
        if kind is ElementKind.ARC:
            entry = self.arcs.pop(key, None)
            if entry is None:
                raise NotFound(key)
            self._out[entry.source].discard(entry.target)
            self._in[entry.target].discard(entry.source)
            return 1
        if key not in self.nodes:
            raise NotFound(key)
        removed = 1
        outgoing = self._out.pop(key)
        incoming = self._in.pop(key)
        for target in outgoing:
            del self.arcs[(key, target)]
            removed += 1
            if target != key:
                self._in[target].discard(key)
        for source in incoming:
            if source == key:
                continue  # self-loop, already removed with the outgoing arcs
            del self.arcs[(source, key)]
            removed += 1
            self._out[source].discard(key)
        del self.nodes[key]
        return removed

    def degree(self, activity: str) -> int:
        """Number of distinct arcs incident to ``activity``."""
        out, inc = self._out[activity], self._in[activity]
        return len(out) + len(inc) - (1 if activity in out else 0)

    def check_invariants(self):
        """Raise AssertionError if the map is inconsistent (test helper)."""
        assert len(self) <= self.budget, "budget exceeded"
        for (s, t), arc in self.arcs.items():
            assert s in self.nodes and t in self.nodes, f"dangling arc {s}->{t}"
            assert arc.frequency >= 1
            assert t in self._out[s] and s in self._in[t]
        for a, node in self.nodes.items():
            assert node.frequency >= 1
            for t in self._out[a]:
                assert (a, t) in self.arcs
            for s in self._in[a]:
                assert (s, a) in self.arcs
        assert set(self._out) == set(self.nodes) == set(self._in)

    def snapshot(self, idx: int = 0, **kwargs) -> Snapshot:
        return Snapshot(
            nodes={a: e.frequency for a, e in self.nodes.items()},
            arcs={k: e.frequency for k, e in self.arcs.items()},
            idx=idx,
            **kwargs,
        )
