"""Victim selection for the LRU, LFU and LFU-DA deletion mechanisms."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyMap
from .graph import ElementKind, PolicyKind, ProcessMap, score

__all__ = [
    "AgingState",
    "PolicyKind",
    "Victim",
    "evict_once",
    "score",
    "select_victim",
]


@dataclass
class AgingState:
    """Dynamic aging factor used by LFU-DA. Starts at 0 and never decreases."""

    L: int = 0


@dataclass(frozen=True)
class Victim:
    kind: ElementKind
    ref: object
    key: int


def select_victim(policy: PolicyKind, pmap: ProcessMap, aging: AgingState | None = None) -> Victim:
    """Pick the element to delete.

    The minimal node score is compared against the minimal arc score; the
    arc is chosen only when it is strictly smaller, so ties go to the node.
    Within nodes (or arcs) ties fall to the earliest inserted entry.
    """
    if pmap.policy is not policy:
        raise ValueError(f"map is indexed for {pmap.policy.name}, not {policy.name}")
    node = pmap.min_node()
    arc = pmap.min_arc()
    if node is None and arc is None:
        raise EmptyMap("cannot select a victim from an empty map")
    min_a = score(policy, node) if node is not None else math.inf
    min_r = score(policy, arc) if arc is not None else math.inf
    if min_a > min_r:
        return Victim(ElementKind.ARC, arc.key, min_r)
    return Victim(ElementKind.NODE, node.key, min_a)


def evict_once(policy: PolicyKind, pmap: ProcessMap, aging: AgingState) -> int:
    """Delete one victim (cascading for nodes) and return the entries freed.

    Under LFU-DA the aging factor is raised to the victim's score.
    """
    victim = select_victim(policy, pmap, aging)
    removed = pmap.remove_element(victim.kind, victim.ref)
    if policy is PolicyKind.LFU_DA:
        aging.L = victim.key
    return removed
