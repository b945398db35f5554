import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from procmap.errors import UnknownTechnique, ZeroTotalFrequency
from procmap.evaluate import accuracy, evaluate, memory_words, offline_dfg
from procmap.events import Event
from procmap.graph import Snapshot

from oracles import brute_dfg, matrix_loss


def graph(arcs):
    nodes = {}
    for (s, t), f in arcs.items():
        nodes[s] = nodes.get(s, 0) + f
        nodes.setdefault(t, 0)
    return Snapshot(nodes, arcs)


def test_fines_offline_graph(fines_events):
    snap = offline_dfg(fines_events)
    nodes, arcs = brute_dfg(fines_events)
    assert dict(snap.nodes) == nodes and dict(snap.arcs) == arcs
    assert snap.nodes["Send Reminder"] == 6
    assert snap.arcs[("Send Reminder", "Send Reminder")] == 3
    assert sum(snap.starts.values()) == sum(snap.ends.values()) == 4
    assert snap.idx == 22


def test_two_event_log():
    snap = offline_dfg([Event("c", "A", 1), Event("c", "B", 2)])
    assert dict(snap.arcs) == {("A", "B"): 1}


def test_offline_sorts_by_timestamp_stably():
    snap = offline_dfg([Event("c", "B", 5), Event("c", "A", 1), Event("c", "C", 5)])
    assert dict(snap.arcs) == {("A", "B"): 1, ("B", "C"): 1}


def test_accuracy_examples():
    rest = {("X", str(i)): 9 for i in range(10)}
    complete = graph({("A", "B"): 10, **rest})
    assert accuracy(complete, complete).accuracy == 1
    empty = accuracy(complete, Snapshot({}, {}))
    assert (empty.loss, empty.total_frequency, empty.accuracy) == (100, 100, 0)
    worse = accuracy(complete, graph({("A", "B"): 7, **rest}))
    assert worse.loss == 3 and worse.accuracy == Fraction(97, 100)


def test_accuracy_clamps_spurious_mass():
    acc = accuracy(graph({("A", "B"): 1}), graph({("A", "B"): 1, ("B", "A"): 5}))
    assert acc.accuracy == 0 and acc.raw_accuracy == -4


def test_zero_total():
    with pytest.raises(ZeroTotalFrequency):
        accuracy(Snapshot({"A": 1}, {}), Snapshot({}, {}))


arcs_strategy = st.dictionaries(
    st.tuples(st.sampled_from("ABCDE"), st.sampled_from("ABCDE")), st.integers(1, 5), max_size=12)


@settings(max_examples=300, deadline=None)
@given(arcs_strategy.filter(bool), arcs_strategy)
def test_accuracy_matches_padded_matrices(a, b):
    loss, total, acc = matrix_loss(graph(a), graph(b))
    got = accuracy(graph(a), graph(b))
    assert (got.loss, got.total_frequency, got.raw_accuracy) == (loss, total, acc)


def test_memory_words():
    assert memory_words("lcb", 10, 20, 5) == 130
    assert memory_words("lfu", 10, 20, 5) == 95
    assert memory_words("lru", 10, 20, 5) == 125
    assert memory_words("LFU-DA", 10, 20, 5) == 125
    assert all(memory_words(t, 0, 0, 0) == 0 for t in ("lcb", "lru", "lfu", "lfu-da"))
    with pytest.raises(UnknownTechnique):
        memory_words("arc", 1, 1, 1)


def test_evaluate_report():
    complete = graph({("A", "B"): 4})
    found = Snapshot({"A": 4}, {("A", "B"): 3}, idx=9, meta={"technique": "lfu", "budget": 7})
    report = evaluate(complete, found, memory_words=130, ms_per_event=0.5)
    assert report.memory_bytes == 520
    d = report.to_dict()
    assert d["accuracy"] == 0.75 and d["accuracy_exact"] == "3/4"
    assert (d["technique"], d["budget"], d["events_processed"]) == ("lfu", 7, 9)


def test_random_logs_match_brute_force():
    rng = random.Random(11)
    for _ in range(30):
        events = [Event(f"c{rng.randrange(5)}", rng.choice("ABCD"), rng.randrange(50)) for _ in range(60)]
        nodes, arcs = brute_dfg(events)
        snap = offline_dfg(events)
        assert dict(snap.nodes) == nodes and dict(snap.arcs) == arcs
