import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynppr.graph import (
    DELETE,
    INSERT,
    EdgeEvent,
    GraphSnapshot,
    InvalidEventError,
    SnapshotSchedule,
    UnknownNodeError,
)


def test_empty_batch_advances_snapshot_only():
    g = GraphSnapshot.from_edges([(0, 1)])
    t_before = g.snapshot_index
    g.apply_events([])
    assert g.snapshot_index == t_before + 1
    assert g.num_edges == 1
    assert g.neighbors(0) == [(1, 1.0)]


def test_first_insert_on_empty_graph():
    g = GraphSnapshot()
    g.apply_events([EdgeEvent(0, 1)])
    assert g.num_nodes == 2
    assert g.num_edges == 1
    assert g.degree(0) == 1.0
    assert g.degree(1) == 1.0


def test_insert_insert_delete_replay():
    # replayed by hand: a-b, b-c, then remove a-b
    g = GraphSnapshot()
    g.apply_events([
        EdgeEvent(0, 1),
        EdgeEvent(1, 2),
        EdgeEvent(0, 1, DELETE),
    ])
    assert g.num_nodes == 3
    assert g.num_edges == 1
    assert g.degree(0) == 0.0
    assert g.degree(1) == 1.0
    assert g.degree(2) == 1.0


def test_isolated_node_queries():
    g = GraphSnapshot()
    g.apply_events([EdgeEvent(0, 1), EdgeEvent(0, 1, DELETE)])
    assert g.degree(0) == 0.0
    assert g.neighbors(0) == []


def test_star_center_degree(star4):
    assert star4.degree(0) == 3.0
    assert star4.neighbors(0) == [(1, 1.0), (2, 1.0), (3, 1.0)]


def test_weighted_edge_degree_contribution():
    g = GraphSnapshot.from_edges([(0, 1, 2.5)])
    assert g.degree(0) == 2.5
    assert g.degree(1) == 2.5


def test_unknown_node_raises(two_node_path):
    with pytest.raises(UnknownNodeError):
        two_node_path.degree(5)
    with pytest.raises(UnknownNodeError):
        two_node_path.neighbors(-1)


def test_duplicate_insert_rejected(two_node_path):
    with pytest.raises(InvalidEventError):
        two_node_path.apply_events([EdgeEvent(1, 0)])


def test_delete_absent_rejected():
    g = GraphSnapshot.from_edges([(0, 1)])
    with pytest.raises(InvalidEventError):
        g.apply_events([EdgeEvent(0, 2, DELETE)])


def test_batch_rejection_is_atomic():
    g = GraphSnapshot.from_edges([(0, 1)])
    t = g.snapshot_index
    bad = [EdgeEvent(1, 2), EdgeEvent(1, 2)]  # second is a duplicate
    with pytest.raises(InvalidEventError):
        g.apply_events(bad)
    assert g.num_edges == 1
    assert g.num_nodes == 2
    assert g.snapshot_index == t


def test_in_batch_reinsert_after_delete_is_valid():
    g = GraphSnapshot.from_edges([(0, 1)])
    g.apply_events([EdgeEvent(0, 1, DELETE), EdgeEvent(0, 1, INSERT, weight=2.0)])
    assert g.degree(0) == 2.0


def test_self_loop_rejected_by_default():
    with pytest.raises(InvalidEventError):
        GraphSnapshot().apply_events([EdgeEvent(3, 3)])


def test_self_loop_allowed_when_enabled():
    g = GraphSnapshot(allow_self_loops=True)
    g.apply_events([EdgeEvent(2, 2)])
    assert g.degree(2) == 1.0
    assert g.num_edges == 1


event_sequences = st.lists(
    st.tuples(st.integers(0, 7), st.integers(0, 7)).filter(lambda e: e[0] != e[1]),
    max_size=40,
)


def _to_valid_events(pairs):
    """Turn arbitrary pairs into a valid insert/delete sequence: toggle the
    edge presence each time the pair comes up."""
    present = set()
    events = []
    for u, v in pairs:
        key = (min(u, v), max(u, v))
        if key in present:
            events.append(EdgeEvent(u, v, DELETE))
            present.discard(key)
        else:
            events.append(EdgeEvent(u, v, INSERT))
            present.add(key)
    return events


@given(event_sequences)
@settings(max_examples=100, deadline=None)
def test_degree_index_matches_adjacency(pairs):
    g = GraphSnapshot()
    g.apply_events(_to_valid_events(pairs))
    assert g.degrees_from_adjacency() == g._deg


@given(event_sequences)
@settings(max_examples=100, deadline=None)
def test_adjacency_symmetry(pairs):
    g = GraphSnapshot()
    g.apply_events(_to_valid_events(pairs))
    for u in range(g.num_nodes):
        for v, w in g.neighbors(u):
            assert (u, w) in g.neighbors(v) or (u, w) == (v, w) and g.has_edge(u, u)


@given(event_sequences, st.integers(0, 40))
@settings(max_examples=60, deadline=None)
def test_batch_splitting_associativity(pairs, split):
    events = _to_valid_events(pairs)
    split = min(split, len(events))
    g1 = GraphSnapshot()
    g1.apply_events(events[:split])
    g1.apply_events(events[split:])
    g2 = GraphSnapshot()
    g2.apply_events(events)
    assert g1._adj == g2._adj
    assert g1.num_edges == g2.num_edges
    # snapshot indices differ by construction
    assert g1.snapshot_index == 2 and g2.snapshot_index == 1


def test_csr_view_roundtrip(triangle):
    indptr, indices, weights, degrees = triangle.csr()
    assert list(degrees) == [2.0, 2.0, 2.0]
    assert indptr[-1] == 6  # each undirected edge appears twice
    # cache invalidates on mutation
    triangle.apply_events([EdgeEvent(0, 3)])
    assert triangle.csr()[3][0] == 3.0


def test_schedule_by_event_count():
    events = [EdgeEvent(i, i + 1, timestamp=i) for i in range(5)]
    batches = SnapshotSchedule(mode="events", batch_size=2).batches(events)
    assert [len(b) for b in batches] == [2, 2, 1]


def test_schedule_by_cuts():
    events = [EdgeEvent(i, i + 1, timestamp=i * 10) for i in range(5)]
    batches = SnapshotSchedule(mode="cuts", cuts=[5, 25]).batches(events)
    assert [len(b) for b in batches] == [1, 2, 2]


def test_schedule_validation():
    with pytest.raises(ValueError):
        SnapshotSchedule(mode="events", batch_size=0)
    with pytest.raises(ValueError):
        SnapshotSchedule(mode="cuts", cuts=[5, 5])
    with pytest.raises(ValueError):
        SnapshotSchedule(mode="bogus")
