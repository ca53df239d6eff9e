import numpy as np
import pytest

from dynppr.dynamic import (
    DegreeUnderflowError,
    DynPprConfig,
    WorkCounter,
    advance_snapshot,
    apply_event_to_state,
    push_work_stats,
    replay_events,
)
from dynppr.graph import DELETE, INSERT, EdgeEvent, EventRecord, GraphSnapshot
from dynppr.push import PprState, PushConfig, forward_push

from conftest import invariant_defect, oracle_matrix, random_graph

ALPHA = 0.15


def fresh_pushed_state(g, s, eps):
    return forward_push(g, PprState.fresh(s), PushConfig(alpha=ALPHA, epsilon=eps))


def test_zero_estimate_is_noop():
    g = GraphSnapshot.from_edges([(0, 1), (2, 3)])
    state = PprState.fresh(0)  # p = 0 everywhere
    g.apply_events([EdgeEvent(2, 4)])
    apply_event_to_state(state, g, EdgeEvent(2, 4), ALPHA)
    assert state.estimate == {}
    assert state.residual == {0: 1.0}


def test_update_lines_hand_numbers():
    # u's degree goes 2 -> 3; with p(u) = 0.5 the adjustment is
    # delta = 0.5/2 = 0.25, r(u) -= 0.25/0.15, r(v) += 0.25/0.15 - 0.25.
    # v is fresh (p(v) = 0) so its half of the update is a no-op.
    g = GraphSnapshot.from_edges([(0, 1), (0, 2)])
    state = PprState(source=0, estimate={0: 0.5}, residual={})
    g.apply_events([EdgeEvent(0, 3)])
    apply_event_to_state(state, g, EdgeEvent(0, 3), ALPHA)
    assert state.estimate[0] == pytest.approx(0.75)
    assert state.residual[0] == pytest.approx(-0.25 / ALPHA)        # -1.6667
    assert state.residual[3] == pytest.approx(0.25 / ALPHA - 0.25)  # +1.4167


def test_half_update_conserves_signed_mass():
    # the three update lines cancel exactly: sum(p) + sum(r) is unchanged
    g = GraphSnapshot.from_edges([(0, 1), (1, 2), (0, 2), (2, 3)])
    state = fresh_pushed_state(g, 0, 1e-3)
    before = sum(state.estimate.values()) + sum(state.residual.values())
    g.apply_events([EdgeEvent(0, 3)])
    apply_event_to_state(state, g, EdgeEvent(0, 3), ALPHA)
    after = sum(state.estimate.values()) + sum(state.residual.values())
    assert after == pytest.approx(before, abs=1e-12)


@pytest.mark.parametrize("op", [INSERT, DELETE])
@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_invariant_exact_after_event(op, seed):
    # after the per-event adjustment the push invariant holds on the new
    # graph to machine precision (checked against the dense oracle)
    rng = np.random.default_rng(seed)
    g = random_graph(16, 0.3, seed)
    s = max(range(g.num_nodes), key=g.degree)
    state = fresh_pushed_state(g, s, 1e-3)
    if op == INSERT:
        pairs = [(a, b) for a in range(g.num_nodes) for b in range(a + 1, g.num_nodes)
                 if not g.has_edge(a, b) and g.degree(a) > 0 and g.degree(b) > 0]
    else:
        pairs = [(a, b) for a, b, _ in g.edges() if g.degree(a) > 1 and g.degree(b) > 1]
    a, b = pairs[rng.integers(len(pairs))]
    ev = EdgeEvent(a, b, op)
    g.apply_events([ev])
    apply_event_to_state(state, g, ev, ALPHA)
    assert invariant_defect(g, state, ALPHA) < 1e-10


def test_invariant_exact_after_batch_replay():
    g = random_graph(14, 0.3, 5)
    s = 0
    state = fresh_pushed_state(g, s, 1e-2)
    batch = [EdgeEvent(0, 13), EdgeEvent(2, 13), EdgeEvent(0, 13, DELETE)]
    # make the batch valid against g
    batch = [ev for ev in batch if not (ev.op == INSERT and g.has_edge(ev.u, ev.v))]
    record = []
    g.apply_events(batch, record=record)
    replay_events(state, record, ALPHA)
    assert invariant_defect(g, state, ALPHA) < 1e-10


def test_update_then_push_matches_from_scratch_bound():
    g = random_graph(40, 0.1, 8)
    s = 0
    eps = 1e-4
    state = fresh_pushed_state(g, s, eps)
    batch = []
    rng = np.random.default_rng(0)
    for _ in range(15):
        a = int(rng.integers(g.num_nodes))
        b = int(rng.integers(g.num_nodes))
        if a != b and not g.has_edge(a, b) and not any(
            e.u == a and e.v == b or e.u == b and e.v == a for e in batch
        ):
            batch.append(EdgeEvent(a, b))
    record = []
    g.apply_events(batch, record=record)
    replay_events(state, record, ALPHA)
    forward_push(g, state, PushConfig(alpha=ALPHA, epsilon=eps))
    # every entry within the eps*d(u) bound of a from-scratch push's target
    pis = oracle_matrix(g, ALPHA)
    err = np.abs(state.estimate_vector(g.num_nodes) - pis[:, s])
    bound = eps * np.asarray(g.csr()[3])
    assert (err <= bound + 1e-12).all()


def test_first_edge_of_settled_isolated_source_resets():
    # an isolated source settles p = 1_s; its first edge invalidates the
    # rescale formula, so the state is rebuilt and stays consistent
    g = GraphSnapshot()
    g.apply_events([EdgeEvent(1, 2)])
    state = fresh_pushed_state(g, 0, 1e-6)
    assert state.estimate == {0: 1.0}
    g.apply_events([EdgeEvent(0, 1)])
    apply_event_to_state(state, g, EdgeEvent(0, 1), ALPHA)
    assert invariant_defect(g, state, ALPHA) < 1e-12
    forward_push(g, state, PushConfig(alpha=ALPHA, epsilon=1e-8))
    from dynppr.push import ppr_dense_oracle

    dense = ppr_dense_oracle(g, 0, ALPHA)
    assert state.estimate_vector(3) == pytest.approx(dense, abs=1e-7)


def test_adaptive_l1_guarantee_on_growing_graph():
    # small-scale version of the streaming guarantee: with eps_t scaled by
    # the degree volume, ||p - pi||_1 <= epsilon at every snapshot
    epsilon = 0.1
    cfg = DynPprConfig(epsilon=epsilon, alpha=ALPHA, adaptive=True)
    g = random_graph(30, 0.08, 4)
    sources = [0, 1, 2]
    states = {s: fresh_pushed_state(g, s, cfg.batch_epsilon(g)) for s in sources}
    rng = np.random.default_rng(7)
    for _ in range(5):
        batch = []
        while len(batch) < 10:
            a = int(rng.integers(60))
            b = int(rng.integers(60))
            ok = a != b and not g.has_edge(a, b) if max(a, b) < g.num_nodes else a != b
            if ok and not any({e.u, e.v} == {a, b} for e in batch):
                batch.append(EdgeEvent(a, b))
        advance_snapshot(states, g, batch, cfg)
        pis = oracle_matrix(g, ALPHA)
        for s in sources:
            err = np.abs(states[s].estimate_vector(g.num_nodes) - pis[:, s]).sum()
            assert err <= epsilon
            # insertion-only history keeps estimates non-negative
            assert all(v >= 0 for v in states[s].estimate.values())


def test_order_insensitivity_at_bound_level():
    cfg = DynPprConfig(epsilon=0.05, alpha=ALPHA, adaptive=True)
    base = random_graph(20, 0.15, 6)
    batch = [EdgeEvent(0, 19), EdgeEvent(3, 18), EdgeEvent(5, 17), EdgeEvent(1, 16)]
    batch = [ev for ev in batch if not base.has_edge(ev.u, ev.v)]
    for order in (batch, batch[::-1]):
        g = base.copy()
        states = {0: fresh_pushed_state(g, 0, cfg.batch_epsilon(g))}
        advance_snapshot(states, g, order, cfg)
        pis = oracle_matrix(g, ALPHA)
        err = np.abs(states[0].estimate_vector(g.num_nodes) - pis[:, 0]).sum()
        assert err <= cfg.epsilon


def test_empty_batch_is_noop_fixed_mode():
    cfg = DynPprConfig(epsilon=1e-4, alpha=ALPHA, adaptive=False)
    g = random_graph(20, 0.2, 2)
    states = {0: fresh_pushed_state(g, 0, 1e-4)}
    p_before = dict(states[0].estimate)
    counter = WorkCounter()
    advance_snapshot(states, g, [], cfg, counter=counter)
    assert states[0].estimate == p_before
    assert sum(counter.per_batch_volume().values()) == 0.0


def test_work_counter_and_stats():
    cfg = DynPprConfig(epsilon=0.5, alpha=ALPHA, adaptive=True)
    g = GraphSnapshot.from_edges([(0, 1), (1, 2)])
    states = {0: fresh_pushed_state(g, 0, cfg.batch_epsilon(g))}
    counter = WorkCounter()
    advance_snapshot(states, g, [EdgeEvent(0, 2)], cfg, counter=counter)
    advance_snapshot(states, g, [EdgeEvent(1, 3)], cfg, counter=counter)
    stats = push_work_stats(counter)
    assert stats["batches"] == 2
    assert stats["total"] == pytest.approx(sum(v for _, v in stats["per_batch"]))
    # single fresh batch obeys the run-time lemma bound
    eps0 = cfg.batch_epsilon(g)
    fresh = PprState.fresh(0)
    forward_push(g, fresh, PushConfig(alpha=ALPHA, epsilon=eps0))
    assert fresh.pushed_volume <= (1.0 - fresh.residual_l1()) / (ALPHA * eps0) + 1e-9


def test_fixed_epsilon_degrades_relative_to_adaptive():
    # growing graph: the fixed-precision run ends with larger l1 error
    base = random_graph(30, 0.1, 12)
    vol0 = base.degree_volume
    rng = np.random.default_rng(3)
    batches = []
    sim = base.copy()
    for _ in range(8):
        batch = []
        while len(batch) < 25:
            a = int(rng.integers(120))
            b = int(rng.integers(120))
            present = sim.has_edge(a, b) if max(a, b) < sim.num_nodes else False
            if a != b and not present and not any({e.u, e.v} == {a, b} for e in batch):
                batch.append(EdgeEvent(a, b))
        sim.apply_events(batch)
        batches.append(batch)

    errors = {}
    for adaptive in (True, False):
        cfg = DynPprConfig(
            epsilon=0.1 if adaptive else 0.1 / vol0,
            alpha=ALPHA, adaptive=adaptive,
        )
        g = base.copy()
        states = {0: fresh_pushed_state(g, 0, cfg.batch_epsilon(g))}
        for batch in batches:
            advance_snapshot(states, g, batch, cfg)
        pis = oracle_matrix(g, ALPHA)
        errors[adaptive] = np.abs(states[0].estimate_vector(g.num_nodes) - pis[:, 0]).sum()
    assert errors[False] > errors[True]


def test_degree_underflow_is_internal_error():
    state = PprState(source=0, estimate={1: 0.5}, residual={})
    bad = EventRecord(1, 2, INSERT, 1.0, deg_u=0.5, deg_v=1.0)
    with pytest.raises(DegreeUnderflowError):
        replay_events(state, [bad], ALPHA)


def test_config_epsilon_cap():
    with pytest.raises(ValueError):
        DynPprConfig(epsilon=2.5)
    DynPprConfig(epsilon=2.0)  # boundary allowed


def test_weighted_event_update_preserves_invariant():
    g = GraphSnapshot.from_edges([(0, 1, 2.0), (1, 2, 1.0), (0, 2, 0.5)])
    state = fresh_pushed_state(g, 0, 1e-3)
    ev = EdgeEvent(0, 3, INSERT, weight=1.5)
    g.apply_events([ev])
    apply_event_to_state(state, g, ev, ALPHA)
    assert invariant_defect(g, state, ALPHA) < 1e-10


def test_threads_give_identical_states():
    cfg = DynPprConfig(epsilon=0.1, alpha=ALPHA, adaptive=True)
    base = random_graph(25, 0.15, 9)
    batch = [EdgeEvent(0, 24), EdgeEvent(2, 23)]
    batch = [ev for ev in batch if not base.has_edge(ev.u, ev.v)]
    results = []
    for threads in (1, 4):
        g = base.copy()
        states = {s: fresh_pushed_state(g, s, cfg.batch_epsilon(g)) for s in (0, 1, 2)}
        advance_snapshot(states, g, batch, cfg, threads=threads)
        results.append({s: dict(states[s].estimate) for s in states})
    assert results[0] == results[1]
