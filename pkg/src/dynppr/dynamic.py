"""Incremental maintenance of push states across edge-event batches.

Per edge event the estimate/residual pair of every tracked source is
adjusted so that the push invariant keeps holding on the post-event
graph, then a single push at the (optionally adaptive) batch precision
restores the residual threshold.  Per-batch cost is therefore governed
by the event count and average degree, not by the node count.

For an undirected edge both endpoint degrees change, so one event
expands to two half-updates, one per endpoint; each half-update for
Insert(u, v) with post-event degree d(u) and weight w is

    delta = p(u) * w / (d(u) - w)        (Delete: -p(u) * w / (d(u) + w))
    p(u) += delta
    r(u) -= delta / alpha
    r(v) += delta / alpha - delta

which moves no net mass: the three lines cancel exactly.

The adaptive precision for a batch ending at snapshot t is
eps_t = epsilon / volume_t with volume_t the degree volume sum_v d(v)
(twice the edge count for unit weights); summing the per-node error
bound eps_t * d(u) over all nodes then gives the global l1 guarantee
||p - pi||_1 <= epsilon at every snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .graph import INSERT, EdgeEvent, EventRecord, GraphSnapshot
from .push import DROP_THRESHOLD, PprState, PushConfig, forward_push
from .validation import check_alpha, check_epsilon


class DegreeUnderflowError(RuntimeError):
    """Internal error: an insert reported a post-event degree below the
    inserted weight (the degree index is corrupt)."""


@dataclass
class DynPprConfig:
    """Precision policy for dynamic tracking.

    adaptive=True scales the per-batch push precision by the inverse
    degree volume; adaptive=False pushes at the fixed global epsilon.
    """

    epsilon: float = 0.1
    alpha: float = 0.15
    adaptive: bool = True
    frontier: str = "fifo"

    def __post_init__(self):
        check_alpha(self.alpha)
        check_epsilon(self.epsilon, upper=2.0)

    def batch_epsilon(self, g: GraphSnapshot) -> float:
        if not self.adaptive:
            return self.epsilon
        volume = g.degree_volume
        return self.epsilon / volume if volume > 0 else 1.0


class WorkRecord(NamedTuple):
    snapshot: int
    source: int
    volume: float
    pushes: int


@dataclass
class WorkCounter:
    """Collects per-(batch, source) pushed-volume measurements."""

    records: list[WorkRecord] = field(default_factory=list)

    def add(self, snapshot: int, source: int, volume: float, pushes: int) -> None:
        self.records.append(WorkRecord(snapshot, source, volume, pushes))

    def per_batch_volume(self, window: Optional[Sequence[int]] = None) -> dict[int, float]:
        """Total pushed volume per snapshot index, optionally restricted
        to a window of snapshot indices."""
        out: dict[int, float] = {}
        for rec in self.records:
            if window is not None and rec.snapshot not in window:
                continue
            out[rec.snapshot] = out.get(rec.snapshot, 0.0) + rec.volume
        return out

    def per_source_volume(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for rec in self.records:
            out[rec.source] = out.get(rec.source, 0.0) + rec.volume
        return out


def push_work_stats(counter: WorkCounter, window: Optional[Sequence[int]] = None) -> dict:
    """Per-batch pushed-volume statistics over an optional snapshot window."""
    volumes = sorted(counter.per_batch_volume(window).items())
    values = [v for _, v in volumes]
    if not values:
        return {"batches": 0, "total": 0.0, "median": 0.0, "max": 0.0}
    values_sorted = sorted(values)
    mid = len(values_sorted) // 2
    if len(values_sorted) % 2:
        median = values_sorted[mid]
    else:
        median = 0.5 * (values_sorted[mid - 1] + values_sorted[mid])
    return {
        "batches": len(values),
        "total": sum(values),
        "median": median,
        "max": max(values),
        "per_batch": volumes,
    }


def _bump(mapping: dict[int, float], key: int, delta: float) -> None:
    val = mapping.get(key, 0.0) + delta
    if abs(val) < DROP_THRESHOLD:
        mapping.pop(key, None)
    else:
        mapping[key] = val


def _half_update(state: PprState, u: int, v: int, op: str, w: float,
                 deg_u_after: float, alpha: float) -> None:
    """Adjust (p, r) for the degree change of u caused by one event."""
    pu = state.estimate.get(u, 0.0)
    if pu == 0.0:
        return
    if op == INSERT:
        prev_deg = deg_u_after - w
        if prev_deg < 0:
            raise DegreeUnderflowError((u, v, deg_u_after, w))
        if prev_deg == 0.0:
            # First edge of a node that already carries settled mass
            # (an isolated source the dangling push settled): the rescale
            # formula has no meaning at degree 0, so rebuild from scratch.
            state.estimate.clear()
            state.residual.clear()
            state.residual[state.source] = 1.0
            return
        delta = pu * w / prev_deg
    else:
        delta = -pu * w / (deg_u_after + w)
    _bump(state.estimate, u, delta)
    _bump(state.residual, u, -delta / alpha)
    _bump(state.residual, v, delta / alpha - delta)


def apply_event_to_state(state: PprState, g_after: GraphSnapshot,
                         event: EdgeEvent, alpha: float) -> PprState:
    """Adjust one source state for a single already-applied event.

    Valid only when ``event`` is the sole difference between the state's
    graph and ``g_after`` (degrees are read from g_after).  Batch replay
    uses the recorded per-event degrees instead.
    """
    check_alpha(alpha)
    record = EventRecord(
        event.u, event.v, event.op, event.weight,
        g_after.degree(event.u), g_after.degree(event.v),
    )
    return replay_events(state, [record], alpha)


def replay_events(state: PprState, records: Iterable[EventRecord],
                  alpha: float) -> PprState:
    """Adjust a source state for a sequence of applied events, using the
    post-event degrees captured during graph application."""
    for rec in records:
        _half_update(state, rec.u, rec.v, rec.op, rec.weight, rec.deg_u, alpha)
        if rec.u != rec.v:
            _half_update(state, rec.v, rec.u, rec.op, rec.weight, rec.deg_v, alpha)
    return state


def advance_snapshot(
    states: dict[int, PprState],
    g: GraphSnapshot,
    batch: Sequence[EdgeEvent],
    cfg: DynPprConfig,
    counter: Optional[WorkCounter] = None,
    threads: int = 1,
) -> dict[int, PprState]:
    """Apply one batch to the graph, then bring every tracked state up to
    the batch precision: per-event adjustments in order, followed by one
    push at eps_t.

    Mutates g and the states; returns the states dict.  States are
    disjoint and the snapshot is immutable during the per-source phase,
    so threads > 1 fans the sources out over a worker pool.
    """
    record: list[EventRecord] = []
    g.apply_events(batch, record=record)
    eps_t = cfg.batch_epsilon(g)
    push_cfg = PushConfig(alpha=cfg.alpha, epsilon=eps_t, frontier=cfg.frontier)

    def bring_up_to_date(item: tuple[int, PprState]):
        source, state = item
        before_volume = state.pushed_volume
        before_count = state.push_count
        replay_events(state, record, cfg.alpha)
        forward_push(g, state, push_cfg)
        return (source, state.pushed_volume - before_volume,
                state.push_count - before_count)

    if threads > 1 and len(states) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(bring_up_to_date, states.items()))
    else:
        results = [bring_up_to_date(item) for item in states.items()]
    if counter is not None:
        for source, volume, pushes in results:
            counter.add(g.snapshot_index, source, volume, pushes)
    return states
