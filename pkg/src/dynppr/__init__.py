"""dynppr: dynamic personalized PageRank tracking, hash-kernel node
embeddings, and structural change detection over edge-event streams."""

from .changes import (
    ChangeReport,
    CommuteEmbedder,
    CommuteState,
    ReportRow,
    build_report,
    commute_step,
    movement,
    z_scores,
)
from .dynamic import (
    DynPprConfig,
    WorkCounter,
    advance_snapshot,
    apply_event_to_state,
    push_work_stats,
    replay_events,
)
from .embedding import DynamicPPE, TrackerConfig, dynamic_ppe, dynamic_sne, static_embedding
from .graph import (
    DELETE,
    INSERT,
    EdgeEvent,
    GraphSnapshot,
    InvalidEventError,
    SnapshotSchedule,
    UnknownNodeError,
)
from .hashing import HashKernel, hash_project, inner_product_estimate
from .ista import (
    DanglingSourceError,
    NoConvergenceError,
    ista_solve,
    objective_value,
    ppr_ista,
)
from .push import (
    PprState,
    PushConfig,
    forward_push,
    ppr_dense_oracle,
    ppr_dense_oracle_all,
    ppr_power_iteration,
)
from .synth import GeneratedStream, InfeasibleSpecError, StreamSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ChangeReport",
    "CommuteEmbedder",
    "CommuteState",
    "DanglingSourceError",
    "DELETE",
    "DynamicPPE",
    "DynPprConfig",
    "EdgeEvent",
    "GeneratedStream",
    "GraphSnapshot",
    "HashKernel",
    "INSERT",
    "InfeasibleSpecError",
    "InvalidEventError",
    "NoConvergenceError",
    "PprState",
    "PushConfig",
    "ReportRow",
    "SnapshotSchedule",
    "StreamSpec",
    "TrackerConfig",
    "UnknownNodeError",
    "WorkCounter",
    "advance_snapshot",
    "apply_event_to_state",
    "build_report",
    "commute_step",
    "dynamic_ppe",
    "dynamic_sne",
    "forward_push",
    "generate",
    "hash_project",
    "inner_product_estimate",
    "ista_solve",
    "movement",
    "objective_value",
    "ppr_dense_oracle",
    "ppr_dense_oracle_all",
    "ppr_ista",
    "ppr_power_iteration",
    "push_work_stats",
    "replay_events",
    "static_embedding",
    "z_scores",
]
