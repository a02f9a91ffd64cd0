"""Update-time prediction for normalized resources.

For each resource we estimate how long it will stay unchanged, learned from
the gaps between its observed content changes.  The estimate is a scalar
gradient-descent fit: each new gap pulls the estimate toward it at the
learning rate, except that a gap far below the current estimate (an isolated
early change) only applies a damped step so one outlier cannot wreck a
long-established estimate.

Resources absent at the latest visit predict zero: once gone, they rarely
come back.  Resources that never changed after first sight predict one
visit interval per unchanged observation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .normalize import NormalizedResource, NormalizedSet, Status

# A gap below this fraction of the current estimate counts as an unusual,
# isolated change and triggers the damped update instead of the full step.
MODEST_GAP_FRACTION = 0.25


@dataclass(frozen=True)
class PredictorConfig:
    learning_rate: float = 0.1
    initial_estimate_s: int | None = None  # None: seed from the first observed gap
    modest_decay: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 < self.modest_decay <= 1.0:
            raise ValueError("modest_decay must be in (0, 1]")
        if self.initial_estimate_s is not None and self.initial_estimate_s <= 0:
            raise ValueError("initial_estimate_s must be positive when set")


def change_gaps_s(history: list[Status], visit_interval_s: int) -> list[int]:
    """Seconds between consecutive observed content changes.

    The first appearance counts as a change event but only later changes
    open gaps, so a never-updated resource yields no gaps at all.
    """
    change_indices = [i for i, s in enumerate(history) if s is Status.CHANGED]
    return [
        (b - a) * visit_interval_s for a, b in zip(change_indices, change_indices[1:])
    ]


def estimate_from_gaps(gaps: list[int], cfg: PredictorConfig) -> float:
    """Run the scalar gradient recurrence over gaps in chronological order."""
    if cfg.initial_estimate_s is not None:
        estimate = float(cfg.initial_estimate_s)
        remaining = gaps
    else:
        estimate = float(gaps[0])
        remaining = gaps[1:]
    for gap in remaining:
        step = cfg.learning_rate * (estimate - gap)
        if gap < MODEST_GAP_FRACTION * estimate:
            step *= cfg.modest_decay
        estimate -= step
    return max(estimate, 0.0)


def predict_update_time(
    resource: NormalizedResource, visit_interval_s: int, cfg: PredictorConfig
) -> int:
    """Predicted stable time in seconds, floored to whole visit intervals.

    The trace cannot resolve timing finer than one visit, so estimates are
    reported at visit granularity.
    """
    if not resource.history:
        raise ValueError("resource has an empty status history")
    if visit_interval_s <= 0:
        raise ValueError("visit_interval_s must be positive")

    if resource.latest_status is Status.INEXISTENT:
        return 0

    gaps = change_gaps_s(resource.history, visit_interval_s)
    if not gaps:
        unchanged = sum(1 for s in resource.history if s is Status.UNCHANGED)
        return unchanged * visit_interval_s

    estimate = estimate_from_gaps(gaps, cfg)
    return int(estimate // visit_interval_s) * visit_interval_s


def annotate_predictions(
    state: NormalizedSet, visit_interval_s: int, cfg: PredictorConfig
) -> NormalizedSet:
    """Return a copy of the set with every member's prediction filled in.

    Members are processed in a stable order (by representative URL) so
    results merge deterministically however the work is scheduled.
    """
    annotated = state.clone()
    for member in sorted(annotated.members, key=lambda m: m.representative_url):
        member.predicted_time_s = predict_update_time(member, visit_interval_s, cfg)
    return annotated


def prune(state: NormalizedSet) -> NormalizedSet:
    """Drop members whose predicted time is zero; everything else is kept.

    Requires every member to carry a prediction. Idempotent.
    """
    for m in state.members:
        if m.predicted_time_s is None:
            raise ValueError(f"member {m.representative_url!r} has no prediction")
    return NormalizedSet(
        members=[m.clone() for m in state.members if m.predicted_time_s != 0],
        next_uid=state.next_uid,
        visit_count=state.visit_count,
    )
