"""Per-visit pipeline fold: normalize, predict, prune, package.

The analysis half (normalization and prediction) does not depend on the
user distribution, so it runs once per trace; packaging folds can then be
replayed cheaply for any distribution, which is what the simulator does
when sweeping revisit intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import package as pkg
from .normalize import NormalizedSet, drop_disappeared, normalize_step
from .predict import PredictorConfig, annotate_predictions, prune
from .trace import VisitTrace


@dataclass(frozen=True)
class VisitAnalysis:
    """Engine state right after one snapshot was folded in."""

    index: int
    visit_time_s: int
    state: NormalizedSet  # carried forward; predictions annotated
    candidates: NormalizedSet  # packageable view: zero-prediction members removed


def analyze_trace(
    trace: VisitTrace,
    predictor_cfg: PredictorConfig | None = None,
    initial_state: NormalizedSet | None = None,
) -> list[VisitAnalysis]:
    """Run normalization and prediction over every snapshot in order.

    Members absent at the latest visit are dropped from the carried state
    (they predict zero and rarely return); brand-new members stay even
    though they predict zero too, so they can earn history.
    """
    cfg = predictor_cfg or PredictorConfig()
    state = initial_state or NormalizedSet()
    analyses: list[VisitAnalysis] = []
    for index, snapshot in enumerate(trace.snapshots):
        state = drop_disappeared(normalize_step(state, snapshot))
        state = annotate_predictions(state, trace.visit_interval_s, cfg)
        analyses.append(
            VisitAnalysis(
                index=index,
                visit_time_s=snapshot.visit_time_s,
                state=state,
                candidates=prune(state),
            )
        )
    return analyses


@dataclass(frozen=True)
class EngineVisit:
    """Package engine output available to clients at one visit time."""

    index: int
    visit_time_s: int
    package: pkg.ResourcePackage
    decision: pkg.Decision
    manifest: bytes
    mapping: pkg.ResourceMapping
    mapping_bytes: bytes


def build_package_history(
    analyses: list[VisitAnalysis],
    sigma: pkg.UserDistribution,
    policy: pkg.PackagingPolicy,
    heuristic_duration_s: int,
) -> list[EngineVisit]:
    """Replay the packaging decisions across the analyzed visits."""
    history: list[EngineVisit] = []
    current: pkg.ResourcePackage | None = None
    manifest = b""
    mapping: pkg.ResourceMapping = ()
    mapping_bytes = b""
    for analysis in analyses:
        fresh = pkg.select_package(analysis.candidates, sigma, heuristic_duration_s)
        current, decision = pkg.maybe_replace(
            current, fresh, analysis.state, policy, analysis.visit_time_s
        )
        if decision is not pkg.Decision.KEPT:
            mapping = pkg.build_mapping(current)
            manifest = pkg.emit_manifest(current, mapping)
            mapping_bytes = pkg.emit_mapping(current)
        history.append(
            EngineVisit(
                index=analysis.index,
                visit_time_s=analysis.visit_time_s,
                package=current,
                decision=decision,
                manifest=manifest,
                mapping=mapping,
                mapping_bytes=mapping_bytes,
            )
        )
    return history
