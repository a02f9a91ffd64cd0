"""Evaluation metrics and the report file format.

For every (app, revisit interval) pair the report carries the traffic of
both simulated clients, the saved fraction, how well the engine's resource
list at time t covers the resources seen one interval later, the precision
of the stability predictions, and the observed package lifetimes and
manifest sizes.

Prediction precision here is artifact-defined: a prediction counts as
correct when the resource sees no change or disappearance within the
predicted window.  The report header flags this definition explicitly.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import EngineVisit, VisitAnalysis, analyze_trace, build_package_history
from .package import PackagingPolicy, UserDistribution
from .predict import PredictorConfig
from .simulate import (
    CachePolicyConfig,
    TransferLedger,
    simulate_baseline,
    simulate_rewap,
)
from .normalize import Status
from .trace import VisitTrace

REPORT_HEADER = "#rewap-report v1"

REPORT_COLUMNS = (
    "app",
    "interval_s",
    "baseline_bytes",
    "rewap_bytes",
    "saved_fraction",
    "coverage_rate",
    "prediction_precision",
    "package_duration_median_s",
    "manifest_size_max_bytes",
)


@dataclass(frozen=True)
class AppIntervalResult:
    app_id: str
    revisit_interval_s: int
    baseline_bytes: int
    rewap_bytes: int
    saved_fraction: float | None
    coverage_rate: float | None
    prediction_precision: float | None
    package_durations_s: tuple[int, ...]
    manifest_sizes_bytes: tuple[int, ...]


@dataclass(frozen=True)
class SimulationReport:
    results: tuple[AppIntervalResult, ...]

    def for_interval(self, interval_s: int) -> list[AppIntervalResult]:
        return [r for r in self.results if r.revisit_interval_s == interval_s]


def saved_fraction(baseline_bytes: int, rewap_bytes: int) -> float | None:
    if baseline_bytes <= 0:
        return None
    return (baseline_bytes - rewap_bytes) / baseline_bytes


def coverage_rate(analyses: Sequence[VisitAnalysis], trace: VisitTrace, delta_visits: int) -> float | None:
    """Fraction of resources at t+delta already matched by the set at t."""
    covered = 0
    total = 0
    for t in range(len(analyses) - delta_visits):
        state = analyses[t].state
        for resource in trace.snapshots[t + delta_visits].resources:
            total += 1
            if state.matching_members(resource.url):
                covered += 1
    if total == 0:
        return None
    return covered / total


def prediction_precision(analyses: Sequence[VisitAnalysis], delta_visits: int, visit_interval_s: int) -> float | None:
    """Among members predicted stable for at least the interval, the share
    that actually saw no change or disappearance across it."""
    claims = 0
    correct = 0
    horizon_s = delta_visits * visit_interval_s
    for t in range(len(analyses) - delta_visits):
        future = analyses[t + delta_visits].state
        for member in analyses[t].state.members:
            if member.predicted_time_s is None or member.predicted_time_s < horizon_s:
                continue
            claims += 1
            survivor = future.get(member.uid)
            if survivor is None:
                continue  # dropped: disappeared inside the window
            start = t + 1 - survivor.first_visit_index
            window = survivor.history[start : start + delta_visits]
            if len(window) == delta_visits and all(s is Status.UNCHANGED for s in window):
                correct += 1
    if claims == 0:
        return None
    return correct / claims


def package_adoptions(engine_visits: Sequence[EngineVisit]) -> list[EngineVisit]:
    from .package import Decision

    return [v for v in engine_visits if v.decision is not Decision.KEPT]


def package_durations_s(engine_visits: Sequence[EngineVisit]) -> tuple[int, ...]:
    """Lifetimes between consecutive package adoptions."""
    times = [v.visit_time_s for v in package_adoptions(engine_visits)]
    return tuple(b - a for a, b in zip(times, times[1:]))


def manifest_sizes_bytes(engine_visits: Sequence[EngineVisit]) -> tuple[int, ...]:
    return tuple(len(v.manifest) for v in package_adoptions(engine_visits))


def evaluate_pair(
    trace: VisitTrace,
    analyses: Sequence[VisitAnalysis],
    revisit_interval_s: int,
    cache_cfg: CachePolicyConfig,
    policy: PackagingPolicy,
) -> tuple[AppIntervalResult, TransferLedger, TransferLedger, list[EngineVisit]]:
    """Simulate one (app, interval) pair, assuming all users revisit at it."""
    sigma = UserDistribution.single(revisit_interval_s)
    engine_visits = build_package_history(
        list(analyses), sigma, policy, cache_cfg.heuristic_duration_s
    )
    baseline = simulate_baseline(trace, revisit_interval_s, cache_cfg)
    rewap = simulate_rewap(trace, revisit_interval_s, cache_cfg, engine_visits)
    delta_visits = revisit_interval_s // trace.visit_interval_s
    result = AppIntervalResult(
        app_id=trace.app_id,
        revisit_interval_s=revisit_interval_s,
        baseline_bytes=baseline.total_bytes,
        rewap_bytes=rewap.total_bytes,
        saved_fraction=saved_fraction(baseline.total_bytes, rewap.total_bytes),
        coverage_rate=coverage_rate(analyses, trace, delta_visits),
        prediction_precision=prediction_precision(
            analyses, delta_visits, trace.visit_interval_s
        ),
        package_durations_s=package_durations_s(engine_visits),
        manifest_sizes_bytes=manifest_sizes_bytes(engine_visits),
    )
    return result, baseline, rewap, engine_visits


def evaluate_trace(
    trace: VisitTrace,
    revisit_intervals_s: Sequence[int],
    cache_cfg: CachePolicyConfig,
    predictor_cfg: PredictorConfig,
    policy: PackagingPolicy,
) -> tuple[list[AppIntervalResult], dict[int, tuple[TransferLedger, TransferLedger]]]:
    """Run the full evaluation of one trace across all revisit intervals."""
    analyses = analyze_trace(trace, predictor_cfg)
    results = []
    ledgers: dict[int, tuple[TransferLedger, TransferLedger]] = {}
    for interval in revisit_intervals_s:
        result, baseline, rewap, _ = evaluate_pair(
            trace, analyses, interval, cache_cfg, policy
        )
        results.append(result)
        ledgers[interval] = (baseline, rewap)
    return results, ledgers


# --- report rendering --------------------------------------------------------

def _fmt(value: float | int | None) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _median_int(values: Sequence[int]) -> int | None:
    if not values:
        return None
    return int(statistics.median(values))


def quartile_summary(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    ordered = sorted(values)
    if len(ordered) == 1:
        v = ordered[0]
        return v, v, v, v, v
    q1, q2, q3 = statistics.quantiles(ordered, n=4, method="inclusive")
    return ordered[0], q1, q2, q3, ordered[-1]


def render_report(
    results: Sequence[AppIntervalResult], config_echo: Mapping[str, object] | None = None
) -> bytes:
    """Line-oriented report: one 'A' row per (app, interval), one 'S' summary
    row per interval with the saved-fraction distribution across apps."""
    lines = [REPORT_HEADER]
    for key in sorted(config_echo or {}):
        lines.append(f"# config {key}={config_echo[key]}")
    lines.append("# precision definition: no change/disappearance within the predicted window (artifact-defined)")
    lines.append("# columns A: " + " ".join(REPORT_COLUMNS))
    lines.append("# columns S: interval_s saved_fraction_min q1 median q3 max")
    ordered = sorted(results, key=lambda r: (r.app_id, r.revisit_interval_s))
    for r in ordered:
        lines.append(
            "A "
            + " ".join(
                (
                    r.app_id,
                    str(r.revisit_interval_s),
                    str(r.baseline_bytes),
                    str(r.rewap_bytes),
                    _fmt(r.saved_fraction),
                    _fmt(r.coverage_rate),
                    _fmt(r.prediction_precision),
                    _fmt(_median_int(r.package_durations_s)),
                    _fmt(max(r.manifest_sizes_bytes) if r.manifest_sizes_bytes else None),
                )
            )
        )
    for interval in sorted({r.revisit_interval_s for r in results}):
        fractions = [
            r.saved_fraction
            for r in results
            if r.revisit_interval_s == interval and r.saved_fraction is not None
        ]
        if not fractions:
            continue
        lo, q1, med, q3, hi = quartile_summary(fractions)
        lines.append(
            f"S {interval} " + " ".join(_fmt(v) for v in (lo, q1, med, q3, hi))
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_ledger(ledger: TransferLedger) -> bytes:
    lines = ["#rewap-ledger v1 columns: visit_time_s url source rt_class bytes"]
    for r in ledger.records:
        lines.append(
            f"{r.visit_time_s} {r.url} {r.source.value} {r.rt_class.value} {r.bytes_transferred}"
        )
    lines.append(f"#total {ledger.total_bytes}")
    return ("\n".join(lines) + "\n").encode("utf-8")
