import hashlib

import pytest

from rewap.engine import analyze_trace
from rewap.metrics import (
    coverage_rate,
    evaluate_pair,
    evaluate_trace,
    manifest_sizes_bytes,
    package_durations_s,
    prediction_precision,
    quartile_summary,
    render_ledger,
    render_report,
    saved_fraction,
)
from rewap.package import PackagingPolicy
from rewap.predict import PredictorConfig
from rewap.simulate import CachePolicyConfig
from rewap.trace import ConcreteResource, VisitSnapshot, VisitTrace

from conftest import BASE_TIME


def h(tag: str) -> str:
    return hashlib.md5(tag.encode()).hexdigest()


def stable_trace(visits=6, cross_dress=False):
    snaps = []
    for i in range(visits):
        url = f"http://m.foo.com/pic.png?{i}" if cross_dress else "http://m.foo.com/pic.png"
        snaps.append(
            VisitSnapshot(
                BASE_TIME + i * 1800,
                (
                    ConcreteResource(url, h("pic"), 5_000, 300),
                    ConcreteResource("http://m.foo.com/app.js", h("js"), 3_000, 300),
                ),
            )
        )
    return VisitTrace("stable", 1800, tuple(snaps))


def churn_trace(visits=6):
    snaps = []
    for i in range(visits):
        snaps.append(
            VisitSnapshot(
                BASE_TIME + i * 1800,
                (ConcreteResource("http://m.foo.com/feed", h(f"v{i}"), 5_000, 300),),
            )
        )
    return VisitTrace("churn", 1800, tuple(snaps))


class TestSavedFraction:
    def test_arithmetic_shape(self):
        assert saved_fraction(1_000_000, 490_000) == pytest.approx(0.51)

    def test_identical_ledgers_save_nothing(self):
        assert saved_fraction(123_456, 123_456) == 0.0

    def test_zero_baseline_is_undefined(self):
        assert saved_fraction(0, 0) is None


class TestCoverage:
    def test_stable_trace_is_fully_covered(self):
        trace = stable_trace()
        analyses = analyze_trace(trace, PredictorConfig())
        for delta in (1, 2, 4):
            assert coverage_rate(analyses, trace, delta) == 1.0

    def test_cross_dress_urls_stay_covered_after_widening(self):
        trace = stable_trace(cross_dress=True)
        analyses = analyze_trace(trace, PredictorConfig())
        # after the first widening every future query variant matches
        assert coverage_rate(analyses, trace, 1) > 0.5
        got = coverage_rate(analyses, trace, 2)
        assert got is not None and got >= coverage_rate(analyses, trace, 4) - 1e-9

    def test_window_exceeding_trace_is_undefined(self):
        trace = stable_trace(visits=3)
        analyses = analyze_trace(trace, PredictorConfig())
        assert coverage_rate(analyses, trace, 5) is None


class TestPrecision:
    def test_stable_trace_predictions_all_hold(self):
        trace = stable_trace()
        analyses = analyze_trace(trace, PredictorConfig())
        assert prediction_precision(analyses, 1, 1800) == 1.0

    def test_everychange_trace_predictions_all_fail(self):
        trace = churn_trace()
        analyses = analyze_trace(trace, PredictorConfig())
        # gaps of one visit keep the estimate at exactly one interval, so the
        # member claims stability over the next visit and is always wrong
        assert prediction_precision(analyses, 1, 1800) == 0.0

    def test_no_claims_is_undefined(self):
        trace = churn_trace(visits=2)
        analyses = analyze_trace(trace, PredictorConfig())
        assert prediction_precision(analyses, 4, 1800) is None


class TestPackageStats:
    def test_durations_and_sizes_from_scenario(self, scenario_trace):
        from rewap.engine import build_package_history
        from rewap.package import UserDistribution

        analyses = analyze_trace(scenario_trace, PredictorConfig())
        history = build_package_history(
            analyses, UserDistribution.single(3600), PackagingPolicy(), 1800
        )
        assert package_durations_s(history) == (3600,)  # v1 at t0, v2 two visits later
        assert manifest_sizes_bytes(history) == (49, 173)


class TestEvaluate:
    def test_pair_results_are_consistent(self, scenario_trace):
        analyses = analyze_trace(scenario_trace, PredictorConfig())
        result, baseline, rewap, history = evaluate_pair(
            scenario_trace, analyses, 3600, CachePolicyConfig(), PackagingPolicy()
        )
        assert result.baseline_bytes == baseline.total_bytes
        assert result.rewap_bytes == rewap.total_bytes
        assert result.saved_fraction == pytest.approx(
            (baseline.total_bytes - rewap.total_bytes) / baseline.total_bytes
        )

    def test_report_render_is_deterministic(self, scenario_trace):
        cfg = CachePolicyConfig()
        results, _ = evaluate_trace(
            scenario_trace, [1800, 3600], cfg, PredictorConfig(), PackagingPolicy()
        )
        again, ledgers = evaluate_trace(
            scenario_trace, [1800, 3600], cfg, PredictorConfig(), PackagingPolicy()
        )
        assert render_report(results, {"seed": 0}) == render_report(again, {"seed": 0})
        baseline, rewap = ledgers[1800]
        assert render_ledger(baseline) == render_ledger(baseline)

    def test_report_contains_a_row_per_pair_and_summaries(self, scenario_trace):
        results, _ = evaluate_trace(
            scenario_trace, [1800, 3600], CachePolicyConfig(), PredictorConfig(), PackagingPolicy()
        )
        text = render_report(results, {}).decode()
        assert len([ln for ln in text.splitlines() if ln.startswith("A ")]) == 2
        assert len([ln for ln in text.splitlines() if ln.startswith("S ")]) == 2


class TestQuartiles:
    def test_classic_five_values(self):
        assert quartile_summary([5, 1, 3, 2, 4]) == (1, 2.0, 3.0, 4.0, 5)

    def test_single_value_degenerates(self):
        assert quartile_summary([0.4]) == (0.4, 0.4, 0.4, 0.4, 0.4)
