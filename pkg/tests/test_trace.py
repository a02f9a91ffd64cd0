import pytest

from rewap.trace import (
    ConcreteResource,
    SynthResource,
    SynthSpec,
    TraceError,
    VisitSnapshot,
    VisitTrace,
    parse_trace,
    serialize_trace,
    synthesize_trace,
)

HASH_A = "0" * 32
HASH_B = "f" * 32


def make_trace(times, interval=1800):
    snaps = tuple(
        VisitSnapshot(t, (ConcreteResource("http://a.example/x", HASH_A, 10, 60),))
        for t in times
    )
    return VisitTrace("app", interval, snaps)


class TestParse:
    def test_single_snapshot_single_resource(self):
        text = (
            "#rewap-trace v1 app=foo interval=1800\n"
            "V 1600000000\n"
            "R http://m.foo.com/a.css " + HASH_A + " 4000 86400 0\n"
        )
        trace = parse_trace(text)
        assert trace.app_id == "foo"
        assert trace.visit_interval_s == 1800
        assert len(trace.snapshots) == 1
        (res,) = trace.snapshots[0].resources
        assert res.url == "http://m.foo.com/a.css"
        assert res.cache_duration_s == 86_400
        assert not res.no_store

    def test_empty_input_rejected(self):
        with pytest.raises(TraceError, match="empty"):
            parse_trace(b"")

    def test_uniform_interval_accepted_nonuniform_rejected(self):
        ok = (
            "#rewap-trace v1 app=foo interval=1800\n"
            f"V 1000\nR http://a.example/x {HASH_A} 10 - 0\n"
            f"V 2800\nR http://a.example/x {HASH_A} 10 - 0\n"
        )
        trace = parse_trace(ok)
        assert len(trace.snapshots) == 2

        bad = ok + f"V 6400\nR http://a.example/x {HASH_A} 10 - 0\n"
        with pytest.raises(TraceError, match="non-uniform"):
            parse_trace(bad)

    def test_duplicate_url_in_snapshot_rejected(self):
        text = (
            "#rewap-trace v1 app=foo interval=1800\n"
            "V 1000\n"
            f"R http://a.example/x {HASH_A} 10 - 0\n"
            f"R http://a.example/x {HASH_B} 11 - 0\n"
        )
        with pytest.raises(TraceError, match="duplicate URL"):
            parse_trace(text)

    def test_malformed_line_reports_line_number(self):
        text = "#rewap-trace v1 app=foo interval=1800\nV 1000\nR broken\n"
        with pytest.raises(TraceError, match="line 3"):
            parse_trace(text)

    def test_bad_hash_rejected(self):
        text = f"#rewap-trace v1 app=foo interval=1800\nV 1000\nR http://a.example/x ZZZ 10 - 0\n"
        with pytest.raises(TraceError, match="hash"):
            parse_trace(text)

    def test_resource_before_snapshot_rejected(self):
        text = f"#rewap-trace v1 app=foo interval=1800\nR http://a.example/x {HASH_A} 10 - 0\n"
        with pytest.raises(TraceError, match="before any 'V'"):
            parse_trace(text)

    def test_absent_duration_parses_to_none(self):
        text = f"#rewap-trace v1 app=foo interval=1800\nV 1000\nR http://a.example/x {HASH_A} 10 - 1\n"
        (res,) = parse_trace(text).snapshots[0].resources
        assert res.cache_duration_s is None
        assert res.no_store


class TestRoundTrip:
    def test_parse_serialize_identity(self, scenario_trace):
        assert parse_trace(serialize_trace(scenario_trace)) == scenario_trace

    def test_serialize_is_byte_stable(self, scenario_trace):
        assert serialize_trace(scenario_trace) == serialize_trace(scenario_trace)


class TestInvariants:
    def test_no_store_effective_duration_is_zero(self):
        res = ConcreteResource("http://a.example/x", HASH_A, 10, 3600, no_store=True)
        assert res.effective_duration_s(1800) == 0

    def test_absent_duration_uses_heuristic(self):
        res = ConcreteResource("http://a.example/x", HASH_A, 10, None)
        assert res.effective_duration_s(1800) == 1800

    def test_relative_url_rejected(self):
        with pytest.raises(ValueError, match="absolute"):
            ConcreteResource("/x.css", HASH_A, 10, None)

    def test_trace_requires_uniform_spacing(self):
        with pytest.raises(ValueError, match="non-uniform"):
            make_trace([0, 1800, 5400])


class TestSynthesize:
    def test_query_randomized_resource(self):
        spec = SynthSpec(
            app_id="syn",
            visit_interval_s=1800,
            num_visits=3,
            resources=(SynthResource("img.jpg", url_mode="query_random"),),
        )
        trace = synthesize_trace(spec, seed=7)
        urls = [s.resources[0].url for s in trace.snapshots]
        hashes = {s.resources[0].content_hash for s in trace.snapshots}
        bases = {u.split("?")[0] for u in urls}
        assert len(bases) == 1
        assert all("?" in u for u in urls)
        assert len(hashes) == 1

    def test_periodic_changes_at_expected_visits(self):
        spec = SynthSpec(
            app_id="syn",
            visit_interval_s=1800,
            num_visits=4,
            resources=(SynthResource("app.js", change_period_visits=2),),
        )
        trace = synthesize_trace(spec, seed=1)
        hashes = [s.resources[0].content_hash for s in trace.snapshots]
        assert hashes[0] == hashes[1]
        assert hashes[1] != hashes[2]
        assert hashes[2] == hashes[3]

    def test_same_seed_is_byte_identical(self):
        spec = SynthSpec(
            app_id="syn",
            visit_interval_s=1800,
            num_visits=5,
            resources=(
                SynthResource("img.jpg", url_mode="query_random"),
                SynthResource("cdn.png", url_mode="host_rotate"),
            ),
        )
        assert serialize_trace(synthesize_trace(spec, 7)) == serialize_trace(
            synthesize_trace(spec, 7)
        )

    def test_disappearing_resource(self):
        spec = SynthSpec(
            app_id="syn",
            visit_interval_s=1800,
            num_visits=4,
            resources=(
                SynthResource("gone.css", disappear_after_visit=2),
                SynthResource("stay.css"),
            ),
        )
        trace = synthesize_trace(spec, 0)
        counts = [len(s.resources) for s in trace.snapshots]
        assert counts == [2, 2, 1, 1]

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            SynthSpec(app_id="syn", visit_interval_s=1800, num_visits=3, resources=())
        with pytest.raises(ValueError, match="period"):
            SynthResource("x", change_period_visits=0)
