"""Visit-trace data model and file format.

A trace records the resources an app served at a fixed visit cadence.  It is
the sole input of the analysis pipeline and the simulator; everything
downstream treats it as immutable.

File format (UTF-8, line-delimited)::

    #rewap-trace v1 app=<id> interval=<seconds>
    V <epoch_s>
    R <url> <hash32hex> <size_bytes> <cache_duration_s|-> <nostore:0|1>

``V`` opens a snapshot; each following ``R`` line adds one resource to it.
URLs are stored percent-encoded so a line splits on single spaces.  ``-``
means the server sent no explicit cache policy (a heuristic lifetime gets
applied at simulation time, not here).
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from typing import IO
from urllib.parse import urlsplit

TRACE_HEADER_PREFIX = "#rewap-trace v1"

_HASH_RE = re.compile(r"^[0-9a-f]{32}$")
_HEADER_RE = re.compile(r"^#rewap-trace v1 app=(\S+) interval=(\d+)$")


class TraceError(ValueError):
    """Raised for any malformed or inconsistent trace input."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _check_url(url: str) -> None:
    if not url:
        raise ValueError("empty URL")
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ValueError(f"URL must be absolute http(s): {url!r}")


@dataclass(frozen=True)
class ConcreteResource:
    """One observed fetch: identity, content digest, size and cache policy."""

    url: str
    content_hash: str
    size_bytes: int
    cache_duration_s: int | None  # None: no explicit policy
    no_store: bool = False

    def __post_init__(self):
        _check_url(self.url)
        if not _HASH_RE.match(self.content_hash):
            raise ValueError(f"content_hash must be 32 lowercase hex chars: {self.content_hash!r}")
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")
        if self.cache_duration_s is not None and self.cache_duration_s < 0:
            raise ValueError("cache_duration_s must be non-negative")

    def effective_duration_s(self, heuristic_duration_s: int) -> int:
        """Freshness lifetime used everywhere: no-store pins it to zero,
        an absent policy falls back to the given heuristic."""
        if self.no_store:
            return 0
        if self.cache_duration_s is None:
            return heuristic_duration_s
        return self.cache_duration_s


@dataclass(frozen=True)
class VisitSnapshot:
    """All resources retrieved during one visit."""

    visit_time_s: int
    resources: tuple[ConcreteResource, ...]

    def __post_init__(self):
        seen = set()
        for r in self.resources:
            if r.url in seen:
                raise ValueError(f"duplicate URL within snapshot: {r.url!r}")
            seen.add(r.url)


@dataclass(frozen=True)
class VisitTrace:
    """Time-ordered snapshots of one app, recorded at a uniform interval."""

    app_id: str
    visit_interval_s: int
    snapshots: tuple[VisitSnapshot, ...]

    def __post_init__(self):
        if self.visit_interval_s <= 0:
            raise ValueError("visit_interval_s must be positive")
        if not self.snapshots:
            raise ValueError("trace has no snapshots")
        times = [s.visit_time_s for s in self.snapshots]
        for prev, cur in zip(times, times[1:]):
            if cur - prev != self.visit_interval_s:
                raise ValueError(
                    f"non-uniform snapshot interval: {cur - prev} s between "
                    f"t={prev} and t={cur}, expected {self.visit_interval_s} s"
                )


def parse_trace(stream: IO[bytes] | IO[str] | bytes | str) -> VisitTrace:
    """Parse the line-delimited trace format, rejecting any malformed input.

    Errors carry the 1-based line number of the offending line.
    """
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        raw = stream.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    lines = text.splitlines()
    if not lines:
        raise TraceError("empty trace input")

    m = _HEADER_RE.match(lines[0])
    if not m:
        raise TraceError(f"bad header, expected '{TRACE_HEADER_PREFIX} app=<id> interval=<s>'", 1)
    app_id, interval = m.group(1), int(m.group(2))
    if interval <= 0:
        raise TraceError("interval must be positive", 1)

    snapshots: list[VisitSnapshot] = []
    cur_time: int | None = None
    cur_resources: list[ConcreteResource] = []

    def close_snapshot(line_no: int) -> None:
        nonlocal cur_time, cur_resources
        if cur_time is None:
            return
        try:
            snap = VisitSnapshot(cur_time, tuple(cur_resources))
        except ValueError as exc:
            raise TraceError(str(exc), line_no) from exc
        snapshots.append(snap)
        cur_time, cur_resources = None, []

    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(" ")
        if fields[0] == "V":
            if len(fields) != 2:
                raise TraceError("'V' line must be 'V <epoch_s>'", line_no)
            close_snapshot(line_no)
            try:
                cur_time = int(fields[1])
            except ValueError:
                raise TraceError(f"bad snapshot time {fields[1]!r}", line_no) from None
        elif fields[0] == "R":
            if cur_time is None:
                raise TraceError("'R' line before any 'V' line", line_no)
            if len(fields) != 6:
                raise TraceError("'R' line must have 6 fields", line_no)
            _, url, digest, size_s, dur_s, nostore_s = fields
            try:
                size = int(size_s)
                duration = None if dur_s == "-" else int(dur_s)
                if nostore_s not in ("0", "1"):
                    raise ValueError(f"nostore flag must be 0 or 1, got {nostore_s!r}")
                resource = ConcreteResource(url, digest, size, duration, nostore_s == "1")
            except ValueError as exc:
                raise TraceError(str(exc), line_no) from exc
            cur_resources.append(resource)
        else:
            raise TraceError(f"unknown record type {fields[0]!r}", line_no)
    close_snapshot(len(lines))

    if not snapshots:
        raise TraceError("trace has no snapshots")
    try:
        return VisitTrace(app_id, interval, tuple(snapshots))
    except ValueError as exc:
        raise TraceError(str(exc)) from exc


def serialize_trace(trace: VisitTrace) -> bytes:
    """Inverse of :func:`parse_trace`; output is byte-stable."""
    out = [f"{TRACE_HEADER_PREFIX} app={trace.app_id} interval={trace.visit_interval_s}"]
    for snap in trace.snapshots:
        out.append(f"V {snap.visit_time_s}")
        for r in snap.resources:
            dur = "-" if r.cache_duration_s is None else str(r.cache_duration_s)
            out.append(f"R {r.url} {r.content_hash} {r.size_bytes} {dur} {int(r.no_store)}")
    return ("\n".join(out) + "\n").encode("utf-8")


# --- synthetic traces -------------------------------------------------------

URL_STABLE = "stable"
URL_QUERY_RANDOM = "query_random"
URL_HOST_ROTATE = "host_rotate"

_URL_MODES = (URL_STABLE, URL_QUERY_RANDOM, URL_HOST_ROTATE)


@dataclass(frozen=True)
class SynthResource:
    """Scripted behavior of one resource across the synthesized visits."""

    name: str
    size_bytes: int = 10_000
    cache_duration_s: int | None = None
    no_store: bool = False
    url_mode: str = URL_STABLE
    change_period_visits: int | None = None  # None: content never changes
    disappear_after_visit: int | None = None  # 1-based; absent afterwards
    rotate_hosts: int = 3

    def __post_init__(self):
        if self.url_mode not in _URL_MODES:
            raise ValueError(f"unknown url_mode {self.url_mode!r}")
        if self.change_period_visits is not None and self.change_period_visits <= 0:
            raise ValueError("change_period_visits must be positive")
        if self.disappear_after_visit is not None and self.disappear_after_visit <= 0:
            raise ValueError("disappear_after_visit must be positive")
        if self.rotate_hosts <= 0:
            raise ValueError("rotate_hosts must be positive")


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters for a deterministic synthetic trace."""

    app_id: str
    visit_interval_s: int
    num_visits: int
    resources: tuple[SynthResource, ...]
    start_time_s: int = 1_600_000_000
    domain: str = field(default="app.example")

    def __post_init__(self):
        if not self.resources:
            raise ValueError("resource list is empty")
        if self.num_visits <= 0:
            raise ValueError("num_visits must be positive")
        if self.visit_interval_s <= 0:
            raise ValueError("visit_interval_s must be positive")


def _content_hash(app_id: str, name: str, version: int) -> str:
    return hashlib.md5(f"{app_id}|{name}|{version}".encode()).hexdigest()


def synthesize_trace(spec: SynthSpec, seed: int) -> VisitTrace:
    """Build a trace from scripted per-resource behaviors.

    Deterministic: the same spec and seed always yield byte-identical traces.
    """
    rng = random.Random(seed)
    # Pre-draw the per-visit random queries in a fixed order so that resource
    # behaviors stay independent of each other.
    queries = {
        (res.name, i): rng.randint(0, 999_999)
        for res in spec.resources
        for i in range(spec.num_visits)
    }

    snapshots = []
    for i in range(spec.num_visits):
        resources = []
        for res in spec.resources:
            if res.disappear_after_visit is not None and i + 1 > res.disappear_after_visit:
                continue
            if res.url_mode == URL_HOST_ROTATE:
                host = f"cdn{i % res.rotate_hosts + 1}.{spec.domain}"
            else:
                host = f"m.{spec.domain}"
            url = f"http://{host}/{res.name}"
            if res.url_mode == URL_QUERY_RANDOM:
                url += f"?{queries[(res.name, i)]}"
            version = 0 if res.change_period_visits is None else i // res.change_period_visits
            resources.append(
                ConcreteResource(
                    url=url,
                    content_hash=_content_hash(spec.app_id, res.name, version),
                    size_bytes=res.size_bytes,
                    cache_duration_s=res.cache_duration_s,
                    no_store=res.no_store,
                )
            )
        snapshots.append(VisitSnapshot(spec.start_time_s + i * spec.visit_interval_s, tuple(resources)))
    return VisitTrace(spec.app_id, spec.visit_interval_s, tuple(snapshots))
