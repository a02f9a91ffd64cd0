"""Trace-driven traffic simulation.

Two clients replay the same visit schedule.  The baseline is a browser
cache honoring freshness lifetimes: fresh entries serve locally, expired
but unchanged entries pay a validation round-trip, anything else transfers
in full.  Misses are classified as redundant when the client had the bytes
before: evicted and refetched (RT1), falsely expired (RT2), or renamed
content already held under another URL (RT3).

The package-enabled client additionally checks the engine's manifest every
visit, refreshes its app-specific space when the version moved, and serves
packaged resources locally, resolving cross-dress URLs through the mapping.
Non-packaged resources fall back to the baseline cache rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .engine import EngineVisit
from .trace import ConcreteResource, VisitTrace

MANIFEST_CHECK_URL = "rewap:manifest"


class CadenceError(ValueError):
    """Revisit interval does not align with the trace cadence."""


@dataclass(frozen=True)
class CachePolicyConfig:
    heuristic_duration_s: int = 1800  # assigned when a response has no explicit policy
    validation_cost_bytes: int = 512  # header-only revalidation of an unchanged resource
    cache_capacity_bytes: int | None = None  # None: unlimited (ideal cache)

    def __post_init__(self):
        if self.heuristic_duration_s <= 0:
            raise ValueError("heuristic_duration_s must be positive")
        if self.validation_cost_bytes < 0:
            raise ValueError("validation_cost_bytes must be non-negative")
        if self.cache_capacity_bytes is not None and self.cache_capacity_bytes <= 0:
            raise ValueError("cache_capacity_bytes must be positive or None")


class Source(Enum):
    CACHE = "cache"
    NETWORK = "network"
    VALIDATION = "validation"
    PACKAGE_LOCAL = "package_local"
    PACKAGE_REFRESH = "package_refresh"


class RTClass(Enum):
    NONE = "none"
    RT1 = "rt1"  # evicted, refetched unchanged
    RT2 = "rt2"  # wrongly judged expired
    RT3 = "rt3"  # same content under a new URL


@dataclass(frozen=True)
class TransferRecord:
    visit_time_s: int
    url: str
    bytes_transferred: int
    source: Source
    rt_class: RTClass


@dataclass
class TransferLedger:
    records: list[TransferRecord] = field(default_factory=list)
    total_bytes: int = 0  # accumulated independently of the record list

    def add(self, record: TransferRecord) -> None:
        self.records.append(record)
        self.total_bytes += record.bytes_transferred

    def recompute_total(self) -> int:
        return sum(r.bytes_transferred for r in self.records)

    def bytes_by_source(self) -> dict[Source, int]:
        out: dict[Source, int] = {}
        for r in self.records:
            out[r.source] = out.get(r.source, 0) + r.bytes_transferred
        return out

    def records_at(self, visit_time_s: int) -> list[TransferRecord]:
        return [r for r in self.records if r.visit_time_s == visit_time_s]


@dataclass
class _CacheEntry:
    content_hash: str
    size_bytes: int
    stored_at_s: int
    duration_s: int


class BrowserCache:
    """LRU cache keyed by URL, with eviction memory for RT1 detection."""

    def __init__(self, capacity_bytes: int | None):
        self.capacity_bytes = capacity_bytes
        self._entries: dict[str, _CacheEntry] = {}
        self._total = 0
        self.evicted_hashes: dict[str, str] = {}

    def get(self, url: str) -> _CacheEntry | None:
        return self._entries.get(url)

    def touch(self, url: str) -> None:
        entry = self._entries.pop(url)
        self._entries[url] = entry

    def holds_hash(self, content_hash: str) -> bool:
        return any(e.content_hash == content_hash for e in self._entries.values())

    def store(self, url: str, entry: _CacheEntry) -> None:
        old = self._entries.pop(url, None)
        if old is not None:
            self._total -= old.size_bytes
        self._entries[url] = entry
        self._total += entry.size_bytes
        self.evicted_hashes.pop(url, None)
        if self.capacity_bytes is not None:
            while self._total > self.capacity_bytes and self._entries:
                victim_url, victim = next(iter(self._entries.items()))
                del self._entries[victim_url]
                self._total -= victim.size_bytes
                self.evicted_hashes[victim_url] = victim.content_hash


def _visit_indices(trace: VisitTrace, revisit_interval_s: int) -> range:
    if revisit_interval_s <= 0 or revisit_interval_s % trace.visit_interval_s != 0:
        raise CadenceError(
            f"revisit interval {revisit_interval_s} s is not a positive multiple "
            f"of the trace interval {trace.visit_interval_s} s"
        )
    return range(0, len(trace.snapshots), revisit_interval_s // trace.visit_interval_s)


def _fetch_via_cache(
    cache: BrowserCache,
    resource: ConcreteResource,
    now_s: int,
    cfg: CachePolicyConfig,
    ledger: TransferLedger,
) -> None:
    """Apply the browser cache rules to one request and record the transfer."""
    if resource.no_store:
        ledger.add(
            TransferRecord(now_s, resource.url, resource.size_bytes, Source.NETWORK, RTClass.NONE)
        )
        return

    duration = resource.effective_duration_s(cfg.heuristic_duration_s)
    entry = cache.get(resource.url)
    if entry is not None and now_s - entry.stored_at_s <= entry.duration_s:
        # Fresh by the stored policy: served locally no matter what the
        # origin would say now.
        ledger.add(TransferRecord(now_s, resource.url, 0, Source.CACHE, RTClass.NONE))
        cache.touch(resource.url)
        return
    if entry is not None:
        if entry.content_hash == resource.content_hash:
            ledger.add(
                TransferRecord(
                    now_s, resource.url, cfg.validation_cost_bytes, Source.VALIDATION, RTClass.RT2
                )
            )
        else:
            ledger.add(
                TransferRecord(
                    now_s, resource.url, resource.size_bytes, Source.NETWORK, RTClass.NONE
                )
            )
        cache.store(
            resource.url,
            _CacheEntry(resource.content_hash, resource.size_bytes, now_s, duration),
        )
        return

    if cache.evicted_hashes.get(resource.url) == resource.content_hash:
        rt = RTClass.RT1
    elif cache.holds_hash(resource.content_hash):
        rt = RTClass.RT3
    else:
        rt = RTClass.NONE
    ledger.add(TransferRecord(now_s, resource.url, resource.size_bytes, Source.NETWORK, rt))
    cache.store(
        resource.url, _CacheEntry(resource.content_hash, resource.size_bytes, now_s, duration)
    )


def simulate_baseline(
    trace: VisitTrace, revisit_interval_s: int, cfg: CachePolicyConfig
) -> TransferLedger:
    """Replay the trace through a plain browser cache at the revisit cadence."""
    ledger = TransferLedger()
    cache = BrowserCache(cfg.cache_capacity_bytes)
    for index in _visit_indices(trace, revisit_interval_s):
        snapshot = trace.snapshots[index]
        for resource in snapshot.resources:
            _fetch_via_cache(cache, resource, snapshot.visit_time_s, cfg, ledger)
    return ledger


def simulate_rewap(
    trace: VisitTrace,
    revisit_interval_s: int,
    cfg: CachePolicyConfig,
    engine_visits: list[EngineVisit],
) -> TransferLedger:
    """Replay the trace through a package-enabled client.

    ``engine_visits`` must cover every trace snapshot (the engine runs at
    trace cadence); the client samples it at the revisit cadence.
    """
    if len(engine_visits) != len(trace.snapshots):
        raise ValueError("engine history must cover every trace snapshot")
    ledger = TransferLedger()
    cache = BrowserCache(cfg.cache_capacity_bytes)
    stored: dict[str, str] = {}  # representative URL -> content hash held locally
    patterns: list[tuple[re.Pattern[str], str]] = []
    last_version: int | None = None

    for index in _visit_indices(trace, revisit_interval_s):
        snapshot = trace.snapshots[index]
        now = snapshot.visit_time_s
        engine = engine_visits[index]

        if last_version is None:
            ledger.add(
                TransferRecord(
                    now, MANIFEST_CHECK_URL, len(engine.manifest), Source.PACKAGE_REFRESH, RTClass.NONE
                )
            )
        else:
            ledger.add(
                TransferRecord(
                    now, MANIFEST_CHECK_URL, cfg.validation_cost_bytes, Source.VALIDATION, RTClass.NONE
                )
            )
            if engine.package.version != last_version:
                ledger.add(
                    TransferRecord(
                        now,
                        MANIFEST_CHECK_URL,
                        len(engine.manifest),
                        Source.PACKAGE_REFRESH,
                        RTClass.NONE,
                    )
                )

        if last_version is None or engine.package.version != last_version:
            refreshed: dict[str, str] = {}
            for member in engine.package.members:
                if stored.get(member.representative_url) != member.content_hash:
                    ledger.add(
                        TransferRecord(
                            now,
                            member.representative_url,
                            member.size_bytes,
                            Source.PACKAGE_REFRESH,
                            RTClass.NONE,
                        )
                    )
                refreshed[member.representative_url] = member.content_hash
            stored = refreshed
            patterns = [(re.compile(expr), rep) for expr, rep in engine.mapping]
            last_version = engine.package.version

        for resource in snapshot.resources:
            rep = next(
                (rep for pattern, rep in patterns if pattern.match(resource.url)), None
            )
            if rep is not None and rep in stored:
                ledger.add(
                    TransferRecord(now, resource.url, 0, Source.PACKAGE_LOCAL, RTClass.NONE)
                )
                continue
            _fetch_via_cache(cache, resource, now, cfg, ledger)
    return ledger
