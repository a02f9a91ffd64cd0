"""Package selection and its on-disk artifacts.

A package is the subset of normalized resources worth pinning in the
client's app-specific space.  Candidates are sorted by predicted stable
time; for each suffix of that order the expected saved traffic is the sum,
over members whose cache lifetime ends before the suffix horizon, of the
user mass revisiting inside the window where the cache would have refetched
but the package still serves locally.  The best suffix wins.

A live package is replaced passively as soon as any member's content moved
under it, or actively when a fresh candidate beats it by the configured
margin.  Adopted packages are emitted as an app-cache style manifest
(CACHE/NETWORK sections, version comment forcing a byte change on every
update) plus a pattern-to-representative-URL mapping file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence
from urllib.parse import quote, unquote

from .normalize import NormalizedResource, NormalizedSet, Status

MAPPING_HEADER = "#rewap-mapping v1"
_MANIFEST_VERSION_RE = re.compile(r"^# v(\d+) (\d+)$")


@dataclass(frozen=True)
class UserDistribution:
    """Fraction of users per revisit interval; fractions sum to one."""

    weights: Mapping[int, float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("distribution has no intervals")
        total = 0.0
        for interval, fraction in self.weights.items():
            if interval <= 0:
                raise ValueError("revisit intervals must be positive")
            if fraction < 0:
                raise ValueError("fractions must be non-negative")
            total += fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")

    @classmethod
    def single(cls, interval_s: int) -> "UserDistribution":
        return cls({interval_s: 1.0})

    def mass_between(self, lo_exclusive_s: int, hi_inclusive_s: int) -> float:
        """User fraction with revisit interval r satisfying lo < r <= hi."""
        return sum(
            fraction
            for interval, fraction in self.weights.items()
            if lo_exclusive_s < interval <= hi_inclusive_s
        )


@dataclass(frozen=True)
class PackagingPolicy:
    replace_threshold: float = 0.10  # fractional benefit gain required to swap a valid package

    def __post_init__(self):
        if not (self.replace_threshold >= 0):
            raise ValueError("replace_threshold must be a finite non-negative number")


@dataclass(frozen=True)
class PackagedMember:
    """Frozen snapshot of a normalized resource at packaging time."""

    uid: int
    representative_url: str
    pattern_expression: str
    pattern_literal: str
    content_hash: str
    size_bytes: int
    cache_duration_s: int | None
    no_store: bool
    predicted_time_s: int

    def effective_duration_s(self, heuristic_duration_s: int) -> int:
        if self.no_store:
            return 0
        if self.cache_duration_s is None:
            return heuristic_duration_s
        return self.cache_duration_s


@dataclass(frozen=True)
class ResourcePackage:
    members: tuple[PackagedMember, ...]
    horizon_s: int
    benefit_bytes: float
    version: int
    created_at_s: int


class Decision(Enum):
    PASSIVE = "passive"
    ACTIVE = "active"
    KEPT = "kept"


def _member_contribution(
    duration_s: int, size_bytes: int, horizon_s: int, sigma: UserDistribution
) -> float:
    if duration_s >= horizon_s:
        # Still fresh in the ordinary cache for the whole horizon: packaging
        # it saves nothing.
        return 0.0
    return sigma.mass_between(duration_s, horizon_s) * size_bytes


def benefit(
    members: Iterable[NormalizedResource | PackagedMember],
    horizon_s: int,
    sigma: UserDistribution,
    heuristic_duration_s: int,
) -> float:
    """Expected average saved bytes for a package kept stable until the horizon."""
    total = 0.0
    for m in members:
        total += _member_contribution(
            m.effective_duration_s(heuristic_duration_s)
            if isinstance(m, PackagedMember)
            else m.concrete.effective_duration_s(heuristic_duration_s),
            m.size_bytes,
            horizon_s,
            sigma,
        )
    return total


def _freeze(member: NormalizedResource) -> PackagedMember:
    if member.predicted_time_s is None:
        raise ValueError(f"member {member.representative_url!r} has no prediction")
    return PackagedMember(
        uid=member.uid,
        representative_url=member.representative_url,
        pattern_expression=member.expression.expression,
        pattern_literal=member.expression.literal_base,
        content_hash=member.content_hash,
        size_bytes=member.size_bytes,
        cache_duration_s=member.cache_duration_s,
        no_store=member.no_store,
        predicted_time_s=member.predicted_time_s,
    )


def select_package(
    candidates: Sequence[NormalizedResource] | NormalizedSet,
    sigma: UserDistribution,
    heuristic_duration_s: int,
    version: int = 0,
    created_at_s: int = 0,
) -> ResourcePackage:
    """Pick the benefit-maximizing suffix of the prediction-sorted candidates.

    Ties go to the larger suffix.  An empty candidate set yields the empty
    package with zero benefit.
    """
    members = candidates.members if isinstance(candidates, NormalizedSet) else list(candidates)
    frozen = sorted(
        (_freeze(m) for m in members),
        key=lambda m: (m.predicted_time_s, m.representative_url, m.uid),
    )
    if not frozen:
        return ResourcePackage((), 0, 0.0, version, created_at_s)

    best_i = 0
    best_benefit = -1.0
    for i in range(len(frozen)):
        horizon = frozen[i].predicted_time_s
        value = benefit(frozen[i:], horizon, sigma, heuristic_duration_s)
        if value > best_benefit:
            best_i, best_benefit = i, value
    chosen = tuple(frozen[best_i:])
    return ResourcePackage(
        members=chosen,
        horizon_s=chosen[0].predicted_time_s,
        benefit_bytes=best_benefit,
        version=version,
        created_at_s=created_at_s,
    )


def package_invalidated(current: ResourcePackage, state: NormalizedSet) -> bool:
    """True when any packaged member's content moved or disappeared."""
    for pm in current.members:
        live = state.get(pm.uid)
        if live is None:
            return True
        if live.latest_status in (Status.CHANGED, Status.INEXISTENT):
            return True
    return False


def maybe_replace(
    current: ResourcePackage | None,
    fresh: ResourcePackage,
    state: NormalizedSet,
    policy: PackagingPolicy,
    now_s: int,
) -> tuple[ResourcePackage, Decision]:
    """Adopt the fresh package passively, actively, or keep the current one."""
    if current is None or package_invalidated(current, state):
        version = 1 if current is None else current.version + 1
        adopted = ResourcePackage(
            fresh.members, fresh.horizon_s, fresh.benefit_bytes, version, now_s
        )
        return adopted, Decision.PASSIVE
    if fresh.benefit_bytes > current.benefit_bytes * (1.0 + policy.replace_threshold):
        adopted = ResourcePackage(
            fresh.members, fresh.horizon_s, fresh.benefit_bytes, current.version + 1, now_s
        )
        return adopted, Decision.ACTIVE
    return current, Decision.KEPT


# --- manifest and mapping formats -------------------------------------------

ResourceMapping = tuple[tuple[str, str], ...]  # (pattern expression, representative URL)


def build_mapping(pkg: ResourcePackage) -> ResourceMapping:
    return tuple(
        sorted((m.pattern_expression, m.representative_url) for m in pkg.members)
    )


def emit_manifest(pkg: ResourcePackage, mapping: ResourceMapping) -> bytes:
    """App-cache style manifest: versioned comment, CACHE section, NETWORK *.

    The version comment changes on every adopted package, so clients detect
    updates by plain byte comparison.
    """
    mapped_urls = {rep for _, rep in mapping}
    for m in pkg.members:
        if m.representative_url not in mapped_urls:
            raise ValueError(f"package member missing from mapping: {m.representative_url!r}")
    lines = ["CACHE MANIFEST", f"# v{pkg.version} {pkg.created_at_s}", "CACHE:"]
    lines.extend(sorted(m.representative_url for m in pkg.members))
    lines.extend(["NETWORK:", "*"])
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_mapping(pkg: ResourcePackage) -> bytes:
    """One record per package member: pattern and representative URL."""
    lines = [MAPPING_HEADER]
    for pattern, rep in build_mapping(pkg):
        lines.append(f"M {quote(pattern, safe='')} {quote(rep, safe='')}")
    return ("\n".join(lines) + "\n").encode("utf-8")


class ManifestFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ParsedManifest:
    version: int
    created_at_s: int
    cache_urls: tuple[str, ...]
    network_wildcard: bool


def parse_manifest(data: bytes | str) -> ParsedManifest:
    """Client-side manifest parser; strict about the structure it serves from."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines or lines[0] != "CACHE MANIFEST":
        raise ManifestFormatError("first line must be 'CACHE MANIFEST'")
    m = _MANIFEST_VERSION_RE.match(lines[1]) if len(lines) > 1 else None
    if not m:
        raise ManifestFormatError("missing '# v<version> <created_at>' comment")
    version, created_at = int(m.group(1)), int(m.group(2))

    section = None
    cache_urls: list[str] = []
    network_wildcard = False
    for line in lines[2:]:
        if not line.strip() or line.startswith("#"):
            continue
        if line == "CACHE:":
            section = "cache"
        elif line == "NETWORK:":
            section = "network"
        elif section == "cache":
            cache_urls.append(line)
        elif section == "network":
            network_wildcard = network_wildcard or line == "*"
        else:
            raise ManifestFormatError(f"entry outside any section: {line!r}")
    return ParsedManifest(version, created_at, tuple(cache_urls), network_wildcard)


def parse_mapping(data: bytes | str) -> ResourceMapping:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MAPPING_HEADER:
        raise ManifestFormatError(f"missing mapping header {MAPPING_HEADER!r}")
    records = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split(" ")
        if fields[0] != "M" or len(fields) != 3:
            raise ManifestFormatError(f"line {line_no}: expected 'M <pattern> <url>'")
        records.append((unquote(fields[1]), unquote(fields[2])))
    return tuple(records)
