"""Normalized-resource set maintenance.

Folds one visit snapshot at a time into the running set of logical
resources: content-hash matches widen a member's URL pattern (cross-dress
detection), a unique URL match with new content marks the member changed,
everything else enters as a fresh member.  A repair pass afterwards keeps
the mapping between snapshot resources and members one-to-one.

All operations are pure with respect to their inputs: ``normalize_step``
clones the previous set, so replaying a trace twice yields identical
results and sets can be shared read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import quote, unquote

from .patterns import DegenerateCommonalityError, UrlPattern, infer_pattern
from .trace import ConcreteResource, VisitSnapshot

STATE_HEADER_PREFIX = "#rewap-state v1"


class Status(str, Enum):
    """Per-visit observation of a normalized resource."""

    INEXISTENT = "I"
    CHANGED = "C"
    UNCHANGED = "U"


@dataclass
class NormalizedResource:
    """A logical resource aggregating its cross-dress URL variants.

    ``concrete`` always holds the fields of the most recent matching
    concrete resource; its URL doubles as the representative URL clients
    fetch the resource by.
    """

    uid: int
    concrete: ConcreteResource
    expression: UrlPattern
    history: list[Status]
    first_visit_index: int
    predicted_time_s: int | None = None

    @property
    def representative_url(self) -> str:
        return self.concrete.url

    @property
    def content_hash(self) -> str:
        return self.concrete.content_hash

    @property
    def size_bytes(self) -> int:
        return self.concrete.size_bytes

    @property
    def cache_duration_s(self) -> int | None:
        return self.concrete.cache_duration_s

    @property
    def no_store(self) -> bool:
        return self.concrete.no_store

    @property
    def latest_status(self) -> Status:
        return self.history[-1]

    def matches(self, url: str) -> bool:
        return self.expression.matches(url)

    def clone(self) -> "NormalizedResource":
        return NormalizedResource(
            uid=self.uid,
            concrete=self.concrete,
            expression=self.expression,
            history=list(self.history),
            first_visit_index=self.first_visit_index,
            predicted_time_s=self.predicted_time_s,
        )


@dataclass
class NormalizedSet:
    """The set of normalized resources after some number of visits."""

    members: list[NormalizedResource] = field(default_factory=list)
    next_uid: int = 1
    visit_count: int = 0

    def clone(self) -> "NormalizedSet":
        return NormalizedSet(
            members=[m.clone() for m in self.members],
            next_uid=self.next_uid,
            visit_count=self.visit_count,
        )

    def get(self, uid: int) -> NormalizedResource | None:
        for m in self.members:
            if m.uid == uid:
                return m
        return None

    def members_with_hash(self, content_hash: str) -> list[NormalizedResource]:
        return [m for m in self.members if m.content_hash == content_hash]

    def matching_members(self, url: str) -> list[NormalizedResource]:
        return [m for m in self.members if m.matches(url)]

    def match_concrete(self, url: str) -> NormalizedResource | None:
        """The unique member whose expression matches ``url``, if any.

        Overlaps should not survive the repair pass; if one does, the most
        specific pattern (longest literal) wins deterministically.
        """
        matched = self.matching_members(url)
        if not matched:
            return None
        return max(matched, key=lambda m: (len(m.expression.literal_base), -m.uid))

    def add_new(self, resource: ConcreteResource) -> NormalizedResource:
        member = NormalizedResource(
            uid=self.next_uid,
            concrete=resource,
            expression=UrlPattern.exact(resource.url),
            history=[Status.CHANGED],
            first_visit_index=self.visit_count - 1,
        )
        self.next_uid += 1
        self.members.append(member)
        return member


def normalize_step(prev: NormalizedSet, snapshot: VisitSnapshot) -> NormalizedSet:
    """Fold one snapshot into the set, returning the updated copy."""
    current = prev.clone()
    current.visit_count += 1
    for m in current.members:
        m.history.append(Status.INEXISTENT)

    for r in snapshot.resources:
        url_matched = current.matching_members(r.url)

        hash_member = None
        widened = None
        for cand in current.members_with_hash(r.content_hash):
            try:
                widened = infer_pattern(cand.expression, r.url, guard_url=cand.representative_url)
            except DegenerateCommonalityError:
                continue
            hash_member = cand
            break

        if hash_member is not None:
            hash_member.expression = widened
            hash_member.concrete = r
            if hash_member.history[-1] is Status.INEXISTENT:
                # A second same-content URL in one snapshot must not downgrade
                # a CHANGED (or first-appearance) mark set earlier this visit.
                hash_member.history[-1] = Status.UNCHANGED
        elif len(url_matched) == 1:
            member = url_matched[0]
            member.concrete = r
            member.history[-1] = Status.CHANGED
        else:
            for m in url_matched:
                current.members.remove(m)
            current.add_new(r)

    _check_mapping(current, snapshot)
    return current


def _pick_owner(claimants: list[NormalizedResource], r: ConcreteResource) -> NormalizedResource:
    for m in claimants:
        if m.content_hash == r.content_hash:
            return m
    for m in claimants:
        if m.representative_url == r.url:
            return m
    return claimants[0]


def _check_mapping(current: NormalizedSet, snapshot: VisitSnapshot) -> None:
    """Repair pattern collisions so the snapshot maps one-to-one.

    A member whose pattern captured two different contents, or a URL claimed
    by two members, falls back to exact matching on its representative; a
    resource left unmatched re-enters as a fresh member.
    """
    for m in current.members:
        matched_hashes = {r.content_hash for r in snapshot.resources if m.matches(r.url)}
        if len(matched_hashes) > 1:
            m.expression = UrlPattern.exact(m.representative_url)

    for r in snapshot.resources:
        claimants = current.matching_members(r.url)
        if len(claimants) <= 1:
            continue
        owner = _pick_owner(claimants, r)
        for m in claimants:
            if m is not owner:
                m.expression = UrlPattern.exact(m.representative_url)
        still = current.matching_members(r.url)
        if len(still) > 1:
            owner = _pick_owner(still, r)
            for m in still:
                if m is not owner:
                    current.members.remove(m)

    for r in snapshot.resources:
        if not current.matching_members(r.url):
            current.add_new(r)


def drop_disappeared(current: NormalizedSet) -> NormalizedSet:
    """Remove members that were absent at the latest visit.

    Resources rarely come back once gone, so the pipeline drops them right
    after normalization instead of carrying dead history forward.
    """
    kept = NormalizedSet(
        members=[m for m in current.members if m.latest_status is not Status.INEXISTENT],
        next_uid=current.next_uid,
        visit_count=current.visit_count,
    )
    return kept


# --- state persistence ------------------------------------------------------

def serialize_state(state: NormalizedSet) -> bytes:
    """Versioned line format so an engine can resume between runs."""
    out = [f"{STATE_HEADER_PREFIX} visits={state.visit_count} next_uid={state.next_uid}"]
    for m in state.members:
        flags = ("p" if m.expression.wildcard_prefix else "-") + (
            "s" if m.expression.wildcard_suffix else "-"
        )
        dur = "-" if m.cache_duration_s is None else str(m.cache_duration_s)
        pred = "-" if m.predicted_time_s is None else str(m.predicted_time_s)
        statuses = "".join(s.value for s in m.history)
        out.append(
            "N {uid} {first} {flags} {literal} {rep} {hash} {size} {dur} {nostore} {pred} {statuses}".format(
                uid=m.uid,
                first=m.first_visit_index,
                flags=flags,
                literal=quote(m.expression.literal_base, safe=""),
                rep=quote(m.representative_url, safe=""),
                hash=m.content_hash,
                size=m.size_bytes,
                dur=dur,
                nostore=int(m.no_store),
                pred=pred,
                statuses=statuses,
            )
        )
    return ("\n".join(out) + "\n").encode("utf-8")


class StateFormatError(ValueError):
    pass


def parse_state(data: bytes | str) -> NormalizedSet:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(STATE_HEADER_PREFIX):
        raise StateFormatError("missing state header")
    header_fields = dict(
        part.split("=", 1) for part in lines[0][len(STATE_HEADER_PREFIX) :].split() if "=" in part
    )
    try:
        state = NormalizedSet(
            visit_count=int(header_fields["visits"]), next_uid=int(header_fields["next_uid"])
        )
    except (KeyError, ValueError) as exc:
        raise StateFormatError(f"bad state header: {exc}") from exc

    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split(" ")
        if fields[0] != "N" or len(fields) != 12:
            raise StateFormatError(f"line {line_no}: expected 12-field 'N' record")
        _, uid, first, flags, literal, rep, digest, size, dur, nostore, pred, statuses = fields
        try:
            pattern = UrlPattern(
                literal_base=unquote(literal),
                wildcard_prefix=flags[0] == "p",
                wildcard_suffix=flags[1] == "s",
            )
            concrete = ConcreteResource(
                url=unquote(rep),
                content_hash=digest,
                size_bytes=int(size),
                cache_duration_s=None if dur == "-" else int(dur),
                no_store=nostore == "1",
            )
            member = NormalizedResource(
                uid=int(uid),
                concrete=concrete,
                expression=pattern,
                history=[Status(ch) for ch in statuses],
                first_visit_index=int(first),
                predicted_time_s=None if pred == "-" else int(pred),
            )
        except ValueError as exc:
            raise StateFormatError(f"line {line_no}: {exc}") from exc
        if not member.history:
            raise StateFormatError(f"line {line_no}: empty status history")
        if not member.matches(member.representative_url):
            raise StateFormatError(
                f"line {line_no}: pattern does not match its representative URL"
            )
        state.members.append(member)
    return state
