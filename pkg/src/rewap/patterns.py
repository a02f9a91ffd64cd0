"""URL patterns for cross-dress resource detection.

The same logical resource often reappears under different URLs: a random
query string (``d.jpg?892`` vs ``d.jpg?157``) or a rotated CDN host
(``cdn1.foo.com`` vs ``cdn2.foo.com``).  A pattern keeps the longest common
substring of all URLs seen for one resource as a literal and leaves the
differing flanks unconstrained, anchored at both ends.

Widening is deliberately conservative: the registrable domain must stay
literal, so identical content on unrelated hosts is never folded together.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from urllib.parse import urlsplit


class DegenerateCommonalityError(ValueError):
    """The URLs share too little for a trustworthy pattern."""


def longest_common_substring(a: str, b: str) -> tuple[int, int, int]:
    """Return (start_a, start_b, length) of the longest common substring.

    Ties are broken toward the earliest position in ``a``, then in ``b``,
    which keeps widening deterministic.
    """
    if not a or not b:
        return 0, 0, 0
    best = (0, 0, 0)
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                length = prev[j - 1] + 1
                cur[j] = length
                if length > best[2]:
                    best = (i - length, j - length, length)
        prev = cur
    return best


def registrable_domain(url: str) -> str:
    """Approximate the registrable domain as the last two host labels."""
    host = (urlsplit(url).hostname or "").lower()
    labels = host.split(".")
    if len(labels) >= 2:
        return ".".join(labels[-2:])
    return host


@lru_cache(maxsize=4096)
def _compile(expression: str) -> re.Pattern[str]:
    return re.compile(expression)


@dataclass(frozen=True)
class UrlPattern:
    """Anchored regular expression over URLs plus the literal it grew from."""

    literal_base: str
    wildcard_prefix: bool = False
    wildcard_suffix: bool = False

    @property
    def expression(self) -> str:
        return (
            "^"
            + (".*" if self.wildcard_prefix else "")
            + re.escape(self.literal_base)
            + (".*" if self.wildcard_suffix else "")
            + "$"
        )

    @property
    def is_exact(self) -> bool:
        return not (self.wildcard_prefix or self.wildcard_suffix)

    def matches(self, url: str) -> bool:
        return _compile(self.expression).match(url) is not None

    @classmethod
    def exact(cls, url: str) -> "UrlPattern":
        return cls(literal_base=url)


def infer_pattern(existing: UrlPattern, new_url: str, guard_url: str | None = None) -> UrlPattern:
    """Widen ``existing`` so it also matches ``new_url``.

    The new literal is the longest common substring of the old literal and
    the new URL; flanks that differ anywhere become wildcards and stay
    wildcards.  ``guard_url`` (default: the old literal) anchors the domain
    check when the old literal no longer starts with a scheme.

    Raises :class:`DegenerateCommonalityError` when the common part is
    shorter than the new URL's host or would wildcard into the registrable
    domain.
    """
    if new_url == existing.literal_base and existing.is_exact:
        return existing

    start_a, start_b, length = longest_common_substring(existing.literal_base, new_url)
    core = existing.literal_base[start_a : start_a + length]

    host = (urlsplit(new_url).hostname or "").lower()
    if not host or length < len(host):
        raise DegenerateCommonalityError(
            f"common substring {core!r} shorter than host {host!r} of {new_url!r}"
        )
    new_domain = registrable_domain(new_url)
    if guard_url is None and not existing.wildcard_prefix:
        guard_url = existing.literal_base
    if guard_url is not None and registrable_domain(guard_url) != new_domain:
        raise DegenerateCommonalityError(
            f"registrable domains differ: {registrable_domain(guard_url)!r} vs {new_domain!r}"
        )
    if new_domain not in core:
        raise DegenerateCommonalityError(
            f"common substring {core!r} wildcards into registrable domain {new_domain!r}"
        )

    return UrlPattern(
        literal_base=core,
        wildcard_prefix=existing.wildcard_prefix or start_a > 0 or start_b > 0,
        wildcard_suffix=existing.wildcard_suffix
        or start_a + length < len(existing.literal_base)
        or start_b + length < len(new_url),
    )
