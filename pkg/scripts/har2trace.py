#!/usr/bin/env python3
"""Example HAR-to-trace converter.

Feeds browser HAR captures into the trace format: pass one HAR file per
visit, captured at a fixed interval, oldest first. This is a documented
example, not a supported ingestion path; it makes two simplifying choices:

- Content identity: the MD5 of `response.content.text` when the capture
  includes bodies, otherwise the MD5 of URL plus size (renamed-but-identical
  content is then invisible, and same-size updates are missed).
- Cache policy: only `Cache-Control: max-age=N` and `no-store` are honored;
  anything else is recorded as "no explicit policy".

Usage:
    python scripts/har2trace.py --app foo --interval 1800 v1.har v2.har > foo.trace
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rewap.trace import ConcreteResource, VisitSnapshot, VisitTrace, serialize_trace

BASE_TIME = 1_600_000_000


def cache_policy(headers: list[dict]) -> tuple[int | None, bool]:
    """(max-age seconds or None, no_store) from response headers."""
    for header in headers:
        if header.get("name", "").lower() != "cache-control":
            continue
        value = header.get("value", "").lower()
        if "no-store" in value:
            return None, True
        for part in value.split(","):
            part = part.strip()
            if part.startswith("max-age="):
                try:
                    return max(int(part.split("=", 1)[1]), 0), False
                except ValueError:
                    pass
    return None, False


def entry_to_resource(entry: dict) -> ConcreteResource | None:
    url = entry.get("request", {}).get("url", "")
    if not url.startswith(("http://", "https://")):
        return None
    response = entry.get("response", {})
    content = response.get("content", {})
    size = content.get("size") or response.get("bodySize") or 0
    if size < 0:
        size = 0
    text = content.get("text")
    if text is not None:
        digest = hashlib.md5(text.encode("utf-8", "replace")).hexdigest()
    else:
        digest = hashlib.md5(f"{url}|{size}".encode()).hexdigest()
    duration, no_store = cache_policy(response.get("headers", []))
    return ConcreteResource(url, digest, int(size), duration, no_store)


def har_to_snapshot(har: dict, visit_time_s: int) -> VisitSnapshot:
    resources = []
    seen = set()
    for entry in har.get("log", {}).get("entries", []):
        resource = entry_to_resource(entry)
        if resource is None or resource.url in seen:
            continue  # keep the first observation of each URL
        seen.add(resource.url)
        resources.append(resource)
    return VisitSnapshot(visit_time_s, tuple(resources))


def convert(app_id: str, interval_s: int, har_paths: list[Path]) -> bytes:
    snapshots = []
    for i, path in enumerate(har_paths):
        har = json.loads(path.read_text(encoding="utf-8"))
        snapshots.append(har_to_snapshot(har, BASE_TIME + i * interval_s))
    return serialize_trace(VisitTrace(app_id, interval_s, tuple(snapshots)))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--app", required=True)
    parser.add_argument("--interval", type=int, required=True)
    parser.add_argument("har_files", nargs="+", type=Path)
    args = parser.parse_args(argv)
    sys.stdout.buffer.write(convert(args.app, args.interval, args.har_files))
    return 0


if __name__ == "__main__":
    sys.exit(main())
