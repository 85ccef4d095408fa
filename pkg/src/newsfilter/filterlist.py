"""Versioned, sorted domain filterlist with checkpoint deltas.

Serialization is canonical (UTF-8 JSON, sorted keys, no insignificant
whitespace, entries in domain order) so equal lists are equal bytes.
Lookup is binary search with an instrumented variant that counts
comparisons; deltas compose with last-write-wins semantics.
"""

from __future__ import annotations

import gzip
import io
import json
from dataclasses import dataclass
from typing import Optional

from .errors import InvariantError, SchemaError

VERDICTS = ("blacklisted", "whitelisted")

DEFAULT_FAKE_THRESHOLD = 0.5
DEFAULT_REAL_THRESHOLD = 0.9


def normalize_domain(raw: str) -> str:
    domain = raw.strip().lower().rstrip(".")
    if not domain:
        raise InvariantError("empty domain")
    if "/" in domain or ":" in domain or " " in domain:
        raise InvariantError(f"domain {raw!r} contains scheme, path or spaces")
    return domain


@dataclass(frozen=True)
class FilterEntry:
    domain: str
    verdict: str
    probability: float
    updated_at: int

    def validate(self) -> None:
        if self.domain != normalize_domain(self.domain):
            raise InvariantError(f"entry domain {self.domain!r} is not normalized")
        if self.verdict not in VERDICTS:
            raise InvariantError(f"unknown verdict {self.verdict!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise InvariantError(f"{self.domain}: probability outside [0, 1]")
        if self.updated_at < 0:
            raise InvariantError(f"{self.domain}: negative updated_at")

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "verdict": self.verdict,
            "probability": self.probability,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FilterEntry":
        try:
            entry = cls(
                domain=str(doc["domain"]),
                verdict=str(doc["verdict"]),
                probability=float(doc["probability"]),
                updated_at=int(doc["updated_at"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad filter entry: {exc}")
        entry.validate()
        return entry


@dataclass(frozen=True)
class Filterlist:
    checkpoint: int
    entries: tuple[FilterEntry, ...]

    def validate(self) -> None:
        if self.checkpoint < 0:
            raise InvariantError("checkpoint must be >= 0")
        previous = None
        for entry in self.entries:
            entry.validate()
            if previous is not None and entry.domain <= previous:
                raise InvariantError(
                    f"entries not strictly sorted at {entry.domain!r}"
                )
            previous = entry.domain

    @property
    def domains(self) -> tuple[str, ...]:
        return tuple(e.domain for e in self.entries)


@dataclass(frozen=True)
class Delta:
    from_checkpoint: int
    to_checkpoint: int
    upserts: tuple[FilterEntry, ...]
    removals: tuple[str, ...]

    def validate(self) -> None:
        if self.from_checkpoint > self.to_checkpoint:
            raise InvariantError("delta runs backwards")
        if self.from_checkpoint == self.to_checkpoint and (self.upserts or self.removals):
            raise InvariantError("non-empty delta between equal checkpoints")
        upsert_domains = [e.domain for e in self.upserts]
        if list(upsert_domains) != sorted(set(upsert_domains)):
            raise InvariantError("delta upserts not strictly sorted")
        if list(self.removals) != sorted(set(self.removals)):
            raise InvariantError("delta removals not strictly sorted")
        if set(upsert_domains) & set(self.removals):
            raise InvariantError("delta upserts and removals overlap")
        for entry in self.upserts:
            entry.validate()

    @property
    def empty(self) -> bool:
        return not self.upserts and not self.removals


def build_list(
    predictions: list[tuple[str, float]],
    fake_threshold: float = DEFAULT_FAKE_THRESHOLD,
    real_threshold: float = DEFAULT_REAL_THRESHOLD,
    checkpoint: int = 0,
    updated_at: int = 0,
) -> Filterlist:
    """Blacklist domains whose fake probability reaches fake_threshold,
    whitelist those whose real probability reaches real_threshold, drop the
    band in between."""
    seen: dict[str, FilterEntry] = {}
    for raw_domain, probability in predictions:
        domain = normalize_domain(raw_domain)
        if domain in seen:
            raise InvariantError(f"duplicate domain {domain!r} in predictions")
        if probability >= fake_threshold:
            verdict = "blacklisted"
        elif 1.0 - probability >= real_threshold:
            verdict = "whitelisted"
        else:
            continue
        seen[domain] = FilterEntry(
            domain=domain,
            verdict=verdict,
            probability=float(probability),
            updated_at=updated_at,
        )
    flist = Filterlist(
        checkpoint=checkpoint,
        entries=tuple(seen[d] for d in sorted(seen)),
    )
    flist.validate()
    return flist


def lookup_with_comparisons(flist: Filterlist, domain: str) -> tuple[Optional[str], int]:
    """Binary search; returns (verdict or None, comparison count).

    The count is bounded by ceil(log2 n) + 1: one order comparison per
    bisection step plus one final equality check.
    """
    target = normalize_domain(domain)
    entries = flist.entries
    comparisons = 0
    lo, hi = 0, len(entries)
    while lo < hi:
        mid = (lo + hi) // 2
        comparisons += 1
        if entries[mid].domain < target:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(entries):
        comparisons += 1
        if entries[lo].domain == target:
            return entries[lo].verdict, comparisons
    return None, comparisons


def lookup(flist: Filterlist, domain: str) -> Optional[str]:
    return lookup_with_comparisons(flist, domain)[0]


def make_delta(old: Filterlist, new: Filterlist) -> Delta:
    """Minimal change set: entries added or modified, plus removed domains."""
    if old.checkpoint >= new.checkpoint:
        raise InvariantError("delta requires old.checkpoint < new.checkpoint")
    old_map = {e.domain: e for e in old.entries}
    upserts = [e for e in new.entries if old_map.get(e.domain) != e]
    new_domains = {e.domain for e in new.entries}
    removals = [d for d in old.domains if d not in new_domains]
    delta = Delta(
        from_checkpoint=old.checkpoint,
        to_checkpoint=new.checkpoint,
        upserts=tuple(upserts),
        removals=tuple(removals),
    )
    delta.validate()
    return delta


def empty_delta(checkpoint: int) -> Delta:
    return Delta(from_checkpoint=checkpoint, to_checkpoint=checkpoint,
                 upserts=(), removals=())


def apply_delta(flist: Filterlist, delta: Delta) -> Filterlist:
    if delta.from_checkpoint != flist.checkpoint:
        raise InvariantError(
            f"stale or future delta: list at {flist.checkpoint}, "
            f"delta from {delta.from_checkpoint}"
        )
    merged = {e.domain: e for e in flist.entries}
    for domain in delta.removals:
        merged.pop(domain, None)  # removing a non-member is a no-op
    for entry in delta.upserts:
        merged[entry.domain] = entry
    result = Filterlist(
        checkpoint=delta.to_checkpoint,
        entries=tuple(merged[d] for d in sorted(merged)),
    )
    result.validate()
    return result


def compose_delta(first: Delta, second: Delta) -> Delta:
    """Sequential composition; the later delta wins per domain."""
    if first.to_checkpoint != second.from_checkpoint:
        raise InvariantError(
            f"cannot compose non-adjacent deltas "
            f"({first.to_checkpoint} != {second.from_checkpoint})"
        )
    upserts = {e.domain: e for e in first.upserts}
    removals = set(first.removals)
    for domain in second.removals:
        upserts.pop(domain, None)
        removals.add(domain)
    for entry in second.upserts:
        removals.discard(entry.domain)
        upserts[entry.domain] = entry
    delta = Delta(
        from_checkpoint=first.from_checkpoint,
        to_checkpoint=second.to_checkpoint,
        upserts=tuple(upserts[d] for d in sorted(upserts)),
        removals=tuple(sorted(removals)),
    )
    delta.validate()
    return delta


# --- canonical serialization -------------------------------------------------


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def filterlist_to_json(flist: Filterlist) -> str:
    return _dumps({
        "checkpoint": flist.checkpoint,
        "entries": [e.to_dict() for e in flist.entries],
    })


def filterlist_from_json(text: str) -> Filterlist:
    try:
        doc = json.loads(text)
        flist = Filterlist(
            checkpoint=int(doc["checkpoint"]),
            entries=tuple(FilterEntry.from_dict(e) for e in doc["entries"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise SchemaError(f"bad filterlist document: {exc}")
    flist.validate()
    return flist


def delta_to_json(delta: Delta) -> str:
    return _dumps({
        "from": delta.from_checkpoint,
        "to": delta.to_checkpoint,
        "upserts": [e.to_dict() for e in delta.upserts],
        "removals": list(delta.removals),
    })


def delta_from_json(text: str) -> Delta:
    try:
        doc = json.loads(text)
        delta = Delta(
            from_checkpoint=int(doc["from"]),
            to_checkpoint=int(doc["to"]),
            upserts=tuple(FilterEntry.from_dict(e) for e in doc["upserts"]),
            removals=tuple(str(d) for d in doc["removals"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise SchemaError(f"bad delta document: {exc}")
    delta.validate()
    return delta


def gzip_bytes(data: bytes) -> bytes:
    """Deterministic gzip (fixed mtime) so compressed artifacts are stable."""
    buffer = io.BytesIO()
    with gzip.GzipFile(fileobj=buffer, mode="wb", mtime=0) as handle:
        handle.write(data)
    return buffer.getvalue()


def gunzip_bytes(data: bytes) -> bytes:
    return gzip.decompress(data)
