"""Data model for crawled-website telemetry and domain history.

One website = one :class:`WebsiteRecord`, carried on disk as one JSON object
per line (UTF-8 JSONL). Numeric fields that were not measured are encoded as
JSON ``null`` and surface in memory as ``None`` ("absent"), which downstream
imputation treats differently from a measured zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Any, Iterable, Optional

from .errors import InvariantError, SchemaError

LABELS = ("real", "fake")

RESOURCE_KINDS = ("image", "css", "js", "text", "audio", "video", "font", "other")

TRACKER_CATEGORIES = ("advertising", "analytics", "social", "widget")

# Fixed DOM tag set counted by the crawler, in canonical order.
DOM_TAGS = (
    "div", "p", "a", "img", "button", "section", "span", "iframe",
    "script", "link", "form", "ul", "li", "table", "video", "audio",
)

# Navigation-timing marks, milliseconds since navigation start.
TIMING_MARKS = (
    "domainLookupStart", "domainLookupEnd",
    "connectStart", "connectEnd", "secureConnectionStart",
    "requestStart", "responseStart", "responseEnd", "fetchStart",
    "domLoading", "domInteractive",
    "domContentLoadedEventStart", "domContentLoadedEventEnd",
    "domComplete", "loadEventStart", "loadEventEnd",
    "firstMeaningfulPaint",
)

# Pairs that must be ordered when both ends are present.
_ORDERED_MARKS = (
    ("connectStart", "connectEnd"),
    ("responseStart", "responseEnd"),
    ("domContentLoadedEventStart", "domContentLoadedEventEnd"),
    ("loadEventStart", "loadEventEnd"),
)


@dataclass
class TimingProfile:
    """Navigation-timing marks; None marks a value the crawler never saw."""

    marks: dict[str, Optional[float]] = field(default_factory=dict)

    def get(self, name: str) -> Optional[float]:
        return self.marks.get(name)

    def validate(self, domain: str) -> None:
        for name, value in self.marks.items():
            if name not in TIMING_MARKS:
                raise SchemaError(f"{domain}: unknown timing mark {name!r}")
            if value is not None and value < 0:
                raise InvariantError(f"{domain}: timing mark {name} is negative")
        for lo, hi in _ORDERED_MARKS:
            a, b = self.marks.get(lo), self.marks.get(hi)
            if a is not None and b is not None and b < a:
                raise InvariantError(
                    f"{domain}: timing order violated ({lo} > {hi})"
                )


@dataclass
class DomSnapshotStats:
    node_count: int
    html_class_count: int
    layout_object_count: int
    element_counts: dict[str, int] = field(default_factory=dict)

    def validate(self, domain: str) -> None:
        for name in ("node_count", "html_class_count", "layout_object_count"):
            if getattr(self, name) < 0:
                raise InvariantError(f"{domain}: {name} is negative")
        for tag, count in self.element_counts.items():
            if tag not in DOM_TAGS:
                raise SchemaError(f"{domain}: unknown DOM tag {tag!r}")
            if count < 0:
                raise InvariantError(f"{domain}: element count for {tag} is negative")


@dataclass
class HttpTransaction:
    url: str
    status_code: int
    is_redirect: bool = False
    third_party: bool = False
    tracker_category: Optional[str] = None

    def validate(self, domain: str) -> None:
        if not 100 <= self.status_code <= 599:
            raise InvariantError(
                f"{domain}: status code {self.status_code} outside 100-599"
            )
        if self.tracker_category is not None and self.tracker_category not in TRACKER_CATEGORIES:
            raise SchemaError(
                f"{domain}: unknown tracker category {self.tracker_category!r}"
            )


@dataclass
class ResourceEntry:
    kind: str
    size_bytes: int

    def validate(self, domain: str) -> None:
        if self.kind not in RESOURCE_KINDS:
            raise SchemaError(f"{domain}: unknown resource kind {self.kind!r}")
        if self.size_bytes < 0:
            raise InvariantError(f"{domain}: resource size is negative")


@dataclass
class CookieEntry:
    name: str
    domain: str
    first_party: bool

    def validate(self, record_domain: str) -> None:
        if not self.name:
            raise InvariantError(f"{record_domain}: cookie with empty name")


@dataclass
class CrawlTelemetry:
    dom_stats: DomSnapshotStats
    transactions: list[HttpTransaction] = field(default_factory=list)
    cookies: list[CookieEntry] = field(default_factory=list)
    resources: list[ResourceEntry] = field(default_factory=list)
    timings: TimingProfile = field(default_factory=TimingProfile)
    js_heap_used_bytes: int = 0
    js_heap_total_bytes: int = 0
    frame_count: int = 0
    js_event_listener_count: int = 0
    beacon_pixel_count: int = 0

    def validate(self, domain: str) -> None:
        for name in ("js_heap_used_bytes", "js_heap_total_bytes", "frame_count",
                     "js_event_listener_count", "beacon_pixel_count"):
            if getattr(self, name) < 0:
                raise InvariantError(f"{domain}: {name} is negative")
        if self.js_heap_used_bytes > self.js_heap_total_bytes:
            raise InvariantError(f"{domain}: js_heap_used_bytes exceeds js_heap_total_bytes")
        self.dom_stats.validate(domain)
        self.timings.validate(domain)
        for tx in self.transactions:
            tx.validate(domain)
        for res in self.resources:
            res.validate(domain)
        for cookie in self.cookies:
            cookie.validate(domain)


@dataclass
class IpAssignment:
    ip: str
    start_date: date
    end_date: date

    @property
    def duration_days(self) -> int:
        return (self.end_date - self.start_date).days


@dataclass
class HistoryRecord:
    domain_birth: Optional[date] = None
    domain_age_days: Optional[float] = None
    park_count: int = 0
    reregistration_count: int = 0
    ip_assignments: list[IpAssignment] = field(default_factory=list)
    coowned_site_count: int = 0
    coowned_analytics_site_count: int = 0

    def validate(self, domain: str) -> None:
        if self.domain_age_days is not None and self.domain_age_days < 0:
            raise InvariantError(f"{domain}: domain_age_days is negative")
        for name in ("park_count", "reregistration_count",
                     "coowned_site_count", "coowned_analytics_site_count"):
            if getattr(self, name) < 0:
                raise InvariantError(f"{domain}: {name} is negative")
        by_ip: dict[str, list[IpAssignment]] = {}
        for assignment in self.ip_assignments:
            if assignment.end_date < assignment.start_date:
                raise InvariantError(
                    f"{domain}: ip assignment for {assignment.ip} ends before it starts"
                )
            by_ip.setdefault(assignment.ip, []).append(assignment)
        for ip, assignments in by_ip.items():
            spans = sorted((a.start_date, a.end_date) for a in assignments)
            for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
                if next_start < prev_end:
                    raise InvariantError(
                        f"{domain}: overlapping ip assignments for {ip}"
                    )


@dataclass
class WebsiteRecord:
    domain: str
    crawl: CrawlTelemetry
    history: HistoryRecord
    label: Optional[str] = None

    def validate(self) -> None:
        if not self.domain:
            raise InvariantError("record with empty domain")
        if "/" in self.domain or ":" in self.domain:
            raise InvariantError(f"{self.domain}: domain contains scheme or path")
        if self.domain != self.domain.lower():
            raise InvariantError(f"{self.domain}: domain is not lowercase")
        if self.label is not None and self.label not in LABELS:
            raise InvariantError(f"{self.domain}: unknown label {self.label!r}")
        self.crawl.validate(self.domain)
        self.history.validate(self.domain)


# --- JSONL serialization ---------------------------------------------------


def _date_out(d: Optional[date]) -> Optional[str]:
    return None if d is None else d.isoformat()


def _date_in(raw: Any, domain: str, where: str) -> Optional[date]:
    if raw is None:
        return None
    try:
        return date.fromisoformat(raw)
    except (TypeError, ValueError):
        raise SchemaError(f"{domain}: bad date in field {where}: {raw!r}")


def record_to_dict(record: WebsiteRecord) -> dict[str, Any]:
    crawl = record.crawl
    history = record.history
    return {
        "domain": record.domain,
        "label": record.label,
        "crawl": {
            "dom_stats": {
                "node_count": crawl.dom_stats.node_count,
                "html_class_count": crawl.dom_stats.html_class_count,
                "layout_object_count": crawl.dom_stats.layout_object_count,
                "element_counts": dict(crawl.dom_stats.element_counts),
            },
            "transactions": [
                {
                    "url": tx.url,
                    "status_code": tx.status_code,
                    "is_redirect": tx.is_redirect,
                    "third_party": tx.third_party,
                    "tracker_category": tx.tracker_category,
                }
                for tx in crawl.transactions
            ],
            "cookies": [
                {"name": c.name, "domain": c.domain, "first_party": c.first_party}
                for c in crawl.cookies
            ],
            "resources": [
                {"kind": r.kind, "size_bytes": r.size_bytes} for r in crawl.resources
            ],
            "timings": {name: crawl.timings.get(name) for name in TIMING_MARKS},
            "js_heap_used_bytes": crawl.js_heap_used_bytes,
            "js_heap_total_bytes": crawl.js_heap_total_bytes,
            "frame_count": crawl.frame_count,
            "js_event_listener_count": crawl.js_event_listener_count,
            "beacon_pixel_count": crawl.beacon_pixel_count,
        },
        "history": {
            "domain_birth": _date_out(history.domain_birth),
            "domain_age_days": history.domain_age_days,
            "park_count": history.park_count,
            "reregistration_count": history.reregistration_count,
            "ip_assignments": [
                {
                    "ip": a.ip,
                    "start_date": a.start_date.isoformat(),
                    "end_date": a.end_date.isoformat(),
                }
                for a in history.ip_assignments
            ],
            "coowned_site_count": history.coowned_site_count,
            "coowned_analytics_site_count": history.coowned_analytics_site_count,
        },
    }


def _require(mapping: dict, key: str, domain: str) -> Any:
    if key not in mapping:
        raise SchemaError(f"{domain}: missing field {key!r}")
    return mapping[key]


def record_from_dict(data: dict[str, Any]) -> WebsiteRecord:
    domain = data.get("domain") or "<missing domain>"
    crawl_raw = _require(data, "crawl", domain)
    history_raw = _require(data, "history", domain)
    dom_raw = _require(crawl_raw, "dom_stats", domain)

    try:
        dom_stats = DomSnapshotStats(
            node_count=int(_require(dom_raw, "node_count", domain)),
            html_class_count=int(_require(dom_raw, "html_class_count", domain)),
            layout_object_count=int(_require(dom_raw, "layout_object_count", domain)),
            element_counts={k: int(v) for k, v in dom_raw.get("element_counts", {}).items()},
        )
        timings = TimingProfile(
            marks={
                name: (None if value is None else float(value))
                for name, value in crawl_raw.get("timings", {}).items()
            }
        )
        crawl = CrawlTelemetry(
            dom_stats=dom_stats,
            transactions=[
                HttpTransaction(
                    url=str(_require(tx, "url", domain)),
                    status_code=int(_require(tx, "status_code", domain)),
                    is_redirect=bool(tx.get("is_redirect", False)),
                    third_party=bool(tx.get("third_party", False)),
                    tracker_category=tx.get("tracker_category"),
                )
                for tx in crawl_raw.get("transactions", [])
            ],
            cookies=[
                CookieEntry(
                    name=str(_require(c, "name", domain)),
                    domain=str(c.get("domain", "")),
                    first_party=bool(c.get("first_party", True)),
                )
                for c in crawl_raw.get("cookies", [])
            ],
            resources=[
                ResourceEntry(
                    kind=str(_require(r, "kind", domain)),
                    size_bytes=int(_require(r, "size_bytes", domain)),
                )
                for r in crawl_raw.get("resources", [])
            ],
            timings=timings,
            js_heap_used_bytes=int(crawl_raw.get("js_heap_used_bytes", 0)),
            js_heap_total_bytes=int(crawl_raw.get("js_heap_total_bytes", 0)),
            frame_count=int(crawl_raw.get("frame_count", 0)),
            js_event_listener_count=int(crawl_raw.get("js_event_listener_count", 0)),
            beacon_pixel_count=int(crawl_raw.get("beacon_pixel_count", 0)),
        )
        age = history_raw.get("domain_age_days")
        history = HistoryRecord(
            domain_birth=_date_in(history_raw.get("domain_birth"), domain, "domain_birth"),
            domain_age_days=None if age is None else float(age),
            park_count=int(history_raw.get("park_count", 0)),
            reregistration_count=int(history_raw.get("reregistration_count", 0)),
            ip_assignments=[
                IpAssignment(
                    ip=str(_require(a, "ip", domain)),
                    start_date=_date_in(_require(a, "start_date", domain), domain, "start_date"),
                    end_date=_date_in(_require(a, "end_date", domain), domain, "end_date"),
                )
                for a in history_raw.get("ip_assignments", [])
            ],
            coowned_site_count=int(history_raw.get("coowned_site_count", 0)),
            coowned_analytics_site_count=int(history_raw.get("coowned_analytics_site_count", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{domain}: bad field value ({exc})")

    record = WebsiteRecord(
        domain=str(_require(data, "domain", domain)),
        label=data.get("label"),
        crawl=crawl,
        history=history,
    )
    record.validate()
    return record


def load_dataset(path: str) -> list[WebsiteRecord]:
    """Load a JSONL dataset, validating every record; order is preserved."""
    records: list[WebsiteRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: malformed JSON ({exc.msg})")
            try:
                records.append(record_from_dict(data))
            except (SchemaError, InvariantError) as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}")
    return records


def save_dataset(records: Iterable[WebsiteRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record_to_dict(record), sort_keys=True))
            handle.write("\n")


# --- Two-sample Kolmogorov-Smirnov test ------------------------------------


def _kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(t) = 2*sum_k (-1)^(k-1) exp(-2 k^2 t^2)."""
    if t <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 101):
        term = math.exp(-2.0 * (k * t) ** 2)
        total += sign * term
        if term < 1e-16:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(sample_a: list[float], sample_b: list[float]) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value.

    The statistic is the supremum distance between the two empirical CDFs;
    the p-value uses the asymptotic Kolmogorov distribution with effective
    sample size n_a*n_b/(n_a+n_b).
    """
    if not sample_a or not sample_b:
        raise InvariantError("ks_statistic requires two non-empty samples")
    a = sorted(float(x) for x in sample_a)
    b = sorted(float(x) for x in sample_b)
    na, nb = len(a), len(b)
    i = j = 0
    d = 0.0
    while i < na and j < nb:
        x = a[i] if a[i] <= b[j] else b[j]
        while i < na and a[i] <= x:
            i += 1
        while j < nb and b[j] <= x:
            j += 1
        d = max(d, abs(i / na - j / nb))
    effective = math.sqrt(na * nb / (na + nb))
    return d, _kolmogorov_sf(effective * d)


# Reference "crawl day" used by the synthetic generator so that generated
# dates (domain_birth, ip assignment spans) are reproducible byte-for-byte.
SYNTH_REFERENCE_DATE = date(2023, 1, 1)


def days_before_reference(days: float) -> date:
    return SYNTH_REFERENCE_DATE - timedelta(days=int(round(days)))
