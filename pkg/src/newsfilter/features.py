"""Fixed 187-entry feature catalog and per-record feature extraction.

The catalog ships as ``data/feature_catalog.tsv`` (name, source, realtime
flag); its order is frozen so that vectors, fitted preprocessors and trained
models stay aligned across versions. Extraction is pure: a record either
yields a number for a feature or the explicit absent value (None), never an
error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from typing import Optional
from urllib.parse import urlsplit

from .errors import InvariantError, SchemaError
from .preprocess import summarize_status
from .telemetry import (
    DOM_TAGS,
    RESOURCE_KINDS,
    TIMING_MARKS,
    TRACKER_CATEGORIES,
    HttpTransaction,
    WebsiteRecord,
)

CATALOG_SIZE = 187

SOURCES = ("dns", "ip", "dom", "http", "html", "traffic", "cookie", "redirect")

# The 35 names a trained model considers most informative, grouped by data
# family. The dns/ip families (8 names) are only obtainable from background
# crawls, so they are unavailable in real-time mode.
TOP35_DNS = ("domain_birth", "domain_age_days", "domainLookupStart", "domainLookupEnd")
TOP35_IP = ("IP_change_after_max", "IP_age_days", "total_coownedSites",
            "numOfsites_coowned_analytics")
TOP35_DOM = ("domLoading", "domContentLoadedEventStart", "domContentLoadedEventEnd",
             "domComplete", "domInteractive")
TOP35_HTTP = ("connectStart", "connectEnd", "responseStart", "responseEnd",
              "requestStart", "fetchStart", "secureConnectionStart",
              "loadEventEnd", "loadEventStart")
TOP35_HTML = ("LayoutObjects", "Nodes", "JSHeapUsedSize", "JSHeapTotalSize",
              "FirstMeaningfulPaint", "HTML_classes", "page_size", "image_size",
              "css_size", "text_size", "js_size", "audio_size", "video_size")

TOP35 = TOP35_DNS + TOP35_IP + TOP35_DOM + TOP35_HTTP + TOP35_HTML
REALTIME_EXCLUDED = frozenset(TOP35_DNS + TOP35_IP)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    source: str
    realtime_available: bool


@dataclass(frozen=True)
class FeatureCatalog:
    entries: tuple[CatalogEntry, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != CATALOG_SIZE:
            raise InvariantError(
                f"catalog must have {CATALOG_SIZE} entries, got {len(self.entries)}"
            )
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise InvariantError("catalog names are not unique")
        missing = [n for n in TOP35 if n not in set(names)]
        if missing:
            raise InvariantError(f"catalog is missing top-35 names: {missing}")
        flags = {e.name: e.realtime_available for e in self.entries}
        offline = [n for n in TOP35 if not flags[n]]
        if set(offline) != set(REALTIME_EXCLUDED):
            raise InvariantError(
                "exactly the 8 dns/ip top-35 names must be realtime-unavailable"
            )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def realtime_top_names(self) -> tuple[str, ...]:
        """The top-35 names measurable during the page visit itself."""
        return tuple(n for n in TOP35 if n not in REALTIME_EXCLUDED)


@dataclass
class FeatureVector:
    domain: str
    values: list[Optional[float]]
    label: Optional[str] = None


@dataclass
class FeatureMatrix:
    catalog: FeatureCatalog
    rows: list[FeatureVector] = field(default_factory=list)

    def to_arrays(self):
        """(n, 187) float64 array with NaN for absent values, plus labels."""
        import numpy as np

        data = np.full((len(self.rows), len(self.catalog.entries)), np.nan)
        for i, row in enumerate(self.rows):
            for j, value in enumerate(row.values):
                if value is not None:
                    data[i, j] = value
        labels = [row.label for row in self.rows]
        return data, labels


def load_catalog(path: Optional[str] = None) -> FeatureCatalog:
    """Load a catalog TSV (name<TAB>source<TAB>realtime{0|1}, 187 lines)."""
    if path is None:
        text = resources.files("newsfilter.data").joinpath("feature_catalog.tsv").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise SchemaError(f"catalog line {lineno}: expected 3 tab-separated fields")
        name, source, realtime = parts
        if source not in SOURCES:
            raise SchemaError(f"catalog line {lineno}: unknown source {source!r}")
        if realtime not in ("0", "1"):
            raise SchemaError(f"catalog line {lineno}: realtime flag must be 0 or 1")
        entries.append(CatalogEntry(name, source, realtime == "1"))
    return FeatureCatalog(entries=tuple(entries))


_default_catalog: Optional[FeatureCatalog] = None


def default_catalog() -> FeatureCatalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = load_catalog()
    return _default_catalog


# --- Tracker category list ---------------------------------------------------


@dataclass(frozen=True)
class CategoryList:
    """Host-suffix to tracker-category map, longest suffix wins."""

    suffixes: dict[str, str]

    def match(self, host: str) -> Optional[str]:
        host = host.lower().rstrip(".")
        parts = host.split(".")
        for i in range(len(parts)):
            candidate = ".".join(parts[i:])
            category = self.suffixes.get(candidate)
            if category is not None:
                return category
        return None


def load_category_list(path: Optional[str] = None) -> CategoryList:
    if path is None:
        text = resources.files("newsfilter.data").joinpath("tracker_categories.tsv").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    suffixes: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise SchemaError(f"category list line {lineno}: expected host_suffix<TAB>category")
        suffix, category = parts
        if category not in TRACKER_CATEGORIES:
            raise SchemaError(f"category list line {lineno}: unknown category {category!r}")
        suffixes[suffix.lower()] = category
    return CategoryList(suffixes=suffixes)


_default_categories: Optional[CategoryList] = None


def default_category_list() -> CategoryList:
    global _default_categories
    if _default_categories is None:
        _default_categories = load_category_list()
    return _default_categories


def transaction_host(tx: HttpTransaction) -> str:
    netloc = urlsplit(tx.url).netloc.lower()
    return netloc.rsplit("@", 1)[-1].split(":", 1)[0]


def traffic_category_counts(
    transactions: list[HttpTransaction], category_list: CategoryList
) -> dict[str, int]:
    """Count requests per tracker category; unmatched hosts land in "none"."""
    counts = {category: 0 for category in TRACKER_CATEGORIES}
    counts["none"] = 0
    for tx in transactions:
        category = category_list.match(transaction_host(tx))
        counts[category if category is not None else "none"] += 1
    return counts


def redirect_stats(
    transactions: list[HttpTransaction],
) -> tuple[int, int, dict[str, int]]:
    """(longest consecutive redirect run, redirect total, status-class counts)."""
    chain_max = 0
    run = 0
    redirect_count = 0
    status_counts: dict[str, int] = {}
    for tx in transactions:
        if tx.is_redirect:
            run += 1
            redirect_count += 1
            chain_max = max(chain_max, run)
        else:
            run = 0
        klass = summarize_status(tx.status_code)
        status_counts[klass] = status_counts.get(klass, 0) + 1
    return chain_max, redirect_count, status_counts


# --- Extraction ---------------------------------------------------------------

_EPOCH = date(1970, 1, 1)

_TAG_GROUPS = {
    "interactive_element_count": ("button", "form", "a"),
    "media_element_count": ("img", "video", "audio"),
    "structure_element_count": ("div", "section", "table", "ul", "li"),
    "text_element_count": ("p", "span", "li"),
}


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def compute_feature_values(
    record: WebsiteRecord, categories: Optional[CategoryList] = None
) -> dict[str, Optional[float]]:
    """All 187 feature values for one record, keyed by catalog name."""
    if categories is None:
        categories = default_category_list()
    crawl = record.crawl
    history = record.history
    timings = crawl.timings
    out: dict[str, Optional[float]] = {}

    def mark(name: str) -> Optional[float]:
        return timings.get(name)

    def diff(hi: str, lo: str) -> Optional[float]:
        a, b = mark(lo), mark(hi)
        if a is None or b is None:
            return None
        return b - a

    # dns/ip history
    out["domain_birth"] = (
        None if history.domain_birth is None
        else float((history.domain_birth - _EPOCH).days)
    )
    out["domain_age_days"] = history.domain_age_days
    durations = [a.duration_days for a in history.ip_assignments]
    if durations:
        out["IP_age_days"] = sum(durations) / len(durations)
        held: dict[str, int] = {}
        for a in history.ip_assignments:
            held[a.ip] = held.get(a.ip, 0) + a.duration_days
        out["IP_change_after_max"] = float(max(held.values()))
        out["ip_total_hold_days"] = float(sum(durations))
        out["ip_min_hold_days"] = float(min(durations))
    else:
        out["IP_age_days"] = None
        out["IP_change_after_max"] = None
        out["ip_total_hold_days"] = None
        out["ip_min_hold_days"] = None
    out["ip_assignment_count"] = float(len(history.ip_assignments))
    starts = sorted(a.start_date for a in history.ip_assignments)
    ends = sorted(a.end_date for a in history.ip_assignments)
    if len(starts) >= 2:
        gaps = [(starts[i + 1] - ends[i]).days for i in range(len(starts) - 1)]
        out["ip_mean_gap_days"] = sum(gaps) / len(gaps)
    else:
        out["ip_mean_gap_days"] = None
    out["total_coownedSites"] = float(history.coowned_site_count)
    out["numOfsites_coowned_analytics"] = float(history.coowned_analytics_site_count)
    out["park_count"] = float(history.park_count)
    out["reregistration_count"] = float(history.reregistration_count)
    out["park_rereg_total"] = float(history.park_count + history.reregistration_count)

    # navigation timing marks, verbatim; FirstMeaningfulPaint keeps the
    # catalog's capitalization
    for name in TIMING_MARKS:
        if name == "firstMeaningfulPaint":
            continue
        out[name] = mark(name)
    out["FirstMeaningfulPaint"] = mark("firstMeaningfulPaint")

    out["connect_diff"] = diff("connectEnd", "connectStart")
    out["domain_lookup_diff"] = diff("domainLookupEnd", "domainLookupStart")
    out["response_diff"] = diff("responseEnd", "responseStart")
    out["dom_content_loaded_diff"] = diff(
        "domContentLoadedEventEnd", "domContentLoadedEventStart"
    )
    out["load_event_diff"] = diff("loadEventEnd", "loadEventStart")
    out["request_response_gap"] = diff("responseStart", "requestStart")
    out["pre_request_ms"] = diff("requestStart", "fetchStart")
    out["ttfb_ms"] = diff("responseStart", "fetchStart")
    out["dom_build_ms"] = diff("domInteractive", "domLoading")
    out["dom_settle_ms"] = diff("domComplete", "domInteractive")
    out["full_load_ms"] = diff("loadEventEnd", "fetchStart")
    out["paint_delay_ms"] = diff("firstMeaningfulPaint", "domInteractive")

    load_end = mark("loadEventEnd")
    for name in TIMING_MARKS:
        if name == "loadEventEnd":
            continue
        value = mark(name)
        key = f"{name}_fraction"
        if value is None or load_end is None or load_end == 0:
            out[key] = None
        else:
            out[key] = value / load_end
    out["timing_marks_missing_count"] = float(
        sum(1 for name in TIMING_MARKS if mark(name) is None)
    )
    out["secure_connection_used"] = float(mark("secureConnectionStart") is not None)

    # DOM snapshot
    dom = crawl.dom_stats
    out["Nodes"] = float(dom.node_count)
    out["HTML_classes"] = float(dom.html_class_count)
    out["LayoutObjects"] = float(dom.layout_object_count)
    element_total = sum(dom.element_counts.get(tag, 0) for tag in DOM_TAGS)
    out["element_total"] = float(element_total)
    for tag in DOM_TAGS:
        count = dom.element_counts.get(tag, 0)
        out[f"element_count_{tag}"] = float(count)
        out[f"element_share_{tag}"] = _ratio(count, element_total)
    for group, tags in _TAG_GROUPS.items():
        out[group] = float(sum(dom.element_counts.get(t, 0) for t in tags))
    out["interactive_share"] = _ratio(out["interactive_element_count"], element_total)
    out["media_share"] = _ratio(out["media_element_count"], element_total)
    out["frame_count"] = float(crawl.frame_count)
    out["js_event_listener_count"] = float(crawl.js_event_listener_count)

    # JS heap
    out["JSHeapUsedSize"] = float(crawl.js_heap_used_bytes)
    out["JSHeapTotalSize"] = float(crawl.js_heap_total_bytes)
    out["heap_usage_ratio"] = _ratio(crawl.js_heap_used_bytes, crawl.js_heap_total_bytes)

    # resources
    kind_sizes = {kind: 0 for kind in RESOURCE_KINDS}
    kind_counts = {kind: 0 for kind in RESOURCE_KINDS}
    for res in crawl.resources:
        kind_sizes[res.kind] += res.size_bytes
        kind_counts[res.kind] += 1
    page_size = sum(kind_sizes.values())
    out["page_size"] = float(page_size)
    out["resource_count"] = float(len(crawl.resources))
    for kind in RESOURCE_KINDS:
        out[f"{kind}_size"] = float(kind_sizes[kind])
        out[f"{kind}_count"] = float(kind_counts[kind])
        out[f"{kind}_size_ratio"] = _ratio(kind_sizes[kind], page_size)
        out[f"{kind}_count_ratio"] = _ratio(kind_counts[kind], len(crawl.resources))

    # HTTP traffic
    txs = crawl.transactions
    n_tx = len(txs)
    third = sum(1 for tx in txs if tx.third_party)
    out["request_count"] = float(n_tx)
    out["third_party_request_count"] = float(third)
    out["first_party_request_count"] = float(n_tx - third)
    out["third_party_request_ratio"] = _ratio(third, n_tx)
    out["first_party_request_ratio"] = _ratio(n_tx - third, n_tx)
    out["https_request_ratio"] = _ratio(
        sum(1 for tx in txs if tx.url.lower().startswith("https://")), n_tx
    )
    hosts = {transaction_host(tx) for tx in txs}
    out["distinct_request_host_count"] = float(len(hosts))
    out["distinct_third_party_host_count"] = float(
        len({transaction_host(tx) for tx in txs if tx.third_party})
    )

    category_counts = traffic_category_counts(txs, categories)
    tracked = sum(category_counts[c] for c in TRACKER_CATEGORIES)
    for category in TRACKER_CATEGORIES:
        out[f"{category}_request_count"] = float(category_counts[category])
        out[f"{category}_request_ratio"] = _ratio(category_counts[category], n_tx)
    out["uncategorized_request_count"] = float(category_counts["none"])
    out["tracker_request_count"] = float(tracked)
    out["tracker_request_ratio"] = _ratio(tracked, n_tx)
    out["beacon_pixel_count"] = float(crawl.beacon_pixel_count)
    out["beacon_request_ratio"] = _ratio(crawl.beacon_pixel_count, n_tx)

    # redirects and statuses
    chain_max, redirect_count, status_counts = redirect_stats(txs)
    out["redirect_chain_max"] = float(chain_max)
    out["redirect_count"] = float(redirect_count)
    out["redirect_ratio"] = _ratio(redirect_count, n_tx)
    out["has_redirect"] = float(redirect_count > 0)
    for klass in ("1**", "2**", "3**", "4**", "5**"):
        count = status_counts.get(klass, 0)
        out[f"status_{klass[0]}xx_count"] = float(count)
        out[f"status_{klass[0]}xx_ratio"] = _ratio(count, n_tx)
    out["success_ratio"] = out["status_2xx_ratio"]
    out["error_response_ratio"] = _ratio(
        status_counts.get("4**", 0) + status_counts.get("5**", 0), n_tx
    )
    out["status_class_distinct_count"] = float(len(status_counts))

    # cookies
    cookies = crawl.cookies
    first_party = sum(1 for c in cookies if c.first_party)
    out["cookie_count"] = float(len(cookies))
    out["first_party_cookie_count"] = float(first_party)
    out["third_party_cookie_count"] = float(len(cookies) - first_party)
    out["third_party_cookie_ratio"] = _ratio(len(cookies) - first_party, len(cookies))
    out["cookies_per_request"] = _ratio(len(cookies), n_tx)
    out["cookie_domain_diversity"] = float(len({c.domain for c in cookies}))
    out["mean_cookie_name_length"] = (
        sum(len(c.name) for c in cookies) / len(cookies) if cookies else 0.0
    )
    out["has_ga_cookie"] = float(any(c.name.startswith("_ga") for c in cookies))

    return out


def extract(
    record: WebsiteRecord,
    catalog: Optional[FeatureCatalog] = None,
    categories: Optional[CategoryList] = None,
) -> FeatureVector:
    """Deterministic 187-value vector for one record, aligned to the catalog."""
    if catalog is None:
        catalog = default_catalog()
    values = compute_feature_values(record, categories)
    row: list[Optional[float]] = []
    for entry in catalog.entries:
        if entry.name not in values:
            raise InvariantError(f"extractor does not produce feature {entry.name!r}")
        value = values[entry.name]
        row.append(None if value is None else float(value))
    return FeatureVector(domain=record.domain, values=row, label=record.label)


def extract_matrix(
    records: list[WebsiteRecord],
    catalog: Optional[FeatureCatalog] = None,
    categories: Optional[CategoryList] = None,
) -> FeatureMatrix:
    if catalog is None:
        catalog = default_catalog()
    rows = [extract(record, catalog, categories) for record in records]
    return FeatureMatrix(catalog=catalog, rows=rows)


# --- Matrix file format -------------------------------------------------------


def save_matrix(matrix: FeatureMatrix, path: str, provenance: Optional[dict] = None) -> None:
    doc = {
        "names": list(matrix.catalog.names),
        "sources": [e.source for e in matrix.catalog.entries],
        "realtime": [int(e.realtime_available) for e in matrix.catalog.entries],
        "rows": [
            {"domain": row.domain, "label": row.label, "values": row.values}
            for row in matrix.rows
        ],
    }
    if provenance:
        doc["provenance"] = provenance
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, sort_keys=True)
        handle.write("\n")


def load_matrix(path: str) -> FeatureMatrix:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: malformed matrix file ({exc.msg})")
    for key in ("names", "sources", "realtime", "rows"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    entries = tuple(
        CatalogEntry(name, source, bool(rt))
        for name, source, rt in zip(doc["names"], doc["sources"], doc["realtime"])
    )
    catalog = FeatureCatalog(entries=entries)
    rows = []
    for i, row in enumerate(doc["rows"]):
        values = row.get("values")
        if not isinstance(values, list) or len(values) != CATALOG_SIZE:
            raise SchemaError(f"{path}: row {i} does not have {CATALOG_SIZE} values")
        rows.append(
            FeatureVector(
                domain=row.get("domain", ""),
                label=row.get("label"),
                values=[None if v is None else float(v) for v in values],
            )
        )
    return FeatureMatrix(catalog=catalog, rows=rows)
