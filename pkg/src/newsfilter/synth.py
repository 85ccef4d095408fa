"""Synthetic dataset generator calibrated to published per-class medians.

Twelve quantities carry class-specific median targets (log-normal with shape
0.75, rescaled so the per-class sample median lands on the target). The
fake-class domain age targets zero, reproduced as max(0, log-normal - offset)
so most fake sites are newborn while a tail survives into the real class's
range. Remaining quantities use baseline distributions; those underlying the
catalog's top-35 names get small class effects so the selection stage has a
realistic signal to recover, everything else is class-independent.

Output is a pure function of the config: one seeded generator, fixed draw
order, no wall-clock inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import timedelta

import numpy as np

from .errors import InvariantError
from .features import default_category_list
from .telemetry import (
    DOM_TAGS,
    SYNTH_REFERENCE_DATE,
    CookieEntry,
    CrawlTelemetry,
    DomSnapshotStats,
    HistoryRecord,
    HttpTransaction,
    IpAssignment,
    ResourceEntry,
    TimingProfile,
    WebsiteRecord,
)

LOGNORMAL_SHAPE = 0.75

# Base scale and clamp offset used when a domain-age target is zero: the
# offset sits at the 73rd percentile of the base log-normal, so a solid
# majority of draws clamp to zero while the tail reaches a few years.
_ZERO_AGE_BASE = 300.0
_ZERO_AGE_OFFSET = 480.0


@dataclass(frozen=True)
class MedianPair:
    """Per-class median targets for one calibrated quantity."""

    real: float
    fake: float

    def for_class(self, label: str) -> float:
        return self.real if label == "real" else self.fake


# The twelve analyzed quantities and their published per-class medians.
# Time values are milliseconds, sizes are bytes, ages are days.
DEFAULT_MEDIANS: dict[str, MedianPair] = {
    "domain_age_days": MedianPair(real=6197.0, fake=0.0),
    "IP_age_days": MedianPair(real=1148.0, fake=815.5),
    "IP_change_after_max": MedianPair(real=2857.0, fake=1890.0),
    "connect_diff": MedianPair(real=105.5, fake=98.0),
    "domLoading": MedianPair(real=1306.0, fake=1179.0),
    "HTML_classes": MedianPair(real=638.0, fake=262.0),
    "Nodes": MedianPair(real=3760.0, fake=1778.0),
    "JSHeapUsedSize": MedianPair(real=12.03e6, fake=6.37e6),
    "page_size": MedianPair(real=2.31e6, fake=1.03e6),
    "text_size": MedianPair(real=332.42e3, fake=154.99e3),
    "image_size": MedianPair(real=926.0e3, fake=402.0e3),
    "js_size": MedianPair(real=680.63e3, fake=327.8e3),
}

# Whole-cascade speed factor per class (fake, real): every timing gap scales
# with it, so absolute marks carry the class signal while single-gap diffs
# and mark/loadEventEnd fractions stay comparatively uninformative.
_SPEED = (0.885, 1.0)
_SPEED_SIGMA = 0.25

# Class-independent millisecond bases for the cascade gaps.
_GAPS = {
    "fetch_start": 15.5, "lookup_gap": 2.2, "lookup_diff": 24.0,
    "connect_gap": 1.2, "request_gap": 2.1, "response_latency": 52.0,
    "response_diff": 86.0, "interactive_gap": 355.0, "dcl_gap": 39.0,
    "dcl_duration": 28.0, "complete_gap": 430.0, "load_gap": 2.6,
    "load_duration": 23.0, "fmp_gap": 128.0,
}
_GAP_SIGMA = 0.30
_SECURE_OFFSET = 0.35

# Remaining small class effects (fake, real); directions follow the published
# comparisons where one exists.
_MILD = {
    "coowned_analytics": (3.2, 1.7),
}
_AV_PRESENCE = {"audio": 0.09, "video": 0.16}
_AV_SHARE_PRESENT = {"audio": 0.015, "video": 0.07}

# Fraction of real sites drawn young: keeps domain age informative without
# letting it separate the classes outright.
_YOUNG_REAL_FRACTION = 0.09
_YOUNG_REAL_FACTOR = 0.04

# Page-share budgets for the uncalibrated resource kinds. Keeping every kind
# proportional to the page total makes the size-ratio features carry almost
# no class signal of their own.
_CSS_SHARE = 0.085
_FONT_SHARE = 0.021
_OTHER_SHARE = 0.028

_ELEMENT_SCALES = {
    "div": 420, "p": 160, "a": 310, "img": 65, "button": 18, "section": 24,
    "span": 240, "iframe": 4, "script": 38, "link": 28, "form": 3, "ul": 22,
    "li": 120, "table": 3, "video": 1, "audio": 1,
}
_SPARSE_TAGS = {"iframe": 0.7, "form": 0.75, "table": 0.35, "video": 0.2, "audio": 0.08}

_COOKIE_NAMES = ("_ga", "_gid", "sess_id", "uid", "csrf_token", "prefs",
                 "consent", "_fbp", "theme", "visitor")


@dataclass(frozen=True)
class SynthConfig:
    n_real: int
    n_fake: int
    seed: int
    medians: dict[str, MedianPair] = field(default_factory=lambda: dict(DEFAULT_MEDIANS))

    def validate(self) -> None:
        if self.n_real < 1 or self.n_fake < 1:
            raise InvariantError("each class needs at least one record")
        if set(self.medians) != set(DEFAULT_MEDIANS):
            unknown = set(self.medians) ^ set(DEFAULT_MEDIANS)
            raise InvariantError(f"median targets must cover exactly the 12 quantities; off by {sorted(unknown)}")
        for name, pair in self.medians.items():
            if pair.real < 0 or pair.fake < 0:
                raise InvariantError(f"negative median target for {name}")
            if name in ("IP_age_days", "IP_change_after_max"):
                continue
        for label in ("real", "fake"):
            m = self.medians["IP_age_days"].for_class(label)
            x = self.medians["IP_change_after_max"].for_class(label)
            if m > 0 and x < m:
                raise InvariantError("IP_change_after_max target below IP_age_days target")

    def with_counts(self, n_real: int, n_fake: int) -> "SynthConfig":
        return replace(self, n_real=n_real, n_fake=n_fake)


def _lognormal(rng: np.random.Generator, n: int, median: float, sigma: float) -> np.ndarray:
    return median * np.exp(sigma * rng.standard_normal(n))


def _median_one(values: np.ndarray) -> np.ndarray:
    return values / np.median(values)


def _calibrated(rng: np.random.Generator, n: int, target: float,
                core: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Vector with sample median exactly on target, shaped by core * jitter."""
    g = core * np.exp(jitter * rng.standard_normal(n)) if jitter else core.copy()
    return target * _median_one(g)


def _split_bytes(rng: np.random.Generator, total: int, parts: int) -> list[int]:
    if total <= 0 or parts <= 0:
        return []
    if parts == 1:
        return [total]
    weights = rng.uniform(0.2, 1.0, size=parts)
    raw = np.floor(total * weights / weights.sum()).astype(int)
    raw[0] += total - int(raw.sum())
    return [int(v) for v in raw]


def _generate_class(rng: np.random.Generator, n: int, label: str,
                    medians: dict[str, MedianPair]) -> list[WebsiteRecord]:
    pick = lambda key: medians[key].for_class(label)
    mild = lambda key: _MILD[key][0] if label == "fake" else _MILD[key][1]

    # domain age and birth
    g_age = _lognormal(rng, n, 1.0, LOGNORMAL_SHAPE)
    young = rng.random(n) < _YOUNG_REAL_FRACTION
    g_age = _median_one(np.where(
        young, g_age * _YOUNG_REAL_FACTOR * np.exp(0.8 * rng.standard_normal(n)), g_age
    ))
    age_target = pick("domain_age_days")
    if age_target == 0:
        ages = np.maximum(0.0, _ZERO_AGE_BASE * g_age - _ZERO_AGE_OFFSET)
    else:
        ages = age_target * g_age

    # IP assignment plan: per-record mean duration M and max-hold X with a
    # fixed X/M ratio, so both medians calibrate through one latent factor.
    m_target = pick("IP_age_days")
    x_target = pick("IP_change_after_max")
    g_ip = _median_one(_lognormal(rng, n, 1.0, LOGNORMAL_SHAPE))
    mean_hold = m_target * g_ip
    ratio = x_target / m_target if m_target > 0 else 0.0
    max_hold = np.minimum(mean_hold * ratio, 600_000.0)

    # DOM shape
    g_dom = _median_one(_lognormal(rng, n, 1.0, 0.65))
    nodes = np.rint(_calibrated(rng, n, pick("Nodes"), g_dom, jitter=0.35)).astype(int)
    classes = np.rint(_calibrated(rng, n, pick("HTML_classes"), g_dom, jitter=0.45)).astype(int)
    layout = np.rint(nodes * 0.82 * _median_one(_lognormal(rng, n, 1.0, 0.15))).astype(int)

    element_counts = {}
    for tag, scale in _ELEMENT_SCALES.items():
        counts = np.rint(_lognormal(rng, n, scale, 0.55)).astype(int)
        if tag in _SPARSE_TAGS:
            counts = counts * (rng.random(n) < _SPARSE_TAGS[tag])
        element_counts[tag] = np.maximum(counts, 0)

    # JS heap
    g_heap = _median_one(_lognormal(rng, n, 1.0, LOGNORMAL_SHAPE))
    heap_used = np.rint(_calibrated(rng, n, pick("JSHeapUsedSize"), g_heap, jitter=0.2)).astype(np.int64)
    heap_total = np.rint(heap_used * (1.0 + 0.45 * _median_one(_lognormal(rng, n, 1.0, 0.3)))).astype(np.int64)

    # resource byte budgets (comonotone through one page-scale factor)
    g_size = _median_one(_lognormal(rng, n, 1.0, 0.7))
    page_t = pick("page_size")
    image_b = _calibrated(rng, n, pick("image_size"), g_size, jitter=0.25)
    js_b = _calibrated(rng, n, pick("js_size"), g_size, jitter=0.25)
    text_b = _calibrated(rng, n, pick("text_size"), g_size, jitter=0.25)
    css_b = _calibrated(rng, n, _CSS_SHARE * page_t, g_size, jitter=0.25)
    font_b = _calibrated(rng, n, _FONT_SHARE * page_t, g_size, jitter=0.5)
    other_b = _calibrated(rng, n, _OTHER_SHARE * page_t, g_size, jitter=0.5)
    audio_b = (rng.random(n) < _AV_PRESENCE["audio"]) * (
        _AV_SHARE_PRESENT["audio"] * page_t * g_size * np.exp(0.6 * rng.standard_normal(n))
    )
    video_b = (rng.random(n) < _AV_PRESENCE["video"]) * (
        _AV_SHARE_PRESENT["video"] * page_t * g_size * np.exp(0.7 * rng.standard_normal(n))
    )

    kind_budgets = {
        "image": image_b, "js": js_b, "text": text_b, "css": css_b,
        "font": font_b, "other": other_b, "audio": audio_b, "video": video_b,
    }
    kind_parts = {
        "image": np.maximum(np.rint(_lognormal(rng, n, 18, 0.5)), 1).astype(int),
        "js": np.maximum(np.rint(_lognormal(rng, n, 12, 0.5)), 1).astype(int),
        "text": np.maximum(np.rint(_lognormal(rng, n, 6, 0.5)), 1).astype(int),
        "css": np.maximum(np.rint(_lognormal(rng, n, 4, 0.5)), 1).astype(int),
        "font": np.maximum(np.rint(_lognormal(rng, n, 2, 0.4)), 1).astype(int),
        "other": np.maximum(np.rint(_lognormal(rng, n, 3, 0.5)), 1).astype(int),
        "audio": np.ones(n, dtype=int),
        "video": np.ones(n, dtype=int),
    }

    # navigation-timing cascade: one class-scaled speed factor multiplies all
    # gaps, so summed marks average away per-gap noise and stay sharper than
    # any single diff feature
    speed = _SPEED[0 if label == "fake" else 1] * np.exp(
        _SPEED_SIGMA * rng.standard_normal(n)
    )

    def gap(key: str) -> np.ndarray:
        return _GAPS[key] * speed * np.exp(_GAP_SIGMA * rng.standard_normal(n))

    fetch_start = gap("fetch_start")
    lookup_start = fetch_start + gap("lookup_gap")
    lookup_end = lookup_start + gap("lookup_diff")
    connect_start = lookup_end + gap("connect_gap")
    connect_diff = _calibrated(
        rng, n, pick("connect_diff"),
        speed * np.exp(0.707 * rng.standard_normal(n)),
    )
    connect_end = connect_start + connect_diff
    secure_start = connect_start + _SECURE_OFFSET * connect_diff * np.exp(
        0.1 * rng.standard_normal(n)
    )
    secure_absent = rng.random(n) < 0.08
    request_start = connect_end + gap("request_gap")
    response_start = request_start + gap("response_latency")
    response_end = response_start + gap("response_diff")
    dom_loading = _calibrated(
        rng, n, pick("domLoading"),
        speed * np.exp(0.707 * rng.standard_normal(n)),
    )
    dom_interactive = dom_loading + gap("interactive_gap")
    dcl_start = dom_interactive + gap("dcl_gap")
    dcl_end = dcl_start + gap("dcl_duration")
    dom_complete = dcl_end + gap("complete_gap")
    load_start = dom_complete + gap("load_gap")
    load_end = load_start + gap("load_duration")
    fmp = dom_interactive + gap("fmp_gap")
    fmp_absent = rng.random(n) < 0.05

    # traffic, cookies, misc counters (class-independent)
    tx_counts = np.maximum(np.rint(_lognormal(rng, n, 46.0, 0.5)), 4).astype(int)
    chain_lens = rng.choice([0, 1, 2, 3], size=n, p=[0.55, 0.30, 0.10, 0.05])
    cookie_counts = np.maximum(np.rint(_lognormal(rng, n, 11.0, 0.6)), 0).astype(int)
    frame_counts = rng.poisson(3.0, size=n)
    listener_counts = np.rint(_lognormal(rng, n, 430.0, 0.6)).astype(int)
    beacon_counts = rng.poisson(1.4, size=n)
    park_counts = np.minimum(rng.poisson(0.25, size=n), 6)
    rereg_counts = np.minimum(rng.poisson(0.12, size=n), 4)
    coowned = np.rint(_lognormal(rng, n, 7.0, 0.9)).astype(int)
    coowned_analytics = np.rint(_lognormal(rng, n, mild("coowned_analytics"), 0.8)).astype(int)

    categories = default_category_list()
    tracker_hosts = sorted(categories.suffixes)

    records = []
    for i in range(n):
        domain = f"{label}-{i:05d}.synthetic.test"

        resources = []
        for kind, budget in kind_budgets.items():
            total = int(round(float(budget[i])))
            for size in _split_bytes(rng, total, int(kind_parts[kind][i])):
                resources.append(ResourceEntry(kind=kind, size_bytes=size))

        transactions = []
        chain = int(chain_lens[i])
        for j in range(int(tx_counts[i])):
            third = bool(j > 0 and rng.random() < 0.55)
            if third and rng.random() < 0.35:
                host = tracker_hosts[int(rng.integers(len(tracker_hosts)))]
            elif third:
                host = f"cdn{int(rng.integers(40))}.sharedhost.example"
            else:
                host = domain
            scheme = "https" if rng.random() < 0.97 else "http"
            url = f"{scheme}://{host}/r{j}"
            if j < chain:
                status, redirect = 301, True
            else:
                klass = rng.choice(["2xx", "4xx", "5xx", "1xx"],
                                   p=[0.925, 0.055, 0.015, 0.005])
                status = {
                    "2xx": int(rng.choice([200, 200, 200, 201, 204])),
                    "4xx": int(rng.choice([404, 404, 403, 410])),
                    "5xx": int(rng.choice([500, 503])),
                    "1xx": 101,
                }[klass]
                redirect = False
            transactions.append(HttpTransaction(
                url=url, status_code=status, is_redirect=redirect,
                third_party=third, tracker_category=categories.match(host),
            ))

        cookies = []
        for j in range(int(cookie_counts[i])):
            first = bool(rng.random() < 0.58)
            name = _COOKIE_NAMES[int(rng.integers(len(_COOKIE_NAMES)))]
            if j and name in {c.name for c in cookies}:
                name = f"{name}_{j}"
            cookies.append(CookieEntry(
                name=name,
                domain=domain if first else f"cdn{int(rng.integers(40))}.sharedhost.example",
                first_party=first,
            ))

        marks = {
            "fetchStart": round(float(fetch_start[i]), 3),
            "domainLookupStart": round(float(lookup_start[i]), 3),
            "domainLookupEnd": round(float(lookup_end[i]), 3),
            "connectStart": round(float(connect_start[i]), 3),
            "connectEnd": round(float(connect_end[i]), 3),
            "secureConnectionStart": None if secure_absent[i] else round(float(secure_start[i]), 3),
            "requestStart": round(float(request_start[i]), 3),
            "responseStart": round(float(response_start[i]), 3),
            "responseEnd": round(float(response_end[i]), 3),
            "domLoading": round(float(dom_loading[i]), 3),
            "domInteractive": round(float(dom_interactive[i]), 3),
            "domContentLoadedEventStart": round(float(dcl_start[i]), 3),
            "domContentLoadedEventEnd": round(float(dcl_end[i]), 3),
            "domComplete": round(float(dom_complete[i]), 3),
            "loadEventStart": round(float(load_start[i]), 3),
            "loadEventEnd": round(float(load_end[i]), 3),
            "firstMeaningfulPaint": None if fmp_absent[i] else round(float(fmp[i]), 3),
        }

        age_days = float(round(float(ages[i]), 2))
        assignments = []
        if m_target > 0:
            m_i = float(mean_hold[i])
            x_i = float(max_hold[i])
            # extra assignments beyond the minimum keep total/min hold times
            # from being deterministic functions of the calibrated pair
            k = max(2, int(x_i / m_i) + 1) + int(rng.poisson(0.8))
            rest_total = k * m_i - x_i
            weights = rng.uniform(0.05, 1.0, size=k - 1)
            rest = rest_total * weights / weights.sum()
            if rest.size and rest.max() >= x_i:  # keep x_i the longest hold
                rest = np.full(k - 1, rest_total / (k - 1))
            durations = [int(round(x_i))] + [int(round(d)) for d in rest]
            cursor = SYNTH_REFERENCE_DATE - timedelta(days=int(rng.integers(0, 30)))
            for j, dur in enumerate(durations):
                end = cursor
                start = end - timedelta(days=max(dur, 0))
                assignments.append(IpAssignment(
                    ip=f"10.{int(rng.integers(256))}.{int(rng.integers(256))}.{j + 1}",
                    start_date=start, end_date=end,
                ))
                cursor = start - timedelta(days=int(rng.integers(1, 20)))

        history = HistoryRecord(
            domain_birth=SYNTH_REFERENCE_DATE - timedelta(days=int(round(age_days))),
            domain_age_days=age_days,
            park_count=int(park_counts[i]),
            reregistration_count=int(rereg_counts[i]),
            ip_assignments=assignments,
            coowned_site_count=int(coowned[i]),
            coowned_analytics_site_count=int(coowned_analytics[i]),
        )

        crawl = CrawlTelemetry(
            dom_stats=DomSnapshotStats(
                node_count=int(nodes[i]),
                html_class_count=int(classes[i]),
                layout_object_count=int(layout[i]),
                element_counts={tag: int(element_counts[tag][i]) for tag in DOM_TAGS},
            ),
            transactions=transactions,
            cookies=cookies,
            resources=resources,
            timings=TimingProfile(marks=marks),
            js_heap_used_bytes=int(heap_used[i]),
            js_heap_total_bytes=int(heap_total[i]),
            frame_count=int(frame_counts[i]),
            js_event_listener_count=int(listener_counts[i]),
            beacon_pixel_count=int(beacon_counts[i]),
        )

        record = WebsiteRecord(domain=domain, label=label, crawl=crawl, history=history)
        record.validate()
        records.append(record)
    return records


def generate_synthetic(config: SynthConfig) -> list[WebsiteRecord]:
    """Deterministic calibrated dataset: real records first, then fake."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    records = _generate_class(rng, config.n_real, "real", config.medians)
    records += _generate_class(rng, config.n_fake, "fake", config.medians)
    return records
