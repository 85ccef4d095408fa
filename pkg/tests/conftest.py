"""Shared fixtures. The seed-7 calibrated dataset and its derived artifacts
are expensive (~15s), so they are built once per session and shared by the
selection, model and acceptance tests."""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date

import numpy as np
import pytest

from newsfilter import preprocess
from newsfilter.features import FeatureMatrix, extract_matrix
from newsfilter.models import TrainTestSplit, labels_to_int, split_dataset
from newsfilter.select import SelectionResult, sweep_k
from newsfilter.synth import SynthConfig, generate_synthetic
from newsfilter.telemetry import (
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

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "data")
SAMPLE_RECORDS = os.path.join(FIXTURE_DIR, "sample_records.jsonl")


def minimal_record(domain="site.example.com", **overrides) -> WebsiteRecord:
    """Small valid record for structural tests."""
    return WebsiteRecord(
        domain=domain,
        label=overrides.get("label", "real"),
        crawl=CrawlTelemetry(
            dom_stats=DomSnapshotStats(100, 10, 80, {"div": 20, "p": 5}),
            transactions=[HttpTransaction("https://site.example.com/", 200)],
            cookies=[CookieEntry("sid", "site.example.com", True)],
            resources=[ResourceEntry("image", 1000)],
            timings=TimingProfile({"connectStart": 5.0, "connectEnd": 9.0}),
            js_heap_used_bytes=1000,
            js_heap_total_bytes=2000,
        ),
        history=HistoryRecord(
            domain_birth=date(2010, 5, 1),
            domain_age_days=4000.0,
            ip_assignments=[IpAssignment("10.0.0.1", date(2019, 1, 1), date(2021, 1, 1))],
        ),
    )


@dataclass
class Seed7Artifacts:
    records: list
    matrix: FeatureMatrix
    data: np.ndarray            # raw, NaN for absent
    transformed: np.ndarray     # imputed + z-scored with train-fit parameters
    labels: list
    y: np.ndarray
    names: list
    split: TrainTestSplit
    fitted: preprocess.FittedPreprocessor
    selection: SelectionResult


@pytest.fixture(scope="session")
def seed7() -> Seed7Artifacts:
    records = generate_synthetic(SynthConfig(n_real=1183, n_fake=637, seed=7))
    matrix = extract_matrix(records)
    data, labels = matrix.to_arrays()
    y = labels_to_int(labels)
    names = list(matrix.catalog.names)
    split = split_dataset(len(labels), labels, seed=7)
    fitted = preprocess.fit_arrays(data[split.train], names)
    transformed = fitted.transform_array(data)
    selection = sweep_k(
        transformed[split.train], y[split.train],
        transformed[split.validation], y[split.validation],
        names=names,
    )
    return Seed7Artifacts(
        records=records, matrix=matrix, data=data, transformed=transformed,
        labels=labels, y=y, names=names, split=split, fitted=fitted,
        selection=selection,
    )


@pytest.fixture(scope="session")
def small_dataset():
    """Fast calibrated dataset for structural tests."""
    return generate_synthetic(SynthConfig(n_real=60, n_fake=40, seed=5))


@pytest.fixture
def sample_records_path() -> str:
    return SAMPLE_RECORDS
