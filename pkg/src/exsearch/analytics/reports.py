"""Report tables (CSV + JSON bundle) for the exception search analyses."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..logs import SearchRecord
from ..tagger import TaggedQuery
from .metrics import (
    GROUPS, TEST_PAIRS, MetricsConfig, QueryMetrics, aggregate_exception_stats,
    compute_query_metrics, domain_popularity, frequent_queries, group_samples,
)
from .stats import welch_t_test

REPORT_FILES = ("popularity", "effort", "success", "wordcount", "domains", "tests")

HEADERS = {
    "popularity": ["scope", "rank", "canonical_key", "kind", "language", "unique_sessions", "n_queries"],
    "effort": ["scope", "group", "n_queries", "mean_total_dwell_s"],
    "success": ["scope", "group", "n_queries", "success_rate"],
    "wordcount": ["scope", "group", "n_queries", "mean_word_count"],
    "domains": ["rank", "domain", "click_count"],
    "tests": ["metric", "group_a", "group_b", "n_a", "n_b", "t", "df", "p_value"],
}

_METRIC_FIELDS = {
    "effort": ("total_dwell_seconds", "mean_effort_s"),
    "success": ("success", "success_rate"),
    "wordcount": ("word_count", "mean_word_count"),
}


@dataclass
class ReportBundle:
    tables: dict[str, list[list]] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def rows(self, name: str) -> list[dict]:
        return [dict(zip(HEADERS[name], r)) for r in self.tables[name]]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def build_reports(tagged: Sequence[TaggedQuery], config: MetricsConfig = MetricsConfig()) -> ReportBundle:
    tagged = [tq for tq in tagged if tq.tag is not None]
    metrics: dict[str, QueryMetrics] = {
        tq.record.record_id: compute_query_metrics(tq.record, config) for tq in tagged
    }
    bundle = ReportBundle()

    overall = aggregate_exception_stats(tagged, metrics, config)
    per_lang = [r for r in aggregate_exception_stats(tagged, metrics, config, by_language=True)
                if r.language is not None]
    pop = []
    for scope, rows in (("overall", overall), ("language", per_lang)):
        for i, r in enumerate(rows, 1):
            pop.append([scope, i, r.canonical_key, r.kind, r.language, r.unique_sessions, r.n_queries])
    bundle.tables["popularity"] = pop

    kept = frequent_queries(tagged, config)
    for name, (qfield, sfield) in _METRIC_FIELDS.items():
        table = []
        samples = group_samples(kept, metrics, qfield)
        for group in GROUPS:
            xs = samples[group]
            table.append(["group", group, len(xs), sum(xs) / len(xs) if xs else None])
        for r in overall:
            table.append(["exception", f"{r.kind}:{r.canonical_key}", r.n_queries, getattr(r, sfield)])
        bundle.tables[name] = table

    tests = []
    for name, (qfield, _) in _METRIC_FIELDS.items():
        samples = group_samples(kept, metrics, qfield)
        for a, b in TEST_PAIRS:
            if len(samples[a]) < 2 or len(samples[b]) < 2:
                continue
            res = welch_t_test(samples[a], samples[b], (a, b))
            tests.append([name, a, b, res.n_a, res.n_b, res.t, res.df, res.p_value])
    bundle.tables["tests"] = tests

    domains = domain_popularity((tq.record for tq in tagged), bundle.diagnostics)
    bundle.tables["domains"] = [[i, d, n] for i, (d, n) in enumerate(domains, 1)]
    return bundle


def write_reports(bundle: ReportBundle, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in REPORT_FILES:
        p = outdir / f"{name}.csv"
        with open(p, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADERS[name])
            for row in bundle.tables.get(name, []):
                w.writerow([_fmt(v) for v in row])
        paths.append(p)
    return paths


def read_reports(outdir: str | Path) -> dict[str, list[dict]]:
    out = {}
    for name in REPORT_FILES:
        with open(Path(outdir) / f"{name}.csv", encoding="utf-8", newline="") as fh:
            out[name] = list(csv.DictReader(fh))
    return out


def write_bundle(outdir: str | Path, path: str | Path) -> Path:
    """Mirror all CSV tables into one JSON document."""
    tables = read_reports(outdir)
    Path(path).write_text(json.dumps(tables, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)
