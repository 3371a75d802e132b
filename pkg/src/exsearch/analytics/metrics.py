"""Per-query effort/success/verbosity metrics and their per-exception aggregates."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from ..logs import SearchRecord, word_count
from ..tagger import TaggedQuery

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsConfig:
    dwell_cap_seconds: float = 600.0
    sat_threshold_seconds: float = 30.0
    min_sessions: int = 20

    def __post_init__(self):
        if not self.dwell_cap_seconds > self.sat_threshold_seconds > 0:
            raise ValueError("need dwell_cap_seconds > sat_threshold_seconds > 0")
        if self.min_sessions < 1:
            raise ValueError("min_sessions must be >= 1")


@dataclass(frozen=True)
class QueryMetrics:
    record_id: str
    total_dwell_seconds: float
    success: int
    word_count: int


def compute_query_metrics(record: SearchRecord, config: MetricsConfig = MetricsConfig()) -> QueryMetrics:
    """Effort is the sum of per-click dwell capped at the limit; success means
    the last click (highest click_order) lasted strictly longer than the SAT threshold."""
    if not record.clicks:
        raise ValueError(f"record {record.record_id} has no clicks")
    cap = config.dwell_cap_seconds
    total = sum(min(c.dwell_seconds, cap) for c in record.clicks)
    last = max(record.clicks, key=lambda c: c.click_order)
    success = int(min(last.dwell_seconds, cap) > config.sat_threshold_seconds)
    return QueryMetrics(record.record_id, float(total), success, word_count(record.raw_query))


@dataclass(frozen=True)
class ExceptionStats:
    canonical_key: str
    kind: str
    language: str | None
    unique_sessions: int
    n_queries: int
    mean_effort_s: float
    success_rate: float
    mean_word_count: float


def _group_key(tq: TaggedQuery, by_language: bool):
    return (tq.tag.canonical_key, tq.tag.kind, tq.language if by_language else None)


def aggregate_exception_stats(
    tagged: Sequence[TaggedQuery],
    metrics: dict[str, QueryMetrics],
    config: MetricsConfig = MetricsConfig(),
    by_language: bool = False,
) -> list[ExceptionStats]:
    """Group tagged queries per exception and keep groups seen in enough distinct sessions.

    Means are per query. Rows are ordered by session count (desc), then key.
    """
    groups: dict[tuple, list[TaggedQuery]] = defaultdict(list)
    for tq in tagged:
        if tq.tag is None:
            continue
        if tq.session_id is None:
            raise ValueError(f"record {tq.record.record_id} lacks a session id")
        groups[_group_key(tq, by_language)].append(tq)
    rows = []
    for (key, kind, lang), members in groups.items():
        sessions = {tq.session_id for tq in members}
        if len(sessions) < config.min_sessions:
            continue
        ms = [metrics[tq.record.record_id] for tq in members]
        n = len(ms)
        rows.append(ExceptionStats(
            key, kind, lang, len(sessions), n,
            sum(m.total_dwell_seconds for m in ms) / n,
            sum(m.success for m in ms) / n,
            sum(m.word_count for m in ms) / n,
        ))
    rows.sort(key=lambda r: (-r.unique_sessions, r.canonical_key, r.kind, r.language or ""))
    return rows


def frequent_queries(tagged: Sequence[TaggedQuery], config: MetricsConfig = MetricsConfig()) -> list[TaggedQuery]:
    """Tagged queries whose exception clears the distinct-session threshold."""
    sessions: dict[tuple, set] = defaultdict(set)
    for tq in tagged:
        if tq.tag is not None:
            sessions[(tq.tag.canonical_key, tq.tag.kind)].add(tq.session_id)
    keep = {k for k, s in sessions.items() if len(s) >= config.min_sessions}
    return [tq for tq in tagged if tq.tag is not None and (tq.tag.canonical_key, tq.tag.kind) in keep]


# group label -> predicate; the comparison groups used for summaries and tests
GROUPS = {
    "all": lambda tq: True,
    "ID": lambda tq: tq.tag.kind == "ID",
    "NAME": lambda tq: tq.tag.kind == "NAME",
    "java": lambda tq: tq.language == "java",
    "csharp": lambda tq: tq.language == "csharp",
    "python": lambda tq: tq.language == "python",
}
TEST_PAIRS = (("ID", "NAME"), ("java", "csharp"), ("java", "python"), ("csharp", "python"))


def group_samples(queries: Sequence[TaggedQuery], metrics: dict[str, QueryMetrics],
                  field: str) -> dict[str, list[float]]:
    out = {}
    for name, pred in GROUPS.items():
        out[name] = [float(getattr(metrics[tq.record.record_id], field)) for tq in queries if pred(tq)]
    return out


# -- domains ----------------------------------------------------------------


def url_domain(url: str) -> str | None:
    try:
        host = urlsplit(url).hostname
    except ValueError:
        return None
    if not host:
        return None
    host = host.lower().rstrip(".")
    if host.startswith("www."):
        host = host[4:]
    return host or None


def domain_popularity(records: Iterable[SearchRecord], diagnostics: list[str] | None = None) -> list[tuple[str, int]]:
    """Click counts per host (``www.`` dropped), most clicked first, ties by name."""
    counts: Counter = Counter()
    for rec in records:
        for c in rec.clicks:
            d = url_domain(c.url)
            if d is None:
                msg = f"{rec.record_id}: unparseable URL {c.url!r}"
                log.debug(msg)
                if diagnostics is not None:
                    diagnostics.append(msg)
                continue
            counts[d] += 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
