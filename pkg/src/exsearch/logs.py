"""Search-log records: ingestion, filtering, sessionization and tokenization."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

SESSION_GAP_SECONDS = 1800


@dataclass(frozen=True, slots=True)
class ClickEvent:
    url: str
    click_order: int
    dwell_seconds: float


@dataclass(frozen=True, slots=True)
class SearchRecord:
    record_id: str
    client_id: str
    timestamp: int
    raw_query: str
    locale: str
    region: str
    result_urls: tuple[str, ...] = ()
    clicks: tuple[ClickEvent, ...] = ()

    def clicked_urls(self) -> list[str]:
        return [c.url for c in sorted(self.clicks, key=lambda c: c.click_order)]

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "client_id": self.client_id,
            "timestamp": self.timestamp,
            "raw_query": self.raw_query,
            "locale": self.locale,
            "region": self.region,
            "result_urls": list(self.result_urls),
            "clicks": [
                {"url": c.url, "click_order": c.click_order, "dwell_seconds": c.dwell_seconds}
                for c in self.clicks
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchRecord":
        """Build a record from a decoded JSON object; raises ValueError on schema problems."""
        try:
            clicks = tuple(
                ClickEvent(str(c["url"]), int(c["click_order"]), c["dwell_seconds"])
                for c in obj.get("clicks") or ()
            )
            rec = cls(
                record_id=str(obj["record_id"]),
                client_id=str(obj["client_id"]),
                timestamp=int(obj["timestamp"]),
                raw_query=obj["raw_query"],
                locale=str(obj["locale"]),
                region=str(obj["region"]),
                result_urls=tuple(obj.get("result_urls") or ()),
                clicks=clicks,
            )
        except KeyError as exc:
            raise ValueError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, AttributeError) as exc:
            raise ValueError(f"bad field type: {exc}") from None
        if not isinstance(rec.raw_query, str):
            raise ValueError("raw_query must be a string")
        if rec.timestamp < 0:
            raise ValueError("negative timestamp")
        orders = sorted(c.click_order for c in clicks)
        if orders != list(range(1, len(clicks) + 1)):
            raise ValueError("click_order values must be 1..n without gaps")
        if any(not isinstance(c.dwell_seconds, (int, float)) or c.dwell_seconds < 0 for c in clicks):
            raise ValueError("dwell_seconds must be a non-negative number")
        return rec


@dataclass
class IngestResult:
    records: list[SearchRecord]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.diagnostics)


TSV_COLUMNS = (
    "record_id", "client_id", "timestamp", "raw_query",
    "locale", "region", "result_urls", "clicks",
)


def _parse_tsv_line(line: str) -> dict:
    cols = line.split("\t")
    if len(cols) != len(TSV_COLUMNS):
        raise ValueError(f"expected {len(TSV_COLUMNS)} columns, got {len(cols)}")
    obj = dict(zip(TSV_COLUMNS, cols))
    obj["result_urls"] = json.loads(obj["result_urls"])
    obj["clicks"] = json.loads(obj["clicks"])
    return obj


def ingest(path: str | Path, format: str = "jsonl") -> IngestResult:
    """Read search records from a JSONL or TSV file.

    Malformed lines are skipped; each one leaves a ``"<line>: <reason>"``
    entry in ``diagnostics``. A TSV header line starting with ``record_id``
    is tolerated. I/O errors propagate.
    """
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown format {format!r}")
    records: list[SearchRecord] = []
    diagnostics: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if format == "tsv" and lineno == 1 and line.startswith("record_id\t"):
                continue
            try:
                obj = json.loads(line) if format == "jsonl" else _parse_tsv_line(line)
                if not isinstance(obj, dict):
                    raise ValueError("not a JSON object")
                rec = SearchRecord.from_dict(obj)
                if rec.record_id in seen:
                    raise ValueError(f"duplicate record_id {rec.record_id!r}")
            except ValueError as exc:
                diagnostics.append(f"{lineno}: {exc}")
                continue
            seen.add(rec.record_id)
            records.append(rec)
    if diagnostics:
        log.warning("%s: skipped %d malformed line(s)", path, len(diagnostics))
    return IngestResult(records, diagnostics)


def dumps_record(rec: SearchRecord, format: str = "jsonl") -> str:
    obj = rec.to_dict()
    if format == "jsonl":
        return json.dumps(obj, ensure_ascii=False)
    cols = [
        str(obj[c]) if c not in ("result_urls", "clicks") else json.dumps(obj[c], ensure_ascii=False)
        for c in TSV_COLUMNS
    ]
    return "\t".join(cols)


def write_records(records: Iterable[SearchRecord], path: str | Path, format: str = "jsonl") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec, format))
            fh.write("\n")


# -- sessions ---------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    session_id: str
    client_id: str
    records: tuple[SearchRecord, ...]


def segment_sessions(records: Sequence[SearchRecord], gap: int = SESSION_GAP_SECONDS) -> list[Session]:
    """Group records per client and split on inactivity strictly longer than ``gap``.

    Session ids are ``<client_id>#<n>`` with ``n`` counting from 0 per client;
    output is ordered by client id then time.
    """
    by_client = sorted(records, key=lambda r: (r.client_id, r.timestamp))  # stable
    sessions: list[Session] = []
    for client, group in groupby(by_client, key=lambda r: r.client_id):
        current: list[SearchRecord] = []
        n = 0
        for rec in group:
            if current and rec.timestamp - current[-1].timestamp > gap:
                sessions.append(Session(f"{client}#{n}", client, tuple(current)))
                n += 1
                current = []
            current.append(rec)
        sessions.append(Session(f"{client}#{n}", client, tuple(current)))
    return sessions


def session_index(sessions: Iterable[Session]) -> dict[str, str]:
    """Map record_id -> session_id."""
    return {rec.record_id: s.session_id for s in sessions for rec in s.records}


# -- filtering --------------------------------------------------------------


@dataclass(frozen=True)
class FilterConfig:
    allowed_locales: frozenset[str] = frozenset({"en-*"})
    allowed_regions: frozenset[str] = frozenset({"US"})
    trigger_keywords: frozenset[str] = frozenset({"error", "errno", "exception"})
    require_click: bool = True
    reject_non_ascii: bool = True

    def __post_init__(self):
        if not self.trigger_keywords:
            raise ValueError("trigger_keywords must be non-empty")
        object.__setattr__(self, "allowed_locales", frozenset(self.allowed_locales))
        object.__setattr__(self, "allowed_regions", frozenset(self.allowed_regions))
        object.__setattr__(
            self, "trigger_keywords", frozenset(k.lower() for k in self.trigger_keywords)
        )


def _locale_allowed(locale: str, allowed: frozenset[str]) -> bool:
    loc = locale.lower()
    for pat in allowed:
        pat = pat.lower()
        if pat.endswith("-*"):
            if loc == pat[:-2] or loc.startswith(pat[:-1]):
                return True
        elif loc == pat:
            return True
    return False


def keep_record(rec: SearchRecord, config: FilterConfig) -> bool:
    if not _locale_allowed(rec.locale, config.allowed_locales):
        return False
    if rec.region.upper() not in {r.upper() for r in config.allowed_regions}:
        return False
    if config.require_click and not rec.clicks:
        return False
    if config.reject_non_ascii and not rec.raw_query.isascii():
        return False
    haystacks = [rec.raw_query.lower()] + [c.url.lower() for c in rec.clicks]
    return any(k in h for h in haystacks for k in config.trigger_keywords)


def filter_records(records: Iterable[SearchRecord], config: FilterConfig | None = None) -> list[SearchRecord]:
    config = config or FilterConfig()
    return [r for r in records if keep_record(r, config)]


# -- tokenization -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    start: int
    end: int


_SPACE_RUN = re.compile(r"[^ ]+")
_WS_RUN = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return not (ch.isalnum() or ch == "_")


def tokenize(text: str, mode: str = "feature") -> list[Token]:
    """Split a query into tokens carrying character offsets.

    ``metric`` mode splits on runs of the space character only. ``feature``
    mode splits on any whitespace and then peels punctuation characters off
    both ends of each chunk, one token per character; punctuation inside a
    chunk (``java.lang.X``, ``a:b``) is kept.
    """
    if mode == "metric":
        return [Token(m.group(), m.start(), m.end()) for m in _SPACE_RUN.finditer(text)]
    if mode != "feature":
        raise ValueError(f"unknown tokenize mode {mode!r}")
    out: list[Token] = []
    for m in _WS_RUN.finditer(text):
        chunk, base = m.group(), m.start()
        i, j = 0, len(chunk)
        while i < j and _is_punct(chunk[i]):
            i += 1
        while j > i and _is_punct(chunk[j - 1]):
            j -= 1
        out.extend(Token(chunk[k], base + k, base + k + 1) for k in range(i))
        if i < j:
            out.append(Token(chunk[i:j], base + i, base + j))
        out.extend(Token(chunk[k], base + k, base + k + 1) for k in range(j, len(chunk)))
    return out


def word_count(text: str) -> int:
    return len(tokenize(text, "metric"))

