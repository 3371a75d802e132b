"""Tag search records with their root exception and a programming language."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .crf.entities import decode_entities
from .crf.model import CrfModel
from .gazetteer import PlGazetteer, normalize_exception, qualified_key
from .logs import SearchRecord, tokenize

# "javascript" must not count as a java hit; c# also appears URL-encoded in links.
_PL_KEYWORDS = re.compile(r"java(?!script)|c#|c%23|python", re.IGNORECASE)
_KEYWORD_LANG = {"java": "java", "c#": "csharp", "c%23": "csharp", "python": "python"}


@dataclass(frozen=True)
class ExceptionTag:
    kind: str
    surface: str
    canonical_key: str
    token_start: int
    token_end: int


@dataclass(frozen=True)
class TaggedQuery:
    record: SearchRecord
    tag: ExceptionTag | None = None
    language: str | None = None
    session_id: str | None = None

    def to_dict(self) -> dict:
        t = self.tag
        return {
            "record_id": self.record.record_id,
            "session_id": self.session_id,
            "kind": t.kind if t else None,
            "surface": t.surface if t else None,
            "canonical_key": t.canonical_key if t else None,
            "language": self.language,
        }


class Tagger:
    """Wraps a model with a memo keyed on query text; repeated queries are common in logs."""

    def __init__(self, model: CrfModel, cache_size: int = 200_000):
        self.model = model
        self.cache_size = cache_size
        self._cache: dict[str, ExceptionTag | None] = {}

    def extract(self, text: str) -> ExceptionTag | None:
        try:
            return self._cache[text]
        except KeyError:
            pass
        tag = _extract(self.model, text)
        if len(self._cache) < self.cache_size:
            self._cache[text] = tag
        return tag

    def __call__(self, record: SearchRecord, session_id: str | None = None) -> TaggedQuery:
        return TaggedQuery(record, self.extract(record.raw_query), None, session_id)


def _extract(model: CrfModel, text: str) -> ExceptionTag | None:
    toks = tokenize(text, "feature")
    if not toks:
        return None
    words = [t.text for t in toks]
    tags = model.predict_tokens(words)
    ents = decode_entities(words, tags, text, [(t.start, t.end) for t in toks])
    for ent in ents:  # leftmost first
        try:
            key = normalize_exception(ent.surface, ent.kind)
        except ValueError:
            continue
        return ExceptionTag(ent.kind, ent.surface, key, ent.start, ent.end)
    return None


def tag_query(model: CrfModel, record: SearchRecord, session_id: str | None = None) -> TaggedQuery:
    return TaggedQuery(record, _extract(model, record.raw_query), None, session_id)


def keyword_language(record: SearchRecord) -> str | None:
    for text in [record.raw_query, *record.clicked_urls()]:
        m = _PL_KEYWORDS.search(text)
        if m:
            return _KEYWORD_LANG[m.group().lower()]
    return None


def categorize_pl(tagged: TaggedQuery, gazetteers: Sequence[PlGazetteer]) -> str | None:
    """Keyword hit in the query or clicked URLs first, then gazetteer lookup for NAME tags.

    The gazetteer step matches a fully qualified surface (``System.IO.X``)
    before falling back to the short key in java, csharp, python order.
    """
    lang = keyword_language(tagged.record)
    if lang is not None:
        return lang
    tag = tagged.tag
    if tag is None or tag.kind != "NAME":
        return None
    full = qualified_key(tag.surface)
    if "." in full:
        for gaz in gazetteers:
            if full in gaz.qualified_names:
                return gaz.language
    for gaz in gazetteers:
        if tag.canonical_key in gaz:
            return gaz.language
    return None


def tag_records(model: CrfModel, records: Iterable[SearchRecord], sessions: dict[str, str],
                gazetteers: Sequence[PlGazetteer], tagger: Tagger | None = None) -> list[TaggedQuery]:
    """Tag and categorize records, returning only those carrying an exception."""
    tagger = tagger or Tagger(model)
    out = []
    for rec in records:
        tq = tagger(rec, sessions.get(rec.record_id))
        if tq.tag is None:
            continue
        out.append(TaggedQuery(rec, tq.tag, categorize_pl(tq, gazetteers), tq.session_id))
    return out


def write_tagged(tagged: Iterable[TaggedQuery], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tq in tagged:
            fh.write(json.dumps(tq.to_dict(), ensure_ascii=False) + "\n")


def read_tagged(path: str | Path, records: dict[str, SearchRecord]) -> list[TaggedQuery]:
    """Rejoin tagged output with its records (by record_id)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            rec = records[obj["record_id"]]
            tag = None
            if obj.get("kind"):
                tag = ExceptionTag(obj["kind"], obj["surface"], obj["canonical_key"], -1, -1)
            out.append(TaggedQuery(rec, tag, obj.get("language"), obj.get("session_id")))
    return out
