"""Regex-based weak labeling of exception queries and BIO corpus construction.

The six rules below follow the hand-crafted expressions used to bootstrap
training data. A few repairs were needed so each rule matches its own
sample query:

* rules 1-3 are matched case-insensitively (``TypeNotPresentException``
  only ends in ``exception`` under case folding);
* rule 5 accepts a run of capitals before the digits (``LNK1189``, not
  ``K1189``) and its trailing ``;`` is optional;
* rule 6 reads ``[3|4|5]`` as ``[345]`` and is anchored on word
  boundaries so ``2016`` or ``14045`` do not fire.

Rule 1 keeps ``"error "`` (with the trailing space) and rule 2 keeps
``" errorcode"`` (with the leading space) as written.
"""

from __future__ import annotations

import json
import logging
import random
import re
from importlib import resources
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .logs import SearchRecord, tokenize

log = logging.getLogger(__name__)

ID = "ID"
NAME = "NAME"


@dataclass(frozen=True)
class LabelRule:
    rule_id: int
    pattern: str
    exception_class: str
    sample: str
    flags: int = 0

    def __post_init__(self):
        object.__setattr__(self, "_rx", re.compile(self.pattern, self.flags))

    @property
    def regex(self) -> re.Pattern:
        return self._rx  # type: ignore[attr-defined]


_R1_KEYS = r"(error |errno|err|refused|errorcode|error code|hresult|exit|response|check code|scope|state)"
_R2_KEYS = r"(error|errno|err|refused| errorcode|error code|hresult|exit|response|check code|scope|state)"

DEFAULT_RULES: tuple[LabelRule, ...] = (
    LabelRule(1, _R1_KEYS + r".*(\d+)", ID, "error 2006 (hy000) at line 462", re.IGNORECASE),
    LabelRule(2, r"(\d+).*" + _R2_KEYS, ID, "ssrs 2016 error: an attempt has been...", re.IGNORECASE),
    LabelRule(
        3,
        r"(?:^|[, ])([A-Za-z]{1}[A-Za-z.]+(error|exception|iteration))",
        NAME,
        "java.lang.TypeNotPresentException: Type javax.xml.bind.JAXBContext not present",
        re.IGNORECASE,
    ),
    LabelRule(4, r"0[xX][0-9a-fA-F]+", ID, "0x800A03EC saveas"),
    LabelRule(5, r"([A-Z]+[0-9]+);?", ID, "LNK1189 65535"),
    LabelRule(6, r"\b[345][0-9][0-9]\b", ID, "404 GET /nbextensions/widgets/notebook/js/extension.js"),
)

RULE_ORDER = (3, 4, 5, 1, 2, 6)

_DIGITS = re.compile(r"\d+")


@dataclass(frozen=True)
class WeakLabel:
    record_id: str
    exception_class: str
    start: int
    end: int
    surface: str
    rule_id: int

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "exception_class": self.exception_class,
            "start": self.start,
            "end": self.end,
            "surface": self.surface,
            "rule_id": self.rule_id,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "WeakLabel":
        return cls(
            obj["record_id"], obj["exception_class"], int(obj["start"]),
            int(obj["end"]), obj["surface"], int(obj["rule_id"]),
        )


def _span(rule: LabelRule, m: re.Match, text: str) -> tuple[int, int] | None:
    if rule.rule_id == 1:
        d = _DIGITS.search(text, m.end(1))
        return d.span() if d else None
    if rule.rule_id in (2, 3, 5):
        return m.span(1)
    return m.span()


def apply_rules(
    raw_query: str,
    record_id: str = "",
    rules: Sequence[LabelRule] = DEFAULT_RULES,
    order: Sequence[int] = RULE_ORDER,
) -> WeakLabel | None:
    by_id = {r.rule_id: r for r in rules}
    for rid in order:
        rule = by_id.get(rid)
        if rule is None:
            continue
        m = rule.regex.search(raw_query)
        if m is None:
            continue
        span = _span(rule, m, raw_query)
        if span is None:
            continue
        s, e = span
        return WeakLabel(record_id, rule.exception_class, s, e, raw_query[s:e], rid)
    return None


def load_rules(path: str | Path) -> tuple[LabelRule, ...]:
    """Load a rule override file: JSON list of {rule_id, pattern, class, sample?, ignore_case?}."""
    items = json.loads(Path(path).read_text(encoding="utf-8"))
    defaults = {r.rule_id: r for r in DEFAULT_RULES}
    rules = []
    for it in items:
        rid = int(it["rule_id"])
        base = defaults.get(rid)
        cls = it.get("class", base.exception_class if base else ID)
        if cls not in (ID, NAME):
            raise ValueError(f"rule {rid}: class must be ID or NAME")
        ignore_case = it.get("ignore_case", bool(base.flags & re.IGNORECASE) if base else False)
        rules.append(
            LabelRule(rid, it["pattern"], cls, it.get("sample", base.sample if base else ""),
                      re.IGNORECASE if ignore_case else 0)
        )
    return tuple(rules)


# -- noise review -----------------------------------------------------------


def normalize_key(surface: str) -> str:
    return surface.lower()


@dataclass(frozen=True)
class ExceptionGroup:
    canonical_key: str
    query_count: int


def group_exceptions(labels: Iterable[WeakLabel]) -> list[ExceptionGroup]:
    counts = Counter(normalize_key(lb.surface) for lb in labels)
    return [ExceptionGroup(k, n) for k, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


@dataclass(frozen=True)
class Denylist:
    rejected_keys: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rejected_keys", frozenset(normalize_key(k) for k in self.rejected_keys))

    @classmethod
    def load(cls, path: str | Path) -> "Denylist":
        return cls(frozenset(read_key_file(path)))


def default_denylist_path() -> Path:
    return Path(str(resources.files("exsearch") / "data" / "denylist.txt"))


def read_key_file(path: str | Path) -> list[str]:
    """One entry per line; blank lines and ``#`` comments ignored."""
    keys = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            keys.append(line)
    return keys


def apply_denylist(labels: Iterable[WeakLabel], denylist: Denylist) -> list[WeakLabel]:
    return [lb for lb in labels if normalize_key(lb.surface) not in denylist.rejected_keys]


# -- corpus -----------------------------------------------------------------

OUTSIDE = "O"
BIO_SUFFIX = {ID: "EXID", NAME: "EXNAME"}


@dataclass(frozen=True)
class LabeledSequence:
    record_id: str
    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens), "tags": list(self.tags), "record_id": self.record_id}

    @classmethod
    def from_dict(cls, obj: dict) -> "LabeledSequence":
        if len(obj["tokens"]) != len(obj["tags"]):
            raise ValueError(f"record {obj.get('record_id')}: tokens/tags length mismatch")
        return cls(str(obj.get("record_id", "")), tuple(obj["tokens"]), tuple(obj["tags"]))


def bio_tags(text: str, label: WeakLabel | None) -> LabeledSequence:
    toks = tokenize(text, "feature")
    tags = []
    inside = False
    for t in toks:
        if label is not None and t.start < label.end and t.end > label.start:
            suffix = BIO_SUFFIX[label.exception_class]
            tags.append(("I-" if inside else "B-") + suffix)
            inside = True
        else:
            tags.append(OUTSIDE)
    return LabeledSequence(label.record_id if label else "", tuple(t.text for t in toks), tuple(tags))


class EmptyCorpusError(ValueError):
    pass


def build_training_corpus(
    records: Sequence[SearchRecord],
    labels: Sequence[WeakLabel],
    negatives_ratio: float = 1.0,
    seed: int = 0,
) -> list[LabeledSequence]:
    """Pair weakly labeled queries with sampled unlabeled ones at the given ratio.

    Negatives are drawn uniformly without replacement from records carrying
    no label. The output is shuffled with the same seed.
    """
    by_id = {r.record_id: r for r in records}
    positives = []
    for lb in labels:
        rec = by_id.get(lb.record_id)
        if rec is None:
            raise KeyError(f"label references unknown record {lb.record_id!r}")
        seq = bio_tags(rec.raw_query, lb)
        if seq.tokens:
            positives.append(seq)
    if not positives:
        raise EmptyCorpusError("empty corpus")
    labeled = {lb.record_id for lb in labels}
    pool = [r for r in records if r.record_id not in labeled and tokenize(r.raw_query, "feature")]
    rng = random.Random(seed)
    want = round(negatives_ratio * len(positives))
    if want > len(pool):
        log.warning("only %d negatives available, %d requested", len(pool), want)
        want = len(pool)
    negatives = [
        LabeledSequence(r.record_id, *_all_outside(r.raw_query)) for r in rng.sample(pool, want)
    ]
    corpus = positives + negatives
    rng.shuffle(corpus)
    return corpus


def _all_outside(text: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    toks = tuple(t.text for t in tokenize(text, "feature"))
    return toks, (OUTSIDE,) * len(toks)


def write_corpus(corpus: Iterable[LabeledSequence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seq in corpus:
            fh.write(json.dumps(seq.to_dict(), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[LabeledSequence]:
    with open(path, encoding="utf-8") as fh:
        return [LabeledSequence.from_dict(json.loads(line)) for line in fh if line.strip()]
