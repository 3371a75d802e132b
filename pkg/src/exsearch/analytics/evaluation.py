"""Exact-match entity evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

CLASSES = ("ID", "NAME")


@dataclass(frozen=True)
class ClassScores:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def macro_average(rows: Sequence[ClassScores], label: str = "macro") -> ClassScores:
    k = len(rows)
    return ClassScores(
        label,
        sum(r.precision for r in rows) / k,
        sum(r.recall for r in rows) / k,
        sum(r.f1 for r in rows) / k,
        sum(r.support for r in rows),
    )


def evaluate_ner(gold: Iterable[tuple], predicted: Iterable[tuple],
                 classes: Sequence[str] = CLASSES) -> dict[str, ClassScores]:
    """Entities are ``(record_id, class, span)`` triples; a hit needs class and span equal.

    Returns one row per class plus ``"macro"``, the unweighted mean over classes.
    """
    gold, predicted = set(gold), set(predicted)
    out = {}
    for c in classes:
        g = {e for e in gold if e[1] == c}
        p = {e for e in predicted if e[1] == c}
        out[c] = ClassScores(c, *_prf(len(g & p), len(p), len(g)), len(g))
    out["macro"] = macro_average([out[c] for c in classes])
    return out


def entities_from_corpus(sequences, tags_of=None) -> set[tuple]:
    """Collect ``(record_id, class, (start, end))`` triples from BIO-tagged sequences.

    ``tags_of(seq)`` supplies the tag list to decode (defaults to ``seq.tags``).
    """
    from ..crf.entities import decode_entities

    out = set()
    for i, seq in enumerate(sequences):
        tags = seq.tags if tags_of is None else tags_of(seq)
        rid = seq.record_id or f"#{i}"
        for e in decode_entities(seq.tokens, tags):
            out.add((rid, e.kind, (e.start, e.end)))
    return out
