import pytest

from exsearch.analytics import ClassScores, evaluate_ner, macro_average
from exsearch.analytics.evaluation import entities_from_corpus
from exsearch.weak_labels import LabeledSequence

# published per-class rows of the CRF evaluation table: (P, R, F1, support)
PUBLISHED_ID = (0.89, 0.69, 0.78, 169)
PUBLISHED_NAME = (0.78, 0.97, 0.86, 61)
PUBLISHED_AVG = (0.83, 0.83, 0.82)


def published_macro():
    return macro_average([ClassScores("ID", *PUBLISHED_ID), ClassScores("NAME", *PUBLISHED_NAME)])


def test_published_macro_row():
    m = published_macro()
    # printed values carry two decimals; compare at that precision
    assert round(m.f1, 2) == PUBLISHED_AVG[2]
    assert round(abs(m.precision - PUBLISHED_AVG[0]), 12) <= 0.005
    assert round(abs(m.recall - PUBLISHED_AVG[1]), 12) <= 0.005


def test_hand_case():
    gold = {("r1", "ID", (0, 1)), ("r2", "ID", (2, 3))}
    pred = {("r1", "ID", (0, 1)), ("r3", "NAME", (0, 2))}
    s = evaluate_ner(gold, pred)
    assert (s["ID"].precision, s["ID"].recall) == (1.0, 0.5)
    assert s["ID"].f1 == pytest.approx(2 / 3)
    assert (s["NAME"].precision, s["NAME"].recall, s["NAME"].f1) == (0.0, 0.0, 0.0)
    assert s["macro"].f1 == pytest.approx(1 / 3)


def test_span_and_class_must_match():
    gold = {("r", "ID", (0, 1))}
    assert evaluate_ner(gold, {("r", "ID", (0, 2))})["ID"].f1 == 0.0
    assert evaluate_ner(gold, {("r", "NAME", (0, 1))})["ID"].f1 == 0.0
    assert evaluate_ner(gold, gold)["ID"].f1 == 1.0


def test_entities_from_corpus():
    seqs = [LabeledSequence("a", ("0x1", "x"), ("B-EXID", "O")),
            LabeledSequence("", ("Foo", "Error"), ("B-EXNAME", "I-EXNAME"))]
    assert entities_from_corpus(seqs) == {("a", "ID", (0, 1)), ("#1", "NAME", (0, 2))}
