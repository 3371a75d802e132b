"""Welch's t-test and Cohen's kappa."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

from scipy.special import betainc


@dataclass(frozen=True)
class StatTestResult:
    group_a: str
    group_b: str
    t: float
    df: float
    p_value: float
    n_a: int = 0
    n_b: int = 0


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    m = math.fsum(xs) / n
    v = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return m, v


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return float(min(1.0, max(0.0, betainc(df / 2.0, 0.5, x))))


def welch_t_test(a: Sequence[float], b: Sequence[float], names: tuple[str, str] = ("a", "b")) -> StatTestResult:
    """Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of freedom.

    When both samples have zero variance, p is 1 for equal means and 0 otherwise.
    """
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 observations")
    ma, va = _mean_var(a)
    mb, vb = _mean_var(b)
    na, nb = len(a), len(b)
    qa, qb = va / na, vb / nb
    se2 = qa + qb
    if se2 == 0:
        if ma == mb:
            return StatTestResult(names[0], names[1], 0.0, float(na + nb - 2), 1.0, na, nb)
        t = math.copysign(math.inf, ma - mb)
        return StatTestResult(names[0], names[1], t, float(na + nb - 2), 0.0, na, nb)
    t = (ma - mb) / math.sqrt(se2)
    # share form avoids underflow of squared tiny variances
    fa, fb = qa / se2, qb / se2
    df = 1.0 / (fa * fa / (na - 1) + fb * fb / (nb - 1))
    return StatTestResult(names[0], names[1], t, df, student_t_two_sided(t, df), na, nb)


@dataclass(frozen=True)
class KappaResult:
    observed: float
    expected: float
    kappa: float


def cohens_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> KappaResult:
    if len(labels_a) != len(labels_b):
        raise ValueError("annotation lists differ in length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("need at least one annotated item")
    po = sum(x == y for x, y in zip(labels_a, labels_b)) / n
    ca, cb = Counter(labels_a), Counter(labels_b)
    pe = sum(ca[k] * cb[k] for k in ca.keys() | cb.keys()) / (n * n)
    if pe == 1.0:
        return KappaResult(po, pe, 1.0 if po == 1.0 else 0.0)
    return KappaResult(po, pe, (po - pe) / (1 - pe))


def kappa_from_table(a: int, b: int, c: int, d: int) -> KappaResult:
    """Kappa from a 2x2 agreement table (a: yes/yes, b: yes/no, c: no/yes, d: no/no)."""
    ra = ["y"] * (a + b) + ["n"] * (c + d)
    rb = ["y"] * a + ["n"] * b + ["y"] * c + ["n"] * d
    return cohens_kappa(ra, rb)
