"""Orthant-wise limited-memory quasi-Newton minimization.

Minimizes ``f(x) + l1 * ||x||_1`` for smooth ``f``. With ``l1 == 0`` this is
plain L-BFGS with a backtracking Armijo line search.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NonFiniteObjective(FloatingPointError):
    def __init__(self, message: str, iterate: np.ndarray):
        super().__init__(message)
        self.iterate = iterate


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    n_iter: int
    n_evals: int
    reason: str
    trace: list[float] = field(default_factory=list)


def pseudo_gradient(x: np.ndarray, g: np.ndarray, l1: float) -> np.ndarray:
    if l1 == 0:
        return g.copy()
    pg = np.where(x > 0, g + l1, g - l1)
    zero = x == 0
    right, left = g + l1, g - l1
    pg[zero] = np.where(right[zero] < 0, right[zero], np.where(left[zero] > 0, left[zero], 0.0))
    return pg


def _two_loop(v: np.ndarray, history: deque) -> np.ndarray:
    q = v.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * s.dot(q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= s.dot(y) / y.dot(y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * y.dot(q)
        q += (a - b) * s
    return q


def owlqn(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    l1: float = 0.0,
    max_iter: int = 200,
    tol: float = 1e-5,
    m: int = 6,
    c1: float = 1e-4,
    max_backtrack: int = 40,
    callback: Callable[[int, float], None] | None = None,
) -> OptimizeResult:
    """Stops when the pseudo-gradient max-norm drops below ``tol``, after
    ``max_iter`` accepted steps, or when the line search cannot make progress.
    The returned trace holds the full objective at every accepted iterate.
    """
    x = np.array(x0, dtype=float)

    def evaluate(z):
        f, g = fun(z)
        F = f + l1 * np.abs(z).sum()
        if not np.isfinite(F) or not np.all(np.isfinite(g)):
            raise NonFiniteObjective("objective or gradient is not finite", z.copy())
        return f, g, F

    f, g, F = evaluate(x)
    n_evals = 1
    trace = [float(F)]
    history: deque = deque(maxlen=m)
    reason = "max_iterations"
    k = 0
    while k < max_iter:
        pg = pseudo_gradient(x, g, l1)
        if np.abs(pg).max(initial=0.0) < tol:
            reason = "converged"
            break
        d = -_two_loop(pg, history)
        if l1 > 0:
            d[d * pg >= 0] = 0.0
        if not d.any():
            reason = "no_descent_direction"
            break
        orthant = np.sign(x)
        orthant[x == 0] = np.sign(-pg[x == 0])
        step = 1.0 if history else 1.0 / max(np.linalg.norm(pg), 1e-12)
        accepted = False
        for _ in range(max_backtrack):
            x_new = x + step * d
            if l1 > 0:
                x_new[np.sign(x_new) != orthant] = 0.0
            f_new, g_new, F_new = evaluate(x_new)
            n_evals += 1
            if F_new <= F + c1 * pg.dot(x_new - x) and F_new <= F:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            reason = "line_search_failed"
            break
        s, y = x_new - x, g_new - g
        sy = s.dot(y)
        if sy > 1e-12:
            history.append((s, y, 1.0 / sy))
        x, f, g, F = x_new, f_new, g_new, F_new
        k += 1
        trace.append(float(F))
        if callback is not None:
            callback(k, float(F))
    return OptimizeResult(x, float(F), k, n_evals, reason, trace)
