"""Exact inference for a first-order linear chain.

All routines take a per-position label score matrix ``emissions`` (T x L,
or B x T x L for the batched forward-backward) and a transition matrix
``transitions`` (L x L, ``[prev, cur]``). Recursions run in log space, which
keeps long sequences with large weights finite.
"""

from __future__ import annotations

import numpy as np


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    return np.squeeze(m, axis) + np.log(np.exp(a - m).sum(axis=axis))


def forward_backward(emissions: np.ndarray, transitions: np.ndarray):
    """Return ``(logZ, node_marginals, edge_marginals)``.

    Works on a single sequence (T x L) or a batch of equal-length sequences
    (B x T x L); outputs gain the leading batch axis accordingly.
    """
    E = np.asarray(emissions, dtype=float)
    single = E.ndim == 2
    if single:
        E = E[None]
    B, T, L = E.shape
    if T == 0:
        raise ValueError("sequence length must be >= 1")
    A = transitions[None, :, :]
    alpha = np.empty((B, T, L))
    beta = np.zeros((B, T, L))
    alpha[:, 0] = E[:, 0]
    for t in range(1, T):
        alpha[:, t] = _lse(alpha[:, t - 1, :, None] + A, axis=1) + E[:, t]
    for t in range(T - 2, -1, -1):
        beta[:, t] = _lse(A + (E[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
    logz = _lse(alpha[:, -1], axis=1)
    node = np.exp(alpha + beta - logz[:, None, None])
    edge = np.exp(
        alpha[:, :-1, :, None]
        + A[:, None]
        + (E[:, 1:] + beta[:, 1:])[:, :, None, :]
        - logz[:, None, None, None]
    )
    if single:
        return float(logz[0]), node[0], edge[0]
    return logz, node, edge


def path_score(emissions: np.ndarray, transitions: np.ndarray, path) -> float:
    path = np.asarray(path, dtype=int)
    s = emissions[np.arange(len(path)), path].sum()
    if len(path) > 1:
        s += transitions[path[:-1], path[1:]].sum()
    return float(s)


def viterbi(emissions: np.ndarray, transitions: np.ndarray) -> tuple[list[int], float]:
    """Highest-scoring label path; ties resolve to the lower label index."""
    E = np.asarray(emissions, dtype=float)
    T, L = E.shape
    if T == 0:
        raise ValueError("sequence length must be >= 1")
    delta = E[0].copy()
    back = np.empty((T, L), dtype=np.intp)
    for t in range(1, T):
        cand = delta[:, None] + transitions
        back[t] = cand.argmax(axis=0)  # first max wins
        delta = cand[back[t], np.arange(L)] + E[t]
    best = int(delta.argmax())
    score = float(delta[best])
    path = [best]
    for t in range(T - 1, 0, -1):
        best = int(back[t, best])
        path.append(best)
    path.reverse()
    return path, score
