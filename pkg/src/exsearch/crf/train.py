"""Maximum-likelihood training with elastic-net regularization."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .features import FeatureConfig, TokenSequence, extract_features
from .inference import forward_backward
from .model import DEFAULT_LABELS, CrfModel, LabelSet
from .optimize import owlqn

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    l1: float = 0.1
    l2: float = 0.01
    max_iterations: int = 200
    gradient_tolerance: float = 1e-5
    history_size: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("l1 and l2 must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class CorpusMatrices:
    """Sparse design matrix and gold statistics for one corpus under one model layout.

    Sequences are bucketed by length so forward-backward runs batched.
    """

    def __init__(self, model: CrfModel, corpus: Sequence[TokenSequence]):
        L = model.n_labels
        A = len(model.attributes)
        rows, cols, gold = [], [], []
        lengths = []
        n = 0
        for seq in corpus:
            if seq.tags is None:
                raise ValueError("every training sequence needs gold tags")
            for ids in model.attribute_ids(seq.features):
                rows.extend([n] * len(ids))
                cols.extend(ids)
                n += 1
            gold.extend(model.label_set.index(t) for t in seq.tags)
            lengths.append(len(seq))
        self.n_positions = n
        self.X = sp.csr_matrix(
            (np.ones(len(rows)), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
            shape=(n, A),
        )
        self.XT = self.X.T.tocsr()
        self.gold = np.array(gold, dtype=np.intp)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.intp)
        self.buckets = []
        for T in sorted(set(lengths)):
            idx = np.flatnonzero(np.array(lengths) == T)
            pos = starts[idx][:, None] + np.arange(T)[None, :]
            self.buckets.append(pos)
        onehot = np.zeros((n, L))
        onehot[np.arange(n), self.gold] = 1.0
        emp_state = np.asarray(self.XT @ onehot)
        emp_trans = np.zeros((L, L))
        for pos in self.buckets:
            g = self.gold[pos]
            if g.shape[1] > 1:
                np.add.at(emp_trans, (g[:, :-1].ravel(), g[:, 1:].ravel()), 1.0)
        self.empirical = np.concatenate([emp_state.ravel(), emp_trans.ravel()])


def objective_and_gradient(model: CrfModel, data: CorpusMatrices | Sequence[TokenSequence],
                           config: TrainConfig, weights: np.ndarray | None = None):
    """Negative log-likelihood plus the L2 term, and its gradient.

    The L1 term is left to the optimizer.
    """
    if not isinstance(data, CorpusMatrices):
        data = CorpusMatrices(model, data)
    theta = model.weights if weights is None else weights
    L = model.n_labels
    A = len(model.attributes)
    W = theta[: A * L].reshape(A, L)
    trans = theta[A * L:].reshape(L, L)
    emissions = data.X @ W
    node_all = np.empty_like(emissions)
    edge_sum = np.zeros((L, L))
    logz_total = 0.0
    for pos in data.buckets:
        logz, node, edge = forward_backward(emissions[pos], trans)
        logz_total += logz.sum()
        node_all[pos] = node
        if edge.shape[1]:
            edge_sum += edge.sum(axis=(0, 1))
    expected = np.concatenate([np.asarray(data.XT @ node_all).ravel(), edge_sum.ravel()])
    value = logz_total - theta.dot(data.empirical) + 0.5 * config.l2 * theta.dot(theta)
    grad = expected - data.empirical + config.l2 * theta
    return float(value), grad


def collect_attributes(corpus: Sequence[TokenSequence]) -> tuple[str, ...]:
    return tuple(sorted({f for seq in corpus for feats in seq.features for f in feats}))


def featurize_corpus(corpus, feature_config: FeatureConfig) -> list[TokenSequence]:
    """Accept TokenSequences or (tokens, tags) pairs / objects with .tokens/.tags."""
    out = []
    for item in corpus:
        if isinstance(item, TokenSequence):
            out.append(item)
        elif isinstance(item, tuple):
            out.append(extract_features(item[0], feature_config, item[1]))
        else:
            out.append(extract_features(item.tokens, feature_config, item.tags))
    return out


def train(corpus, feature_config: FeatureConfig | None = None,
          train_config: TrainConfig | None = None,
          labels: Sequence[str] = DEFAULT_LABELS) -> CrfModel:
    feature_config = feature_config or FeatureConfig()
    train_config = train_config or TrainConfig()
    seqs = featurize_corpus(corpus, feature_config)
    if not seqs:
        raise ValueError("empty corpus")
    label_set = LabelSet(tuple(labels))
    if "O" not in label_set.labels:
        raise ValueError("label set must contain 'O'")
    unknown = {t for s in seqs for t in (s.tags or ())} - set(label_set.labels)
    if unknown:
        raise ValueError(f"corpus uses labels outside the label set: {sorted(unknown)}")
    model = CrfModel.zeros(label_set, collect_attributes(seqs), feature_config=feature_config)
    data = CorpusMatrices(model, seqs)

    def fun(theta):
        return objective_and_gradient(model, data, train_config, theta)

    def progress(k, F):
        if k % 10 == 0:
            log.info("iteration %d objective %.6f", k, F)

    res = owlqn(
        fun,
        model.weights,
        l1=train_config.l1,
        max_iter=train_config.max_iterations,
        tol=train_config.gradient_tolerance,
        m=train_config.history_size,
        callback=progress,
    )
    log.info("training stopped after %d iterations (%s)", res.n_iter, res.reason)
    meta = {
        "train_config": train_config.to_dict(),
        "n_sequences": len(seqs),
        "n_iterations": res.n_iter,
        "n_evaluations": res.n_evals,
        "stop_reason": res.reason,
        "objective_trace": res.trace,
    }
    return CrfModel(label_set, model.attributes, res.x, feature_config, meta)
