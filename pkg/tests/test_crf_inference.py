import math

import numpy as np
import pytest

from oracles import brute_force, enumerate_paths, explicit_score, random_instance
from exsearch.crf import (
    CrfModel, TokenSequence, forward_backward, log_partition_and_marginals, path_score, viterbi,
)


def _plain(T):
    return TokenSequence(tuple(f"t{i}" for i in range(T)), tuple(() for _ in range(T)))


def _aa_model():
    m = CrfModel.zeros(["A", "B"], [])
    m.weights[m.feature_index["trans:A->A"]] = 1.0
    return m


def test_uniform_model():
    m = CrfModel.zeros(["A", "B"], ["x"])
    logz, node, edge = log_partition_and_marginals(m, _plain(3))
    assert logz == pytest.approx(3 * math.log(2), abs=1e-12)
    assert np.allclose(node, 0.5, atol=1e-12)
    assert edge.shape == (2, 2, 2) and np.allclose(edge, 0.25)


def test_single_transition_feature():
    logz, _, _ = log_partition_and_marginals(_aa_model(), _plain(2))
    assert logz == pytest.approx(math.log(3 + math.e), abs=1e-12)


def test_viterbi_single_transition_feature():
    path, score = _aa_model().viterbi(_plain(2))
    assert path == ["A", "A"] and score == pytest.approx(1.0)


def test_viterbi_zero_weights_prefers_index_zero():
    m = CrfModel.zeros(["O", "B-EXID", "I-EXID"], ["x"])
    assert m.viterbi(_plain(4))[0] == ["O"] * 4


def test_empty_sequence_is_error():
    with pytest.raises(ValueError):
        forward_backward(np.zeros((0, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        viterbi(np.zeros((0, 2)), np.zeros((2, 2)))


def test_oracle_agreement_random_models():
    rng = np.random.default_rng(1234)
    for _ in range(250):
        model, seq = random_instance(rng)
        logz, node, edge, best, best_score, probs = brute_force(model, seq)
        got_logz, got_node, got_edge = model.marginals(seq)
        assert abs(got_logz - logz) <= 1e-8
        assert np.max(np.abs(got_node - node)) <= 1e-8
        assert got_edge.shape == edge.shape
        assert np.all(np.abs(got_edge - edge) <= 1e-8)
        assert abs(probs.sum() - 1) <= 1e-8
        path, score = model.viterbi(seq)
        assert abs(score - best_score) <= 1e-8
        assert abs(explicit_score(model, seq, path) - best_score) <= 1e-8


def test_marginals_are_consistent():
    rng = np.random.default_rng(5)
    for _ in range(50):
        model, seq = random_instance(rng, max_T=8, max_L=5)
        _, node, edge = model.marginals(seq)
        assert np.allclose(node.sum(axis=1), 1, atol=1e-12)
        if len(seq) > 1:
            assert np.allclose(edge.sum(axis=2), node[:-1], atol=1e-12)
            assert np.allclose(edge.sum(axis=1), node[1:], atol=1e-12)


def test_viterbi_tie_break_matches_enumeration_order():
    # all paths tie; first enumerated (lowest indices) must win
    m = CrfModel.zeros(["A", "B", "C"], [])
    paths = enumerate_paths(m, _plain(3))
    assert m.viterbi(_plain(3))[0] == list(paths[0][0])


def test_batched_matches_single():
    rng = np.random.default_rng(9)
    E = rng.normal(size=(4, 5, 3))
    A = rng.normal(size=(3, 3))
    logz, node, edge = forward_backward(E, A)
    for b in range(4):
        l1, n1, e1 = forward_backward(E[b], A)
        assert logz[b] == pytest.approx(l1, abs=1e-12)
        assert np.allclose(node[b], n1) and np.allclose(edge[b], e1)


def test_long_sequence_large_weights_stay_finite():
    rng = np.random.default_rng(0)
    T, L = 200, 5
    E = rng.uniform(-10, 10, size=(T, L)) * 4  # several active features per position
    A = rng.uniform(-10, 10, size=(L, L))
    logz, node, edge = forward_backward(E, A)
    assert np.isfinite(logz)
    assert np.all(np.isfinite(node)) and np.all(np.isfinite(edge))
    assert np.allclose(node.sum(axis=1), 1)
    path, score = viterbi(E, A)
    assert score == pytest.approx(path_score(E, A, path))
    assert score <= logz + 1e-9


def test_unseen_features_are_ignored():
    m = CrfModel.zeros(["A", "B"], ["x"])
    m.weights[m.feature_index["x|B"]] = 2.0
    seq = TokenSequence(("a",), (("x", "never-seen"),))
    assert m.viterbi(seq) == (["B"], 2.0)
