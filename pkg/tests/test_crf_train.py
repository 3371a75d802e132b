import math

import numpy as np
import pytest

from oracles import central_difference, nll, random_instance
from exsearch.analytics.evaluation import entities_from_corpus, evaluate_ner
from exsearch.crf import (
    CorpusMatrices, CrfModel, ModelFormatError, NonFiniteObjective, TokenSequence, TrainConfig,
    objective_and_gradient, owlqn, train,
)
from exsearch.crf.optimize import pseudo_gradient
from exsearch.synthetic import synthetic_corpus

GRAD_FLOOR = 1e-6  # denominator floor for coordinates that are exactly zero


def _instances(rng, n_seqs=3):
    model, first = random_instance(rng, max_T=5, max_L=3, n_attrs=4, scale=0.8)
    seqs = [first]
    for _ in range(n_seqs - 1):
        _, s = random_instance(rng, max_T=5, max_L=3, n_attrs=4)
        tags = tuple(rng.choice(model.labels, size=len(s)))
        seqs.append(TokenSequence(s.tokens, s.features, tags))
    return model, seqs


def gradient_rel_error(model, seqs, l2):
    cfg = TrainConfig(l2=l2)
    data = CorpusMatrices(model, seqs)
    _, grad = objective_and_gradient(model, data, cfg)
    fd = central_difference(lambda w: objective_and_gradient(model, data, cfg, w)[0], model.weights.copy())
    denom = np.maximum(np.maximum(np.abs(grad), np.abs(fd)), GRAD_FLOOR)
    return float(np.max(np.abs(grad - fd) / denom))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    worst = max(gradient_rel_error(*_instances(rng), l2=float(rng.uniform(0, 1))) for _ in range(120))
    assert worst <= 1e-4


def test_value_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(30):
        model, seqs = _instances(rng)
        value, _ = objective_and_gradient(model, seqs, TrainConfig(l2=0.3))
        assert value == pytest.approx(nll(model, seqs, 0.3), abs=1e-9)


def test_uniform_single_token_value():
    m = CrfModel.zeros(["A", "B"], ["x"])
    value, _ = objective_and_gradient(m, [TokenSequence(("a",), (("x",),), ("A",))], TrainConfig(l2=0.5))
    assert value == pytest.approx(math.log(2), abs=1e-12)


def test_doubling_l2_adds_half_norm():
    rng = np.random.default_rng(11)
    model, seqs = _instances(rng)
    l2 = 0.25
    v1, _ = objective_and_gradient(model, seqs, TrainConfig(l2=l2))
    v2, _ = objective_and_gradient(model, seqs, TrainConfig(l2=2 * l2))
    norm2 = float(model.weights @ model.weights)
    assert v2 - v1 == pytest.approx(0.5 * l2 * norm2, rel=1e-12, abs=1e-12)


def test_missing_tags_is_error():
    m = CrfModel.zeros(["O", "A"], ["x"])
    with pytest.raises(ValueError):
        objective_and_gradient(m, [TokenSequence(("a",), (("x",),))], TrainConfig())


def test_train_rejects_bad_input():
    with pytest.raises(ValueError, match="empty"):
        train([])
    with pytest.raises(ValueError):
        train([(("a",), ("A",))], labels=("A", "B"))
    with pytest.raises(ValueError):
        train([(("a",), ("B-ZZZ",))])
    with pytest.raises(ValueError):
        TrainConfig(l1=-1)
    with pytest.raises(ValueError):
        TrainConfig(max_iterations=0)


# -- optimizer --------------------------------------------------------------


def test_pseudo_gradient_cases():
    x = np.array([0.0, 0.0, 0.0, 1.0, -1.0])
    g = np.array([-2.0, 2.0, 0.5, 0.3, 0.3])
    pg = pseudo_gradient(x, g, 1.0)
    assert np.allclose(pg, [-1.0, 1.0, 0.0, 1.3, -0.7])


def test_owlqn_lasso_solution():
    # min 0.5 (x - c)^2 + l1 |x| has the soft-threshold solution
    c = np.array([3.0, -0.5, 0.2, -2.0])
    res = owlqn(lambda x: (0.5 * float((x - c) @ (x - c)), x - c), np.zeros(4), l1=1.0, tol=1e-10)
    assert np.allclose(res.x, [2.0, 0.0, 0.0, -1.0], atol=1e-8)
    assert res.x[1] == 0.0 and res.x[2] == 0.0
    assert all(b <= a + 1e-12 for a, b in zip(res.trace, res.trace[1:]))


def test_owlqn_smooth_quadratic():
    Q = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -1.0])
    res = owlqn(lambda x: (0.5 * x @ Q @ x - b @ x, Q @ x - b), np.zeros(2), l1=0.0, tol=1e-10)
    assert np.allclose(res.x, np.linalg.solve(Q, b), atol=1e-8)
    assert res.reason == "converged"


def test_owlqn_nonfinite_objective_raises_with_iterate():
    def f(x):
        return float("nan"), np.zeros_like(x)
    with pytest.raises(NonFiniteObjective) as exc:
        owlqn(f, np.ones(3), l1=0.0)
    assert np.array_equal(exc.value.iterate, np.ones(3))


# -- end to end -------------------------------------------------------------


def test_heldout_f1_and_monotone_trace(trained_model, synthetic_split):
    _, test = synthetic_split
    gold = entities_from_corpus(test)
    pred = entities_from_corpus(test, lambda s: trained_model.predict_tokens(list(s.tokens)))
    assert evaluate_ner(gold, pred)["macro"].f1 >= 0.95
    trace = trained_model.train_meta["objective_trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_l1_increases_sparsity():
    corpus = synthetic_corpus(300, seed=2)
    dense = train(corpus, train_config=TrainConfig(l1=0.0, max_iterations=60))
    sparse = train(corpus, train_config=TrainConfig(l1=10.0, max_iterations=60))
    assert np.mean(sparse.weights == 0) > np.mean(dense.weights == 0)


def test_training_is_deterministic():
    corpus = synthetic_corpus(200, seed=4)
    cfg = TrainConfig(max_iterations=40)
    a = train(corpus, train_config=cfg)
    b = train(corpus, train_config=cfg)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.dumps() == b.dumps()


def test_save_load_predict_identical(trained_model, synthetic_split, tmp_path):
    path = tmp_path / "model.crf"
    checksum = trained_model.save(path)
    assert checksum.startswith("sha256:")
    loaded = CrfModel.load(path)
    assert loaded.weights.tobytes() == trained_model.weights.tobytes()
    for seq in synthetic_split[1][:100]:
        toks = list(seq.tokens)
        assert loaded.predict_tokens(toks) == trained_model.predict_tokens(toks)


def test_tampered_model_is_rejected(trained_model, tmp_path):
    text = trained_model.dumps()
    bad = text.replace('"n_sequences":', '"n_sequences":1', 1)
    with pytest.raises(ModelFormatError, match="checksum"):
        CrfModel.loads(bad)
    with pytest.raises(ModelFormatError):
        CrfModel.loads("not json")
