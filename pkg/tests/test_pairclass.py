from __future__ import annotations

import numpy as np
import pytest

from ctxrec.pairclass import (
    LabeledPair,
    SoftmaxModel,
    TrainConfig,
    evaluate,
    load_pairs_jsonl,
    loss_and_grad,
    make_features,
    predict,
    train,
)
from oracles import metrics_oracle


# -- features ------------------------------------------------------------


def test_features_dimension_is_4d():
    assert make_features(np.ones(3), np.zeros(3)).shape == (12,)


def test_features_equal_vectors_zero_difference_block():
    v = np.array([0.3, -1.2, 4.0])
    feature = make_features(v, v)
    np.testing.assert_array_equal(feature[6:9], np.zeros(3))


def test_features_swap_symmetry():
    rng = np.random.default_rng(0)
    va, vb = rng.normal(size=4), rng.normal(size=4)
    fwd = make_features(va, vb)
    rev = make_features(vb, va)
    np.testing.assert_array_equal(rev[:4], fwd[4:8])
    np.testing.assert_array_equal(rev[4:8], fwd[:4])
    np.testing.assert_array_equal(rev[8:12], fwd[8:12])
    np.testing.assert_array_equal(rev[12:], fwd[12:])


def test_features_dimension_mismatch():
    with pytest.raises(ValueError):
        make_features(np.ones(3), np.ones(4))


# -- gradient correctness -------------------------------------------------


def test_analytic_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    step = 1e-5
    for _ in range(10):
        n_classes = int(rng.integers(2, 5))
        dim = int(rng.integers(3, 9))
        batch = int(rng.integers(2, 12))
        weights = rng.normal(size=(n_classes, dim))
        bias = rng.normal(size=n_classes)
        features = rng.normal(size=(batch, dim))
        labels = rng.integers(0, n_classes, size=batch)
        l2 = float(rng.choice([0.0, 1e-3, 1e-1]))

        _, grad_w, grad_b = loss_and_grad(weights, bias, features, labels, l2)

        def numeric(param, setter):
            grad = np.zeros_like(param)
            flat = param.ravel()
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                up, _, _ = loss_and_grad(weights, bias, features, labels, l2)
                flat[i] = original - step
                down, _, _ = loss_and_grad(weights, bias, features, labels, l2)
                flat[i] = original
                grad.ravel()[i] = (up - down) / (2 * step)
            return grad

        num_w = numeric(weights, None)
        num_b = numeric(bias, None)
        for analytic, numeric_grad in ((grad_w, num_w), (grad_b, num_b)):
            denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric_grad)))
            rel = np.abs(analytic - numeric_grad) / denom
            assert rel.max() < 1e-4


# -- synthetic separable training ------------------------------------------


def separable_pairs(rng: np.random.Generator, n_per_class: int, start: int = 0):
    """Two Gaussian clusters in feature space: class centers +/- m in the
    first two feature blocks, sigma 0.1, center distance ~5."""
    m = 5.0 / (2.0 * np.sqrt(6.0))  # distance 5 across the two 3-dim blocks
    sigma = 0.1
    vectors: dict[str, np.ndarray] = {}
    pairs = []
    for label, sign in (("alpha", 1.0), ("beta", -1.0)):
        for i in range(n_per_class):
            a_id = f"{label}{start + i}a"
            b_id = f"{label}{start + i}b"
            vectors[a_id] = sign * m + sigma * rng.normal(size=3)
            vectors[b_id] = sign * m + sigma * rng.normal(size=3)
            pairs.append(LabeledPair(a=a_id, b=b_id, label=label))
    return pairs, vectors


def test_training_separates_gaussian_clusters():
    rng = np.random.default_rng(2)
    train_pairs, train_vectors = separable_pairs(rng, 200)
    model, _ = train(train_pairs, train_vectors, TrainConfig(seed=5))
    metrics = evaluate(model, train_pairs, train_vectors)
    assert metrics.accuracy >= 0.95

    held_pairs, held_vectors = separable_pairs(rng, 100, start=1000)
    held = evaluate(model, held_pairs, held_vectors)
    assert held.accuracy >= 0.90


def test_huge_l2_collapses_weights():
    rng = np.random.default_rng(3)
    pairs, vectors = separable_pairs(rng, 20)
    config = TrainConfig(learning_rate=1e-6, epochs=50, l2=1e6, batch_size=10_000)
    model, _ = train(pairs, vectors, config)
    assert np.linalg.norm(model.weights) < 1e-2


def test_training_deterministic_for_fixed_seed():
    rng = np.random.default_rng(4)
    pairs, vectors = separable_pairs(rng, 30)
    config = TrainConfig(seed=9, epochs=40)
    model_a, loss_a = train(pairs, vectors, config)
    model_b, loss_b = train(pairs, vectors, config)
    assert loss_a == loss_b
    assert np.array_equal(model_a.weights, model_b.weights)
    assert np.array_equal(model_a.bias, model_b.bias)


def test_loss_non_increasing_over_full_batch_epochs():
    rng = np.random.default_rng(5)
    pairs, vectors = separable_pairs(rng, 40)
    losses = []
    for epochs in range(1, 11):
        config = TrainConfig(learning_rate=0.1, epochs=epochs, batch_size=10_000, seed=0)
        _, loss = train(pairs, vectors, config)
        losses.append(loss)
    for earlier, later in zip(losses, losses[1:]):
        assert later <= earlier + 1e-9


def test_prediction_approximately_symmetric_after_symmetrized_training():
    rng = np.random.default_rng(6)
    train_pairs, train_vectors = separable_pairs(rng, 100)
    model, _ = train(train_pairs, train_vectors, TrainConfig(seed=1))
    held_pairs, held_vectors = separable_pairs(rng, 50, start=2000)
    gaps = []
    for pair in held_pairs:
        fwd = predict(model, held_vectors[pair.a], held_vectors[pair.b])
        rev = predict(model, held_vectors[pair.b], held_vectors[pair.a])
        gaps.extend(abs(fwd[c] - rev[c]) for c in model.classes)
    assert np.mean(gaps) <= 0.1


def test_train_rejects_single_class_and_missing_vectors():
    rng = np.random.default_rng(7)
    vectors = {"a": rng.normal(size=3), "b": rng.normal(size=3)}
    with pytest.raises(ValueError, match="distinct labels"):
        train([LabeledPair("a", "b", "only")], vectors)
    pairs = [LabeledPair("a", "b", "x"), LabeledPair("a", "ghost", "y")]
    with pytest.raises(KeyError, match="ghost"):
        train(pairs, vectors)


# -- prediction -------------------------------------------------------------


def test_predict_distribution_sums_to_one():
    rng = np.random.default_rng(8)
    model = SoftmaxModel(
        classes=["a", "b", "c"],
        weights=rng.normal(size=(3, 8)),
        bias=rng.normal(size=3),
    )
    for _ in range(50):
        probs = predict(model, rng.normal(size=2), rng.normal(size=2))
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in probs.values())


def test_zero_model_predicts_uniformly():
    model = SoftmaxModel(
        classes=["a", "b", "c", "d"], weights=np.zeros((4, 8)), bias=np.zeros(4)
    )
    probs = predict(model, np.ones(2), np.ones(2))
    for p in probs.values():
        assert p == pytest.approx(0.25, abs=1e-12)


def test_predict_dimension_mismatch():
    model = SoftmaxModel(classes=["a", "b"], weights=np.zeros((2, 8)), bias=np.zeros(2))
    with pytest.raises(ValueError, match="dimension"):
        predict(model, np.ones(3), np.ones(3))


# -- evaluation ---------------------------------------------------------------


def test_evaluate_all_correct():
    rng = np.random.default_rng(9)
    pairs, vectors = separable_pairs(rng, 50)
    model, _ = train(pairs, vectors, TrainConfig(seed=2))
    metrics = evaluate(model, pairs, vectors)
    if metrics.accuracy == 1.0:
        for true in model.classes:
            for pred in model.classes:
                if true != pred:
                    assert metrics.confusion[true][pred] == 0


def test_evaluate_constant_predictor_hand_metrics():
    vectors = {f"d{i}": np.ones(2) for i in range(20)}
    pairs = [
        LabeledPair(f"d{i}", f"d{i + 10}", "alpha" if i < 5 else "beta")
        for i in range(10)
    ]
    model = SoftmaxModel(
        classes=["alpha", "beta"],
        weights=np.zeros((2, 8)),
        bias=np.array([5.0, 0.0]),  # always predicts alpha
    )
    metrics = evaluate(model, pairs, vectors)
    assert metrics.accuracy == pytest.approx(0.5)
    assert metrics.macro_f1 == pytest.approx(1 / 3)
    assert metrics.confusion["beta"]["alpha"] == 5


def test_evaluate_matches_metrics_oracle():
    rng = np.random.default_rng(10)
    for _ in range(20):
        n_classes = int(rng.integers(2, 5))
        classes = [f"c{i}" for i in range(n_classes)]
        model = SoftmaxModel(
            classes=classes,
            weights=rng.normal(size=(n_classes, 12)),
            bias=rng.normal(size=n_classes),
        )
        vectors = {f"d{i}": rng.normal(size=3) for i in range(30)}
        ids = list(vectors)
        pairs = []
        for _ in range(40):
            a, b = rng.choice(len(ids), size=2, replace=False)
            pairs.append(
                LabeledPair(ids[int(a)], ids[int(b)], str(rng.choice(classes)))
            )
        metrics = evaluate(model, pairs, vectors)
        predicted = []
        for pair in pairs:
            probs = predict(model, vectors[pair.a], vectors[pair.b])
            predicted.append(max(classes, key=lambda c: (probs[c], c)))
        acc, precision, recall, f1, macro = metrics_oracle(
            [p.label for p in pairs], predicted, classes
        )
        assert metrics.accuracy == pytest.approx(acc)
        assert metrics.macro_f1 == pytest.approx(macro)
        for c in classes:
            assert metrics.precision[c] == pytest.approx(precision[c])
            assert metrics.recall[c] == pytest.approx(recall[c])
            assert metrics.f1[c] == pytest.approx(f1[c])


def test_evaluate_empty_input_rejected():
    model = SoftmaxModel(classes=["a", "b"], weights=np.zeros((2, 8)), bias=np.zeros(2))
    with pytest.raises(ValueError):
        evaluate(model, [], {})


# -- persistence ---------------------------------------------------------------


def test_model_save_load_round_trip_exact(tmp_path):
    rng = np.random.default_rng(11)
    pairs, vectors = separable_pairs(rng, 20)
    model, _ = train(pairs, vectors, TrainConfig(epochs=30, seed=3))
    path = tmp_path / "model.txt"
    model.save(path)
    loaded = SoftmaxModel.load(path)
    assert loaded.classes == model.classes
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.bias, model.bias)


def test_model_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a model\n")
    with pytest.raises(ValueError):
        SoftmaxModel.load(path)


def test_load_pairs_jsonl(tmp_path):
    path = tmp_path / "pairs.jsonl"
    path.write_text('{"a": "x", "b": "y", "label": "method"}\n')
    pairs = load_pairs_jsonl(path)
    assert pairs == [LabeledPair("x", "y", "method")]
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"a": "x"}\n')
    with pytest.raises(ValueError):
        load_pairs_jsonl(bad)


def test_labeled_pair_rejects_identical_documents():
    with pytest.raises(ValueError):
        LabeledPair("a", "a", "x")
