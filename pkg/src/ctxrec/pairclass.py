"""Pairwise document classification.

A document pair maps to a feature vector [va; vb; |va - vb|; va * vb] and
a multinomial logistic regression predicts which context label (or the
reserved label "none") relates the two documents. The predicted class
probability doubles as a contextual similarity score downstream.

Training is plain mini-batch SGD on cross-entropy with L2 regularization,
deterministic under a fixed seed, with every pair also trained in swapped
order so predictions stay approximately symmetric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

NONE_LABEL = "none"

MODEL_FORMAT = "pairclass-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledPair:
    """A training/evaluation example: two distinct documents and a label."""

    a: str
    b: str
    label: str

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"pair must hold two distinct documents, got {self.a!r}")


@dataclass
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 200
    l2: float = 1e-4
    batch_size: int = 32
    seed: int = 0


@dataclass
class PairMetrics:
    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    f1: dict[str, float]
    macro_f1: float
    confusion: dict[str, dict[str, int]]  # rows = true labels


@dataclass
class SoftmaxModel:
    """Multinomial logistic regression over pair features.

    ``weights`` is (classes x feature-dim), one row per class in the order
    of ``classes``; ``bias`` has one entry per class.
    """

    classes: list[str]
    weights: np.ndarray
    bias: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]

    def save(self, path: str | Path) -> None:
        """Single-file persistence: versioned header, class ordering, then
        row-major parameters in decimal text (round-trip exact)."""
        lines = [f"{MODEL_FORMAT} {MODEL_VERSION}"]
        lines.append("classes " + json.dumps(self.classes))
        lines.append(f"features {self.feature_dim}")
        for row in self.weights:
            lines.append(" ".join(repr(float(v)) for v in row))
        lines.append("bias " + " ".join(repr(float(v)) for v in self.bias))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SoftmaxModel":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(MODEL_FORMAT):
            raise ValueError(f"{path}: not a pair-classifier model file")
        version = int(lines[0].split()[1])
        if version != MODEL_VERSION:
            raise ValueError(f"unsupported model version {version}")
        classes = json.loads(lines[1].removeprefix("classes "))
        dim = int(lines[2].removeprefix("features "))
        weights = np.array(
            [[float(v) for v in lines[3 + i].split()] for i in range(len(classes))]
        )
        bias = np.array(
            [float(v) for v in lines[3 + len(classes)].removeprefix("bias ").split()]
        )
        if weights.shape != (len(classes), dim):
            raise ValueError(f"{path}: parameter shape mismatch")
        return cls(classes=classes, weights=weights, bias=bias)


def make_features(va: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """Pair feature map: [va; vb; |va - vb|; va * vb] (dimension 4d)."""
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return np.concatenate([va, vb, np.abs(va - vb), va * vb])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)*||W||^2 and its analytic gradient.

    ``labels`` holds class indices; bias is unregularized.
    """
    n = features.shape[0]
    probs = _softmax(features @ weights.T + bias)
    nll = -np.log(np.clip(probs[np.arange(n), labels], 1e-300, None)).mean()
    loss = nll + 0.5 * l2 * float(np.sum(weights * weights))
    delta = probs
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ features / n + l2 * weights
    grad_b = delta.sum(axis=0) / n
    return float(loss), grad_w, grad_b


def _assemble(
    pairs: Sequence[LabeledPair],
    doc_vectors: Mapping[str, np.ndarray],
    classes: Sequence[str],
    symmetrize: bool,
) -> tuple[np.ndarray, np.ndarray]:
    class_index = {c: i for i, c in enumerate(classes)}
    rows = []
    labels = []
    for pair in pairs:
        for doc in (pair.a, pair.b):
            if doc not in doc_vectors:
                raise KeyError(f"no vector for document {doc!r}")
        rows.append(make_features(doc_vectors[pair.a], doc_vectors[pair.b]))
        labels.append(class_index[pair.label])
        if symmetrize:
            rows.append(make_features(doc_vectors[pair.b], doc_vectors[pair.a]))
            labels.append(class_index[pair.label])
    return np.stack(rows), np.array(labels, dtype=np.int64)


def train(
    pairs: Sequence[LabeledPair],
    doc_vectors: Mapping[str, np.ndarray],
    config: TrainConfig | None = None,
) -> tuple[SoftmaxModel, float]:
    """Fit the classifier by mini-batch SGD; returns (model, final loss).

    Every pair is also trained in swapped order with the same label.
    Classes are the sorted distinct labels of the training pairs; at least
    two must be present. Deterministic for a fixed config seed.
    """
    config = config or TrainConfig()
    if not pairs:
        raise ValueError("no training pairs")
    classes = sorted({p.label for p in pairs})
    if len(classes) < 2:
        raise ValueError(f"need at least 2 distinct labels, got {classes}")

    features, labels = _assemble(pairs, doc_vectors, classes, symmetrize=True)
    n, dim = features.shape
    weights = np.zeros((len(classes), dim))
    bias = np.zeros(len(classes))
    rng = np.random.default_rng(config.seed)
    batch = max(1, min(config.batch_size, n))

    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            _, grad_w, grad_b = loss_and_grad(
                weights, bias, features[rows], labels[rows], config.l2
            )
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b

    final_loss, _, _ = loss_and_grad(weights, bias, features, labels, config.l2)
    model = SoftmaxModel(classes=classes, weights=weights, bias=bias, config=config)
    return model, final_loss


def predict(
    model: SoftmaxModel, va: np.ndarray, vb: np.ndarray
) -> dict[str, float]:
    """Class probability distribution for an ordered document pair."""
    feature = make_features(va, vb)
    if feature.shape[0] != model.feature_dim:
        raise ValueError(
            f"feature dimension {feature.shape[0]} does not match model "
            f"dimension {model.feature_dim}"
        )
    probs = _softmax(model.weights @ feature + model.bias)
    return {c: float(p) for c, p in zip(model.classes, probs)}


def evaluate(
    model: SoftmaxModel,
    pairs: Sequence[LabeledPair],
    doc_vectors: Mapping[str, np.ndarray],
) -> PairMetrics:
    """Argmax metrics: accuracy, per-class precision/recall/F1 and their
    macro average over all model classes, and a confusion matrix whose
    rows are true labels."""
    if not pairs:
        raise ValueError("no pairs to evaluate")
    confusion = {t: {p: 0 for p in model.classes} for t in model.classes}
    correct = 0
    for pair in pairs:
        probs = predict(model, doc_vectors[pair.a], doc_vectors[pair.b])
        predicted = max(model.classes, key=lambda c: (probs[c], c))
        confusion[pair.label][predicted] += 1
        if predicted == pair.label:
            correct += 1

    precision = {}
    recall = {}
    f1 = {}
    for cls in model.classes:
        tp = confusion[cls][cls]
        fp = sum(confusion[t][cls] for t in model.classes if t != cls)
        fn = sum(confusion[cls][p] for p in model.classes if p != cls)
        precision[cls] = tp / (tp + fp) if tp + fp else 0.0
        recall[cls] = tp / (tp + fn) if tp + fn else 0.0
        denom = precision[cls] + recall[cls]
        f1[cls] = 2 * precision[cls] * recall[cls] / denom if denom else 0.0

    return PairMetrics(
        accuracy=correct / len(pairs),
        precision=precision,
        recall=recall,
        f1=f1,
        macro_f1=sum(f1.values()) / len(f1),
        confusion=confusion,
    )


def load_pairs_jsonl(path: str | Path) -> list[LabeledPair]:
    """Parse a training-pairs file: JSONL `{"a": str, "b": str, "label": str}`."""
    pairs = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {exc.msg}") from None
            for key in ("a", "b", "label"):
                if not isinstance(obj.get(key), str) or not obj[key]:
                    raise ValueError(f"{path}:{line_no}: missing field {key!r}")
            pairs.append(LabeledPair(a=obj["a"], b=obj["b"], label=obj["label"]))
    return pairs
