"""Linear probe: softmax regression on frozen embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ProbeModel:
    weights: np.ndarray  # (p, c)
    biases: np.ndarray  # (c,)
    classes: int
    history: list[float] | None = None  # cross-entropy before each epoch

    def logits(self, embeddings):
        return np.asarray(embeddings, dtype=np.float64) @ self.weights + self.biases

    def predict_proba(self, embeddings):
        return softmax(self.logits(embeddings))

    def predict(self, embeddings):
        # np.argmax returns the first maximum, i.e. ties go to the lowest class
        return np.argmax(self.logits(embeddings), axis=1)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(model: ProbeModel, embeddings, labels) -> float:
    z = model.logits(embeddings)
    z = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    return float((log_norm - z[np.arange(len(labels)), labels]).mean())


def _check(embeddings, labels, classes):
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError(f"shape mismatch: embeddings {x.shape}, labels {y.shape}")
    if classes is not None and y.size and (y.min() < 0 or y.max() >= classes):
        raise ValueError(f"labels must lie in [0, {classes})")
    return x, y


def fit_probe(embeddings, labels, classes: int, epochs: int = 300, lr: float = 0.1,
              seed: int = 0) -> ProbeModel:
    """Full-batch gradient descent on mean cross-entropy from a zero start.

    ``seed`` is accepted for interface symmetry; the fit is deterministic.
    """
    if classes < 2:
        raise ValueError("a probe needs at least 2 classes")
    x, y = _check(embeddings, labels, classes)
    n, p = x.shape
    model = ProbeModel(np.zeros((p, classes)), np.zeros(classes), classes, [])
    onehot = np.eye(classes)[y]
    for _ in range(epochs):
        model.history.append(cross_entropy(model, x, y))
        resid = (model.predict_proba(x) - onehot) / n
        model.weights -= lr * (x.T @ resid)
        model.biases -= lr * resid.sum(axis=0)
    return model


def evaluate(model: ProbeModel, embeddings, labels) -> float:
    x, y = _check(embeddings, labels, None)
    if x.shape[1] != model.weights.shape[0]:
        raise ValueError(f"embedding width {x.shape[1]} does not match probe input {model.weights.shape[0]}")
    if y.size == 0:
        return 0.0
    return float((model.predict(x) == y).mean())


def split_indices(n: int, seed: int, train_fraction: float = 0.8):
    """Seeded shuffle, then the first ``train_fraction`` goes to training."""
    order = np.random.default_rng(seed).permutation(n)
    cut = int(round(train_fraction * n))
    return order[:cut], order[cut:]
