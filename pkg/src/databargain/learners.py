"""Small deterministic text classifiers used as the Shapley value function.

All learners are full-batch and start from zero weights, so results depend
only on the data.  Rows are L2-normalized before fitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelKind:
    name: str  # "svm" | "logreg" | "knn" | "coverage"
    k: int = 5
    epochs: int = 200
    learning_rate: float = 0.5
    l2: float = 1e-4

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")
        if self.k < 1:
            raise ValueError("knn needs k >= 1")
        if self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("linear models need epochs >= 1 and a positive step")


MODEL_NAMES = ("svm", "logreg", "knn", "coverage")
LINEAR_SVM = ModelKind("svm")
LOGISTIC_REGRESSION = ModelKind("logreg")
KNN = ModelKind("knn")
SYNTHETIC_COVERAGE = ModelKind("coverage")


def _normalize(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms == 0, 1.0, norms)


def _one_hot(y_idx: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((len(y_idx), n_classes))
    out[np.arange(len(y_idx)), y_idx] = 1.0
    return out


def _fit_linear(x, y_idx, n_classes, model: ModelKind) -> tuple[np.ndarray, np.ndarray]:
    n, d = x.shape
    w = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    y = _one_hot(y_idx, n_classes)
    sign = 2 * y - 1
    for _ in range(model.epochs):
        scores = x @ w + b
        if model.name == "svm":
            # one-vs-rest hinge subgradient
            active = (sign * scores) < 1
            g = -(sign * active)
        else:
            z = scores - scores.max(axis=1, keepdims=True)
            p = np.exp(z)
            p /= p.sum(axis=1, keepdims=True)
            g = p - y
        w -= model.learning_rate * (x.T @ g / n + model.l2 * w)
        b -= model.learning_rate * g.mean(axis=0)
    return w, b


def _predict_knn(x_train, y_idx, x_test, k: int, n_classes: int) -> np.ndarray:
    sims = x_test @ x_train.T
    k = min(k, x_train.shape[0])
    # stable sort on (-sim, train index) keeps ties deterministic
    nearest = np.argsort(-sims, axis=1, kind="stable")[:, :k]
    preds = np.empty(len(x_test), dtype=int)
    for row, idx in enumerate(nearest):
        votes = np.zeros(n_classes)
        for rank, j in enumerate(idx):
            votes[y_idx[j]] += 1.0 + 1e-9 * (k - rank)  # nearer neighbour breaks vote ties
        preds[row] = int(np.argmax(votes))
    return preds


def train_and_score(model: ModelKind, x_train: np.ndarray, y_train, x_test: np.ndarray,
                    y_test) -> float:
    """Fit ``model`` on the training rows and return accuracy on the test rows.

    An empty training set scores the uniform-guess baseline
    ``1 / (number of classes in the test labels)``.
    """
    y_test = np.asarray(y_test)
    if len(y_test) == 0:
        raise ValueError("test set is empty")
    if len(y_train) == 0:
        return 1.0 / len(np.unique(y_test))
    if model.name == "coverage":
        raise ValueError("coverage is not a trainable model")
    labels = sorted(set(np.asarray(y_train).tolist()))
    index = {lab: i for i, lab in enumerate(labels)}
    y_idx = np.array([index[v] for v in y_train])
    xtr, xte = _normalize(np.asarray(x_train, float)), _normalize(np.asarray(x_test, float))
    if model.name == "knn":
        pred = _predict_knn(xtr, y_idx, xte, model.k, len(labels))
    elif len(labels) == 1:
        pred = np.zeros(len(xte), dtype=int)
    else:
        w, b = _fit_linear(xtr, y_idx, len(labels), model)
        pred = np.argmax(xte @ w + b, axis=1)
    predicted = np.array(labels, dtype=object)[pred]
    return float(np.mean(predicted == y_test.astype(object)))
