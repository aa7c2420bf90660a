"""One-vs-rest linear SVM, 1-NN cross-check, and OA / AA / kappa."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .datamodel import SampleSet, rng_for
from .eig import format_floats, parse_floats, read_sections


@dataclass(frozen=True)
class LinearModel:
    """Per-class scores ``w_c . z + b_c`` on standardized features ``z``.

    ``feature_mean`` and ``feature_scale`` hold the standardization fitted
    on the training features; ``z = (x - mean) / scale``.
    """

    weights: np.ndarray
    biases: np.ndarray
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    lambda_reg: float = 0.01
    epochs: int = 200

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        b = np.array(self.biases, dtype=np.float64, copy=True).reshape(-1)
        if w.ndim != 2 or w.shape[0] != b.shape[0]:
            raise ValueError("weights must be (C, d) with one bias per class")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("model parameters must be finite")
        d = w.shape[1]
        mean = np.zeros(d) if self.feature_mean is None else np.array(self.feature_mean, dtype=np.float64)
        scale = np.ones(d) if self.feature_scale is None else np.array(self.feature_scale, dtype=np.float64)
        if mean.shape != (d,) or scale.shape != (d,):
            raise ValueError("standardization vectors must match the feature dimension")
        for name, arr in (("weights", w), ("biases", b), ("feature_mean", mean), ("feature_scale", scale)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"expected features of dimension {self.dim}, got shape {x.shape}")
        return ((x - self.feature_mean) / self.feature_scale) @ self.weights.T + self.biases


def visiting_order(n: int, epochs: int, seed: int) -> np.ndarray:
    rng = rng_for(seed)
    return np.concatenate([rng.permutation(n) for _ in range(epochs)]) if epochs else np.zeros(0, dtype=np.intp)


def train_svm(
    train: SampleSet,
    lambda_reg: float = 0.01,
    epochs: int = 200,
    seed: int = 0,
    standardize: bool = True,
    backend=None,
) -> LinearModel:
    """Fit one hinge-loss linear classifier per class against the rest.

    Pegasos stochastic subgradient descent with step ``1 / (lambda_reg t)``
    and projection onto the ball of radius ``1 / sqrt(lambda_reg)``. The
    bias is learned as the weight of a constant feature. All classes visit
    samples in the same seeded order.
    """
    labels = train.labels
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("train_svm needs at least two classes")
    n_classes = int(labels.max())
    if len(classes) != n_classes:
        missing = sorted(set(range(1, n_classes + 1)) - set(classes.tolist()))
        raise ValueError(f"no training samples for classes {missing}")
    if not lambda_reg > 0:
        raise ValueError("lambda_reg must be > 0")

    x = train.features
    if standardize:
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean, scale = np.zeros(x.shape[1]), np.ones(x.shape[1])
    z = np.hstack([(x - mean) / scale, np.ones((len(x), 1))])
    targets = np.where(labels[None, :] == np.arange(1, n_classes + 1)[:, None], 1.0, -1.0)
    order = visiting_order(len(x), epochs, seed)
    w = _backend.get(backend).pegasos_ovr(z, targets, order, float(lambda_reg))
    return LinearModel(w[:, :-1], w[:, -1], mean, scale, lambda_reg, epochs)


def predict(model: LinearModel, samples) -> np.ndarray:
    """Class ids 1..C by highest score; ties go to the lowest id."""
    feats = samples.features if isinstance(samples, SampleSet) else samples
    return np.argmax(model.scores(feats), axis=1) + 1


def predict_1nn(train: SampleSet, samples) -> np.ndarray:
    """Label of the nearest training sample (lowest index on ties)."""
    feats = samples.features if isinstance(samples, SampleSet) else np.asarray(samples, dtype=np.float64)
    if feats.shape[1] != train.dim:
        raise ValueError(f"expected features of dimension {train.dim}, got {feats.shape[1]}")
    d2 = np.empty((len(feats), len(train)))
    for t, xt in enumerate(train.features):
        diff = feats - xt
        d2[:, t] = np.einsum("ij,ij->i", diff, diff)
    return train.labels[np.argmin(d2, axis=1)]


def confusion_matrix(true, pred, n_classes: int) -> np.ndarray:
    true = np.asarray(true, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if true.shape != pred.shape:
        raise ValueError("true and predicted label arrays differ in length")
    for arr in (true, pred):
        if len(arr) and (arr.min() < 1 or arr.max() > n_classes):
            raise ValueError(f"labels must be in 1..{n_classes}")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (true - 1, pred - 1), 1)
    return cm


def metrics(cm) -> tuple[float, float, float]:
    """Overall accuracy, average per-class recall and Cohen's kappa."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.size == 0:
        raise ValueError("confusion matrix must be square and non-empty")
    if (cm < 0).any():
        raise ValueError("confusion matrix counts must be non-negative")
    total = cm.sum()
    if total < 1:
        raise ValueError("confusion matrix is empty")
    rows = cm.sum(axis=1)
    if (rows == 0).any():
        raise ValueError(f"classes {(np.flatnonzero(rows == 0) + 1).tolist()} have no true samples; AA undefined")
    oa = np.trace(cm) / total
    aa = float(np.mean(np.diag(cm) / rows))
    pe = float(np.sum(rows * cm.sum(axis=0))) / float(total) ** 2
    if pe == 1.0:
        warnings.warn("chance agreement is 1; kappa set to 0", RuntimeWarning, stacklevel=2)
        kappa = 0.0
    else:
        kappa = (oa - pe) / (1.0 - pe)
    return float(oa), aa, float(kappa)


def save_model(model: LinearModel, path) -> None:
    """Same text layout as a saved projection: fields, then one row per class."""
    lines = [
        "# ssrlsc linear model",
        f"classes: {model.n_classes}",
        f"dim: {model.dim}",
        f"lambda_reg: {model.lambda_reg!r}",
        f"epochs: {model.epochs}",
        f"biases: {format_floats(model.biases)}",
        f"feature_mean: {format_floats(model.feature_mean)}",
        f"feature_scale: {format_floats(model.feature_scale)}",
        "weights:",
    ]
    lines += [format_floats(row) for row in model.weights]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> LinearModel:
    fields, body = read_sections(path)
    c, d = int(fields["classes"]), int(fields["dim"])
    rows = [parse_floats(line) for line in body]
    if len(rows) != c or any(len(r) != d for r in rows):
        raise ValueError(f"{path}: weights do not match declared {c}x{d}")
    return LinearModel(
        np.array(rows).reshape(c, d),
        parse_floats(fields["biases"]),
        parse_floats(fields["feature_mean"]) if d else None,
        parse_floats(fields["feature_scale"]) if d else None,
        float(fields["lambda_reg"]),
        int(fields["epochs"]),
    )
