"""Linear binary classifier on embedding vectors.

L2-regularized hinge loss minimized by seeded stochastic subgradient
descent with the 1/(lambda * t) step schedule, after per-coordinate
standardization of the training data (zero-variance coordinates keep
scale 1).  Training is sequential and fully determined by the config
seed, so identical inputs give identical models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .rng import RngStream


@dataclass(frozen=True)
class TrainConfig:
    lam: float | None = None  # None -> 1/n
    epochs: int = 50
    seed: int = 0
    standardize: bool = True

    def resolved_lam(self, n: int) -> float:
        return self.lam if self.lam is not None else 1.0 / n


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    classes: tuple  # (negative label, positive label); ties go to classes[0]
    config: TrainConfig
    mean: np.ndarray
    scale: np.ndarray

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != len(self.weights):
            raise InputError(
                f"embedding dimension {x.shape[1]} != model dimension {len(self.weights)}"
            )
        xs = (x - self.mean) / self.scale
        return xs @ self.weights + self.bias


def _to_signed(y, classes) -> np.ndarray:
    lookup = {classes[0]: -1.0, classes[1]: 1.0}
    return np.array([lookup[v] for v in y])


def train(X: np.ndarray, y, config: TrainConfig = TrainConfig()) -> LinearModel:
    """Fit the hinge-loss model; requires both classes present."""
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise InputError("X must be (n, m) with one label per row")
    n, m = X.shape
    if n < 2:
        raise InputError("need at least 2 training examples")
    classes = tuple(sorted(set(y)))
    if len(classes) != 2:
        raise InputError(f"need exactly 2 classes, got {classes}")
    ys = _to_signed(y, classes)

    if config.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
    else:
        mean = np.zeros(m)
        scale = np.ones(m)
    Xs = (X - mean) / scale

    lam = config.resolved_lam(n)
    rng = RngStream(config.seed, stream=0)
    w = np.zeros(m)
    b = 0.0
    t = 0
    order = np.arange(n)
    for _ in range(config.epochs):
        # Fisher-Yates shuffle from the deterministic stream
        for i in range(n - 1):
            j = i + int(rng.uniform() * (n - i))
            order[i], order[j] = order[j], order[i]
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            margin = ys[i] * (w @ Xs[i] + b)
            # the intercept shares the L2 shrink; otherwise the large
            # early steps of the 1/(lam t) schedule leave it with a
            # persistent offset that plain hinge updates decay too slowly
            w *= 1.0 - eta * lam
            b *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * ys[i] * Xs[i]
                b += eta * ys[i]
    return LinearModel(weights=w, bias=b, classes=classes, config=config,
                       mean=mean, scale=scale)


def predict(model: LinearModel, x: np.ndarray):
    """Labels for one embedding or a batch; exact-zero scores take classes[0]."""
    scores = model.decision_function(x)
    labels = [model.classes[1] if sc > 0 else model.classes[0] for sc in scores]
    if np.asarray(x).ndim == 1:
        return labels[0]
    return labels


def evaluate(model: LinearModel, X_test: np.ndarray, y_test) -> float:
    """Fraction of correct predictions on a nonempty test set."""
    y_test = list(y_test)
    if len(y_test) == 0:
        raise InputError("test set is empty")
    preds = predict(model, np.atleast_2d(X_test))
    return float(np.mean([p == t for p, t in zip(preds, y_test)]))


def save_model(model: LinearModel, path) -> None:
    """Text format: key=value header, then one CSV row of weights, then bias."""
    cfg = model.config
    lines = [
        f"classes={model.classes[0]},{model.classes[1]}",
        f"lam={'' if cfg.lam is None else repr(cfg.lam)}",
        f"epochs={cfg.epochs}",
        f"seed={cfg.seed}",
        f"standardize={int(cfg.standardize)}",
        "weights=" + ",".join(f"{w:.17g}" for w in model.weights),
        f"bias={model.bias:.17g}",
        "mean=" + ",".join(f"{v:.17g}" for v in model.mean),
        "scale=" + ",".join(f"{v:.17g}" for v in model.scale),
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> LinearModel:
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            fields[key] = val
    try:
        raw_classes = fields["classes"].split(",")
        classes = tuple(int(c) for c in raw_classes)
        cfg = TrainConfig(
            lam=float(fields["lam"]) if fields["lam"] else None,
            epochs=int(fields["epochs"]),
            seed=int(fields["seed"]),
            standardize=bool(int(fields["standardize"])),
        )
        weights = np.array([float(v) for v in fields["weights"].split(",")])
        bias = float(fields["bias"])
        mean = np.array([float(v) for v in fields["mean"].split(",")])
        scale = np.array([float(v) for v in fields["scale"].split(",")])
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed model file ({exc})")
    return LinearModel(weights=weights, bias=bias, classes=classes, config=cfg,
                       mean=mean, scale=scale)
