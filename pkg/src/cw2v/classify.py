"""Downstream binary classification: embedding-average features, a small
from-scratch logistic regression, and rank-based AUC."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .embedding import CW2VModel, embed
from .tokenizer import TokenizedDoc

LOGREG_FORMAT = "cw2v-logreg"
LOGREG_VERSION = 1


@dataclass(frozen=True)
class LabeledCorpus:
    """Binary-labeled documents: list of (text, label) with labels in {0, 1}."""

    items: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        for text, label in self.items:
            if label not in (0, 1):
                raise ValueError(f"label must be 0 or 1, got {label!r} for {text[:40]!r}")

    def __len__(self) -> int:
        return len(self.items)

    def texts(self) -> list[str]:
        return [text for text, _ in self.items]

    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.items], dtype=np.int64)


def load_labeled(path: str | Path) -> LabeledCorpus:
    """Read a `<label>\\t<text>` file, one example per line."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            label_str, sep, text = line.partition("\t")
            if not sep or label_str not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: expected '<0|1><TAB><text>', got {line[:60]!r}")
            items.append((text, int(label_str)))
    return LabeledCorpus(items=tuple(items))


@dataclass
class LogRegModel:
    """L2-regularized logistic regression parameters plus training metadata."""

    weights: np.ndarray
    bias: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias)):
            raise ValueError("logistic regression parameters must be finite")


def featurize(doc: TokenizedDoc | Sequence[str], model: CW2VModel) -> np.ndarray:
    """Element-wise mean of the token embeddings; zero vector for an empty
    document (perturbation + defense can annihilate short documents)."""
    tokens = doc.tokens if isinstance(doc, TokenizedDoc) else tuple(doc)
    if not tokens:
        return np.zeros(model.dim, dtype=np.float64)
    return np.mean([embed(t, model) for t in tokens], axis=0)


def train_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    l2_strength: float = 1e-4,
    epochs: int = 500,
    lr: float = 0.1,
    seed: int = 0,
) -> LogRegModel:
    """Full-batch gradient descent on the L2-regularized logistic loss.

    Parameters start at zero, so the run is deterministic; ``seed`` is
    recorded for provenance.  The bias is not regularized.  ``epochs=0``
    returns the zero model (every score 0.5).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("features must be 2-D with one row per label")
    if epochs < 0 or lr <= 0 or l2_strength < 0:
        raise ValueError("epochs ≥ 0, lr > 0 and l2_strength ≥ 0 required")
    classes = np.unique(y)
    if not np.isin(classes, (0.0, 1.0)).all():
        raise ValueError("labels must be binary 0/1")
    if classes.size < 2:
        raise ValueError("training requires at least one example of each class")
    m = x.shape[0]
    weights = np.zeros(x.shape[1], dtype=np.float64)
    bias = 0.0
    for _ in range(epochs):
        residual = expit(x @ weights + bias) - y
        grad_w = x.T @ residual / m + l2_strength * weights
        grad_b = float(residual.mean())
        weights -= lr * grad_w
        bias -= lr * grad_b
    return LogRegModel(
        weights=weights,
        bias=bias,
        meta={"epochs": epochs, "l2_strength": l2_strength, "lr": lr, "seed": seed},
    )


def predict_proba(model: LogRegModel, features: np.ndarray) -> np.ndarray:
    """P(label=1) per row."""
    x = np.asarray(features, dtype=np.float64)
    return expit(x @ model.weights + model.bias)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann–Whitney AUC: probability a positive outscores a negative, with
    average rank for ties."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1 or s.size == 0:
        raise ValueError("scores and labels must be equal-length 1-D sequences")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes present")
    ranks = rankdata(s, method="average")
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def save_logreg(model: LogRegModel, path: str | Path) -> None:
    payload = {
        "format": LOGREG_FORMAT,
        "version": LOGREG_VERSION,
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "meta": model.meta,
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def load_logreg(path: str | Path) -> LogRegModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a valid classifier file: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != LOGREG_FORMAT:
        raise ValueError(f"{path}: missing or wrong format marker")
    if payload.get("version") != LOGREG_VERSION:
        raise ValueError(f"{path}: unsupported classifier version")
    return LogRegModel(
        weights=np.array(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
        meta=payload.get("meta", {}),
    )
