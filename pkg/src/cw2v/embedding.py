"""Spelling vectors and the two-matrix skip-gram-style trainer.

A word's spelling vector holds its str_sim similarity to each word of the
spelling index; the trainer learns an n×h input matrix and an h×n output
matrix so that sum-normalized spelling vectors of co-occurring words predict
each other.  The embedding of any word — in-vocabulary or not — is its raw
spelling vector times the input matrix.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .strmetrics import str_sim
from .tokenizer import TokenizedDoc
from .util import derive_seed
from .vocab import SpellingIndex, build_vocab, subsample_keep_probability

MODEL_FORMAT = "cw2v-model"
MODEL_VERSION = 1

LOSSES = ("cross_entropy", "mse")


class ModelFormatError(ValueError):
    """Raised when a model file cannot be loaded."""


@dataclass
class Hyperparams:
    """Training hyperparameters; ``seed`` drives init, shuffling and
    subsampling."""

    rho: float = 0.005
    h: int = 200
    window: int = 2
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 50
    patience: int = 3
    subsample_t: float = 1e-3
    subsample_mode: Literal["standard", "literal"] = "standard"
    loss: Literal["cross_entropy", "mse"] = "cross_entropy"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if self.h < 1:
            raise ValueError("hidden size h must be ≥ 1")
        if self.window < 1:
            raise ValueError("window must be ≥ 1")
        if self.patience < 1:
            raise ValueError("patience must be ≥ 1")
        if self.subsample_t <= 0:
            raise ValueError("subsample_t must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be ≥ 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be ≥ 1")
        if self.subsample_mode not in ("standard", "literal"):
            raise ValueError(f"unknown subsample_mode {self.subsample_mode!r}")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass
class CW2VModel:
    """A trained spelling-vector embedding model."""

    index: SpellingIndex
    w_in: np.ndarray  # n × h
    w_out: np.ndarray  # h × n
    hyper: Hyperparams
    meta: dict = field(default_factory=dict, repr=False, compare=False)
    _embed_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        n, h = len(self.index), self.hyper.h
        self.w_in = np.asarray(self.w_in, dtype=np.float64)
        self.w_out = np.asarray(self.w_out, dtype=np.float64)
        if self.w_in.shape != (n, h):
            raise ValueError(f"w_in shape {self.w_in.shape} != ({n}, {h})")
        if self.w_out.shape != (h, n):
            raise ValueError(f"w_out shape {self.w_out.shape} != ({h}, {n})")
        if not (np.isfinite(self.w_in).all() and np.isfinite(self.w_out).all()):
            raise ValueError("model matrices contain non-finite entries")

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def dim(self) -> int:
        return self.hyper.h


def spelling_vector(word: str, index: SpellingIndex) -> np.ndarray:
    """str_sim of ``word`` against every index word, in index order."""
    if not word:
        raise ValueError("cannot compute a spelling vector for an empty word")
    return np.array([str_sim(iw, word) for iw in index.words], dtype=np.float64)


def _sum_normalize(matrix: np.ndarray) -> np.ndarray:
    return matrix / matrix.sum(axis=1, keepdims=True)


def _forward_backward(
    x: np.ndarray,
    y: np.ndarray,
    w_in: np.ndarray,
    w_out: np.ndarray,
    loss: str = "cross_entropy",
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean batch loss and its gradients w.r.t. both matrices.

    ``x`` and ``y`` are batches of sum-normalized spelling vectors (B×n);
    the forward pass is hidden = x·W_in, probs = softmax(hidden·W_out).
    """
    batch = x.shape[0]
    hidden = x @ w_in
    logits = hidden @ w_out
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    probs = np.exp(log_probs)
    if loss == "cross_entropy":
        loss_value = float(-(y * log_probs).sum(axis=1).mean())
        d_logits = (probs - y) / batch
    elif loss == "mse":
        diff = probs - y
        loss_value = float((diff**2).mean(axis=1).mean())
        d_probs = 2.0 * diff / y.shape[1]
        # Softmax Jacobian-vector product, row-wise.
        d_logits = probs * (d_probs - (d_probs * probs).sum(axis=1, keepdims=True))
        d_logits /= batch
    else:
        raise ValueError(f"unknown loss {loss!r}")
    grad_w_out = hidden.T @ d_logits
    d_hidden = d_logits @ w_out.T
    grad_w_in = x.T @ d_hidden
    return loss_value, grad_w_in, grad_w_out


def _training_pairs(
    docs: Sequence[tuple[str, ...]],
    word_id: dict[str, int],
    keep_prob: np.ndarray,
    hyper: Hyperparams,
) -> tuple[np.ndarray, np.ndarray]:
    """Subsample word occurrences, then emit all ordered (center, context)
    id pairs within the window."""
    rng = np.random.default_rng(derive_seed(hyper.seed, "subsample"))
    centers: list[int] = []
    contexts: list[int] = []
    for tokens in docs:
        ids = [word_id[t] for t in tokens]
        kept = [i for i in ids if rng.random() < keep_prob[i]]
        for pos, center in enumerate(kept):
            lo = max(0, pos - hyper.window)
            hi = min(len(kept), pos + hyper.window + 1)
            for j in range(lo, hi):
                if j != pos:
                    centers.append(center)
                    contexts.append(kept[j])
    return np.array(centers, dtype=np.intp), np.array(contexts, dtype=np.intp)


def train(
    corpus: Iterable[TokenizedDoc | Sequence[str]],
    index: SpellingIndex,
    hyper: Hyperparams | None = None,
) -> CW2VModel:
    """Train the two matrices by mini-batch SGD on (center, context) pairs.

    Inputs and targets are sum-normalized spelling vectors; the loss is
    softmax cross-entropy against the target distribution (or MSE when
    configured).  Stops at ``max_epochs`` or once the epoch loss has not
    reached a new minimum for ``patience`` consecutive epochs.
    """
    if hyper is None:
        hyper = Hyperparams()
    docs = [tuple(d.tokens) if isinstance(d, TokenizedDoc) else tuple(d) for d in corpus]
    vocab = build_vocab(docs, min_count=1)
    words = sorted({t for doc in docs for t in doc})
    word_id = {w: i for i, w in enumerate(words)}

    spelling = np.array([spelling_vector(w, index) for w in words], dtype=np.float64)
    spelling = _sum_normalize(spelling)
    keep_prob = np.array(
        [
            subsample_keep_probability(w, vocab, hyper.subsample_t, hyper.subsample_mode)
            for w in words
        ],
        dtype=np.float64,
    )

    centers, contexts = _training_pairs(docs, word_id, keep_prob, hyper)
    if centers.size == 0:
        raise ValueError(
            "no training pairs: corpus too small, window too narrow, "
            "or subsampling removed every word"
        )

    n, h = len(index), hyper.h
    init_rng = np.random.default_rng(derive_seed(hyper.seed, "init"))
    bound = 0.5 / h
    w_in = init_rng.uniform(-bound, bound, size=(n, h))
    w_out = init_rng.uniform(-bound, bound, size=(h, n))

    n_pairs = centers.size
    best_loss = np.inf
    stale_epochs = 0
    epoch_losses: list[float] = []
    for epoch in range(hyper.max_epochs):
        order = np.random.default_rng(derive_seed(hyper.seed, "shuffle", epoch)).permutation(
            n_pairs
        )
        total = 0.0
        for start in range(0, n_pairs, hyper.batch_size):
            batch = order[start : start + hyper.batch_size]
            x = spelling[centers[batch]]
            y = spelling[contexts[batch]]
            loss_value, grad_in, grad_out = _forward_backward(x, y, w_in, w_out, hyper.loss)
            if not np.isfinite(loss_value):
                raise RuntimeError(
                    f"non-finite training loss at epoch {epoch}, batch {start // hyper.batch_size}"
                )
            w_in -= hyper.learning_rate * grad_in
            w_out -= hyper.learning_rate * grad_out
            total += loss_value * batch.size
        epoch_loss = total / n_pairs
        epoch_losses.append(epoch_loss)
        if epoch_loss < best_loss:
            best_loss = epoch_loss
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= hyper.patience:
                break
    meta = {"epoch_losses": epoch_losses, "n_pairs": int(n_pairs)}
    return CW2VModel(index=index, w_in=w_in, w_out=w_out, hyper=hyper, meta=meta)


def embed(word: str, model: CW2VModel) -> np.ndarray:
    """Embedding of any word: its raw spelling vector times the input matrix.

    Total over all non-empty words; out-of-vocabulary words work by
    construction.
    """
    if not word:
        raise ValueError("cannot embed an empty word")
    cached = model._embed_cache.get(word)
    if cached is None:
        cached = spelling_vector(word, model.index) @ model.w_in
        model._embed_cache[word] = cached
    return cached


def embed_fragments(fragments: Sequence[str], model: CW2VModel) -> np.ndarray:
    """Element-wise mean of the fragment embeddings."""
    if not fragments:
        raise ValueError("embed_fragments requires at least one fragment")
    return np.mean([embed(f, model) for f in fragments], axis=0)


def nearest_words(
    word: str, model: CW2VModel, candidates: Iterable[str], k: int = 10
) -> list[tuple[str, float]]:
    """Top-k candidates by cosine similarity to ``word``'s embedding."""
    target = embed(word, model)
    tn = np.linalg.norm(target)
    scored = []
    for cand in candidates:
        if cand == word:
            continue
        vec = embed(cand, model)
        denom = tn * np.linalg.norm(vec)
        score = float(vec @ target / denom) if denom > 0 else 0.0
        scored.append((cand, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def save_model(model: CW2VModel, path: str | Path) -> None:
    """Serialize the model as JSON with full float64 precision."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "hyper": asdict(model.hyper),
        "index": {
            "words": list(model.index.words),
            "provenance": model.index.provenance,
        },
        "w_in": model.w_in.tolist(),
        "w_out": model.w_out.tolist(),
        "meta": model.meta,
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def load_model(path: str | Path) -> CW2VModel:
    """Load a model saved by :func:`save_model`; bit-exact round-trip."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a valid model file: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: missing or wrong format marker")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported version {payload.get('version')!r}, expected {MODEL_VERSION}"
        )
    try:
        hyper = Hyperparams(**payload["hyper"])
        index = SpellingIndex(
            words=tuple(payload["index"]["words"]),
            provenance=payload["index"].get("provenance", {}),
        )
        w_in = np.array(payload["w_in"], dtype=np.float64)
        w_out = np.array(payload["w_out"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed model payload: {exc}") from None
    try:
        return CW2VModel(
            index=index, w_in=w_in, w_out=w_out, hyper=hyper, meta=payload.get("meta", {})
        )
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
