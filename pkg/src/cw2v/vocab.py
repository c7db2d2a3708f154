"""Vocabulary statistics, frequency subsampling, and selection of the
spelling index by agglomerative clustering under normalized edit distance."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.cluster.hierarchy import linkage

from .strmetrics import norm_distance
from .tokenizer import TokenizedDoc
from .util import derive_rng

INDEX_FORMAT = "cw2v-index"
INDEX_VERSION = 1

SUBSAMPLE_MODES = ("standard", "literal")


@dataclass(frozen=True)
class Vocabulary:
    """Word counts and relative frequencies of a tokenized corpus."""

    counts: dict[str, int]
    freqs: dict[str, float]
    total_count: int

    def __contains__(self, word: str) -> bool:
        return word in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def freq(self, word: str) -> float:
        if word not in self.freqs:
            raise ValueError(f"word {word!r} not in vocabulary")
        return self.freqs[word]

    def most_common(self, k: int | None = None) -> list[str]:
        """Words sorted by descending count, ties lexicographic."""
        ordered = sorted(self.counts, key=lambda w: (-self.counts[w], w))
        return ordered if k is None else ordered[:k]


@dataclass(frozen=True)
class SpellingIndex:
    """The ordered n-word subset of the vocabulary that spelling vectors are
    measured against.  Order is fixed at creation and persisted with models."""

    words: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("spelling index must contain at least one word")
        if any(not w for w in self.words):
            raise ValueError("spelling index words must be non-empty")
        if len(set(self.words)) != len(self.words):
            raise ValueError("spelling index words must be distinct")

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def build_vocab(docs: Iterable[TokenizedDoc | Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Count tokens, drop words seen fewer than ``min_count`` times, and
    renormalize frequencies over the retained multiset."""
    counts: Counter[str] = Counter()
    n_docs = 0
    for doc in docs:
        n_docs += 1
        tokens = doc.tokens if isinstance(doc, TokenizedDoc) else doc
        counts.update(tokens)
    if n_docs == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = {w: c for w, c in counts.items() if c >= min_count}
    if not kept:
        raise ValueError(f"no word occurs at least min_count={min_count} times")
    total = sum(kept.values())
    freqs = {w: c / total for w, c in kept.items()}
    return Vocabulary(counts=kept, freqs=freqs, total_count=total)


def subsample_keep_probability(
    word: str,
    vocab: Vocabulary,
    t: float,
    mode: Literal["standard", "literal"] = "standard",
) -> float:
    """Probability of keeping an occurrence of ``word`` during training-pair
    selection.

    ``standard`` is the keep-probability form of the classic frequent-word
    subsampling rule, clamp(sqrt(t / f(w)), 0, 1): frequent words are kept
    less often.  ``literal`` is the complementary form clamp(1 − sqrt(t /
    f(w)), 0, 1), which instead suppresses rare words; it is shipped for
    ablation because both directions appear in the literature.
    """
    if t <= 0:
        raise ValueError("subsampling threshold t must be > 0")
    if mode not in SUBSAMPLE_MODES:
        raise ValueError(f"unknown subsampling mode {mode!r}")
    ratio = math.sqrt(t / vocab.freq(word))
    if mode == "standard":
        return min(1.0, ratio)
    return min(1.0, max(0.0, 1.0 - ratio))


def index_size(vocab_size: int, rho: float) -> int:
    """Index size n = round(rho · |V|)."""
    return int(round(rho * vocab_size))


def pairwise_norm_distances(words: Sequence[str]) -> np.ndarray:
    """Condensed distance matrix (scipy order) of norm_distance over words."""
    out = np.empty(len(words) * (len(words) - 1) // 2, dtype=np.float64)
    for k, (a, b) in enumerate(combinations(words, 2)):
        out[k] = norm_distance(a, b)
    return out


def _cut_linkage(merges: np.ndarray, n_leaves: int, n_clusters: int) -> list[list[int]]:
    """Replay the first ``n_leaves - n_clusters`` merges, returning exactly
    ``n_clusters`` clusters of leaf indices.

    Cutting by replay (rather than by distance threshold) guarantees the
    requested cluster count even when merge heights tie.
    """
    clusters: dict[int, list[int]] = {i: [i] for i in range(n_leaves)}
    for step in range(n_leaves - n_clusters):
        a, b = int(merges[step, 0]), int(merges[step, 1])
        clusters[n_leaves + step] = clusters.pop(a) + clusters.pop(b)
    return list(clusters.values())


def _partition_indices(words: Sequence[str], n: int) -> tuple[list[list[int]], np.ndarray | None]:
    """Average-linkage partition of ``words`` into exactly ``n`` clusters of
    indices; also returns the condensed distance matrix (None when trivial)."""
    if n == len(words):
        return [[i] for i in range(len(words))], None
    dist = pairwise_norm_distances(words)
    merges = linkage(dist, method="average")
    return _cut_linkage(merges, len(words), n), dist


def cluster_partition(words: Sequence[str], n: int) -> list[list[str]]:
    """Partition ``words`` into ``n`` spelling clusters (average linkage over
    norm_distance).  Clusters are sorted by their smallest member, members
    sorted within each cluster."""
    if not 1 <= n <= len(words):
        raise ValueError(f"cannot partition {len(words)} words into {n} clusters")
    clusters, _ = _partition_indices(words, n)
    named = [sorted(words[i] for i in members) for members in clusters]
    return sorted(named, key=lambda members: members[0])


def cluster_index(
    vocab: Vocabulary,
    n: int,
    seed: int = 0,
    pick: Literal["random", "medoid"] = "random",
    max_cluster_words: int = 20000,
) -> SpellingIndex:
    """Average-linkage agglomerative clustering of the most frequent words
    under norm_distance, cut at exactly ``n`` clusters, one representative
    per cluster.

    ``pick="random"`` draws the representative with the seeded RNG;
    ``pick="medoid"`` takes the word with minimal summed intra-cluster
    distance (ties broken lexicographically).  The index is ordered by
    descending cluster size, ties by representative.
    """
    if pick not in ("random", "medoid"):
        raise ValueError(f"unknown representative picker {pick!r}")
    candidates = vocab.most_common(max_cluster_words)
    if n < 1:
        raise ValueError("index size must be ≥ 1 (increase rho or the vocabulary)")
    if n > len(candidates):
        raise ValueError(
            f"cannot build an index of {n} words from {len(candidates)} candidates"
        )

    clusters, dist = _partition_indices(candidates, n)

    def pair_distance(i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        m = len(candidates)
        return float(dist[m * i + j - ((i + 2) * (i + 1)) // 2])

    # Deterministic cluster order for RNG consumption: by smallest member word.
    clusters = sorted(clusters, key=lambda c: min(candidates[i] for i in c))
    reps: list[tuple[int, str]] = []  # (cluster size, representative word)
    rng = derive_rng(seed, "pick-representative")
    for members in clusters:
        words = sorted(candidates[i] for i in members)
        if pick == "random":
            rep = rng.choice(words)
        else:
            sums = {
                candidates[i]: sum(pair_distance(i, j) for j in members if j != i)
                for i in members
            }
            rep = min(words, key=lambda w: (sums[w], w))
        reps.append((len(members), rep))

    reps.sort(key=lambda item: (-item[0], item[1]))
    return SpellingIndex(
        words=tuple(rep for _, rep in reps),
        provenance={
            "n": n,
            "seed": seed,
            "pick": pick,
            "linkage": "average",
            "max_cluster_words": max_cluster_words,
            "candidates": len(candidates),
            "vocab_size": len(vocab),
        },
    )


def save_index(index: SpellingIndex, path: str | Path) -> None:
    """Persist a standalone spelling index artifact."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "words": list(index.words),
        "provenance": index.provenance,
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def load_index(path: str | Path) -> SpellingIndex:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a valid index file: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != INDEX_FORMAT:
        raise ValueError(f"{path}: missing or wrong format marker")
    if payload.get("version") != INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index version")
    return SpellingIndex(words=tuple(payload["words"]), provenance=payload.get("provenance", {}))
