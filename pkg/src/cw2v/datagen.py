"""Seeded synthetic corpora built from the bundled English lexicon.

Provides sentence corpora for embedding training and binary-labeled
corpora where the positive class is marked by engagement-style trigger
words ("like", "share", ...), mirroring the structure of the downstream
classification task.
"""

from __future__ import annotations

from functools import lru_cache

from .util import data_path, derive_rng, read_lines

TRIGGER_WORDS = (
    "like",
    "share",
    "comment",
    "follow",
    "subscribe",
    "win",
    "free",
    "prize",
    "click",
    "offer",
)

TRIGGER_PHRASES = (
    "please like and share",
    "like comment and subscribe",
    "click the link to win",
    "share this post with a friend",
    "follow us for a free prize",
    "comment below and win big",
)


@lru_cache(maxsize=1)
def load_lexicon() -> tuple[str, ...]:
    """The bundled common-word lexicon (lowercase, one word per line)."""
    words = [w for w in read_lines(data_path("lexicon.txt")) if w and not w.startswith("#")]
    return tuple(words)


def _zipf_weights(count: int, exponent: float = 1.1) -> list[float]:
    return [1.0 / (rank**exponent) for rank in range(1, count + 1)]


def make_sentences(
    n_sentences: int,
    seed: int = 0,
    lexicon: tuple[str, ...] | None = None,
    min_len: int = 4,
    max_len: int = 12,
) -> list[str]:
    """Random sentences with Zipf-distributed word choice over the lexicon."""
    if lexicon is None:
        lexicon = load_lexicon()
    rng = derive_rng(seed, "sentences")
    weights = _zipf_weights(len(lexicon))
    sentences = []
    for _ in range(n_sentences):
        length = rng.randint(min_len, max_len)
        words = rng.choices(lexicon, weights=weights, k=length)
        sentences.append(" ".join(words))
    return sentences


def make_labeled_corpus(
    n_docs: int,
    seed: int = 0,
    positive_fraction: float = 0.5,
    lexicon: tuple[str, ...] | None = None,
    min_len: int = 5,
    max_len: int = 14,
) -> list[tuple[str, int]]:
    """Labeled documents: positives contain trigger words/phrases, negatives
    are trigger-free filler text.  Returns (text, label) pairs."""
    if lexicon is None:
        lexicon = load_lexicon()
    trigger_set = set(TRIGGER_WORDS)
    filler = tuple(w for w in lexicon if w not in trigger_set)
    weights = _zipf_weights(len(filler))
    rng = derive_rng(seed, "labeled")
    n_pos = round(n_docs * positive_fraction)
    items = []
    for i in range(n_docs):
        label = 1 if i < n_pos else 0
        length = rng.randint(min_len, max_len)
        words = rng.choices(filler, weights=weights, k=length)
        if label == 1:
            if rng.random() < 0.5:
                phrase = rng.choice(TRIGGER_PHRASES).split()
                at = rng.randint(0, len(words))
                words[at:at] = phrase
            else:
                for _ in range(rng.randint(1, 3)):
                    words.insert(rng.randint(0, len(words)), rng.choice(TRIGGER_WORDS))
        items.append((" ".join(words), label))
    rng.shuffle(items)
    return items


def write_sentence_corpus(path, n_sentences: int, seed: int = 0) -> None:
    sentences = make_sentences(n_sentences, seed=seed)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(sentences) + "\n")


def write_labeled_corpus(path, n_docs: int, seed: int = 0) -> None:
    items = make_labeled_corpus(n_docs, seed=seed)
    with open(path, "w", encoding="utf-8") as fh:
        for text, label in items:
            fh.write(f"{label}\t{text}\n")
