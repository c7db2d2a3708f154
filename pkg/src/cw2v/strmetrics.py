"""String similarity primitives: Levenshtein distance, the normalized
distance used for clustering, the spelling-similarity score, and
bag-of-characters keys."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class WordPair:
    """An unordered pair of non-empty words."""

    a: str
    b: str

    def __post_init__(self) -> None:
        if not self.a or not self.b:
            raise ValueError("words in a WordPair must be non-empty")


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit costs) over code points.

    Two-row dynamic program; common prefixes and suffixes are stripped first
    so near-identical words cost close to O(1).
    """
    if a == b:
        return 0
    # Strip common prefix/suffix; they never change the distance.
    i = 0
    while i < len(a) and i < len(b) and a[i] == b[i]:
        i += 1
    j = 0
    while j < len(a) - i and j < len(b) - i and a[len(a) - 1 - j] == b[len(b) - 1 - j]:
        j += 1
    a = a[i : len(a) - j]
    b = b[i : len(b) - j]
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) > len(b):
        a, b = b, a
    prev = list(range(len(a) + 1))
    for r, cb in enumerate(b, start=1):
        cur = [r] + [0] * len(a)
        for c, ca in enumerate(a, start=1):
            cur[c] = min(
                prev[c] + 1,  # deletion
                cur[c - 1] + 1,  # insertion
                prev[c - 1] + (ca != cb),  # substitution
            )
        prev = cur
    return prev[-1]


def norm_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the length of the shorter word.

    Used as the clustering metric; identical words are at distance 0.
    """
    if not a or not b:
        raise ValueError("norm_distance requires non-empty words")
    if a == b:
        return 0.0
    return levenshtein(a, b) / min(len(a), len(b))


def str_sim(a: str, b: str) -> float:
    """Spelling similarity between two words.

    Equal words score ``2 * min(len(a), len(b))``; unequal words score
    ``min(len(a), len(b)) / levenshtein(a, b)``.  Always positive, so a
    vector of similarities can be sum-normalized into a distribution.
    """
    if not a or not b:
        raise ValueError("str_sim requires non-empty words")
    m = min(len(a), len(b))
    if a == b:
        return 2.0 * m
    return m / levenshtein(a, b)


def bag_of_chars(word: str) -> Counter:
    """The multiset of characters in ``word`` (empty word → empty multiset)."""
    return Counter(word)


def bag_key(word: str) -> str:
    """Canonical serialized form of the character multiset: sorted chars.

    Words are bag-collisions of each other iff their keys are equal.
    """
    return "".join(sorted(word))
