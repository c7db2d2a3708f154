"""The ten adversarial word perturbations, individually and as a
randomized document attack.

Every perturbation is a pure function of (word, kind, config): the RNG is
derived from the config seed, the kind and the word, so repeated calls are
reproducible and document perturbation parallelizes per word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from random import Random
from typing import Mapping

from . import defense
from .util import data_path, derive_rng, derive_seed

ZERO_WIDTH_NON_JOINER = "‌"

_TOKEN_RE = re.compile(r"\S+|\s+")


class PerturbationKind(str, Enum):
    """The closed set of ten word-level attacks."""

    COMBINED_UNICODE = "combined-unicode"
    FAKE_PUNCTUATION = "fake-punctuation"
    NEIGHBORING_KEY = "neighboring-key"
    RANDOM_SPACES = "random-spaces"
    REPLACE_UNICODE = "replace-unicode"
    SPACE_SEPARATION = "space-separation"
    TANDEM_CHARACTER = "tandem-character"
    TRANSPOSITION = "transposition"
    VOWEL_REP_DEL = "vowel-rep-del"
    ZERO_WIDTH_SEPARATION = "zero-width-separation"


ALL_KINDS: tuple[PerturbationKind, ...] = tuple(PerturbationKind)

# Which defense family recovers each attack: the separator attacks are undone
# by ACD, the look-alike attacks by UC, and the rest must be absorbed by the
# embedding itself.
DEFENSE_FAMILY: dict[PerturbationKind, str] = {
    PerturbationKind.COMBINED_UNICODE: "acd",
    PerturbationKind.SPACE_SEPARATION: "acd",
    PerturbationKind.ZERO_WIDTH_SEPARATION: "acd",
    PerturbationKind.REPLACE_UNICODE: "uc",
    PerturbationKind.TANDEM_CHARACTER: "uc",
    PerturbationKind.FAKE_PUNCTUATION: "cw2v",
    PerturbationKind.NEIGHBORING_KEY: "cw2v",
    PerturbationKind.RANDOM_SPACES: "cw2v",
    PerturbationKind.TRANSPOSITION: "cw2v",
    PerturbationKind.VOWEL_REP_DEL: "cw2v",
}


def _symmetric_closure(layout: Mapping[str, tuple[str, ...]]) -> dict[str, tuple[str, ...]]:
    closed: dict[str, set[str]] = {k: set(v) for k, v in layout.items()}
    for key, neighbors in layout.items():
        for n in neighbors:
            closed.setdefault(n, set()).add(key)
    return {k: tuple(sorted(v)) for k, v in sorted(closed.items())}


@lru_cache(maxsize=1)
def _keyboard_cached() -> dict[str, tuple[str, ...]]:
    layout: dict[str, tuple[str, ...]] = {}
    with open(data_path("qwerty_neighbors.tsv"), encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, _, neighbors = line.partition("\t")
            layout[key] = tuple(neighbors)
    return _symmetric_closure(layout)


def default_keyboard_layout() -> dict[str, tuple[str, ...]]:
    """QWERTY adjacency (8-neighborhood on the physical grid), lowercase."""
    return dict(_keyboard_cached())


@lru_cache(maxsize=1)
def _lookalike_cached() -> dict[str, tuple[str, ...]]:
    # Invert the UC map restricted to single-char source and target, so every
    # look-alike this attack inserts is within UC's defense coverage.
    table: dict[str, list[str]] = {}
    for src, tgt in defense.default_confusables().entries.items():
        if len(src) == 1 and len(tgt) == 1:
            table.setdefault(tgt, []).append(src)
    return {tgt: tuple(srcs) for tgt, srcs in table.items()}


def default_lookalike_map() -> dict[str, tuple[str, ...]]:
    """Character → Unicode look-alikes, inverted from the bundled UC map."""
    return dict(_lookalike_cached())


@lru_cache(maxsize=1)
def _tandem_attack_cached() -> dict[str, str]:
    # Only use renderings that no other canonicalization source extends
    # (self-delimiting): the defense scans greedily for the longest source,
    # so a rendering like "\/" (v) would be swallowed by "\/\/" (w) whenever
    # two of them touch.  Targets with no safe rendering are left unattacked.
    sources = tuple(defense.default_confusables().entries)
    table: dict[str, str] = {}
    for src, tgt in defense.default_confusables().entries.items():
        if len(src) < 2 or len(tgt) != 1 or tgt in table:
            continue
        if any(other != src and other.startswith(src) for other in sources):
            continue
        table[tgt] = src
    # The leet sequences read the same in either case, so cover lowercase
    # letters too; the canonical form stays whatever the map file records.
    for tgt, src in list(table.items()):
        folded = tgt.lower()
        if folded != tgt and folded not in table:
            table[folded] = src
    return table


def default_tandem_map() -> dict[str, str]:
    """Character → multi-character look-alike sequence (first bundled entry)."""
    return dict(_tandem_attack_cached())


@dataclass
class PerturbationConfig:
    """Parameters of the ten attacks; every randomized choice flows from
    ``rng_seed``."""

    rng_seed: int = 0
    insertion_char: str = "."
    punctuation_set: str = ".,!?"
    max_inserts_per_gap: int = 1
    per_char_probability: float = 0.3
    keyboard_layout: Mapping[str, tuple[str, ...]] = field(default_factory=default_keyboard_layout)
    lookalike_map: Mapping[str, tuple[str, ...]] = field(default_factory=default_lookalike_map)
    tandem_map: Mapping[str, str] = field(default_factory=default_tandem_map)
    vowel_set: str = "aeiou"

    def __post_init__(self) -> None:
        if not 0.0 <= self.per_char_probability <= 1.0:
            raise ValueError("per_char_probability must be in [0, 1]")
        if self.max_inserts_per_gap < 1:
            raise ValueError("max_inserts_per_gap must be ≥ 1")
        if len(self.insertion_char) != 1:
            raise ValueError("insertion_char must be a single code point")
        for tgt, seq in self.tandem_map.items():
            if len(seq) < 2:
                raise ValueError(f"tandem sequence for {tgt!r} must have length ≥ 2")
        self.keyboard_layout = _symmetric_closure(self.keyboard_layout)


def _combined_unicode(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    return cfg.insertion_char.join(word)


def _space_separation(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    return " ".join(word)


def _zero_width_separation(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    return ZERO_WIDTH_NON_JOINER.join(word)


def _insert_in_gaps(word: str, rng: Random, cfg: PerturbationConfig, charset: str) -> str:
    out = [word[0]]
    for ch in word[1:]:
        if rng.random() < cfg.per_char_probability:
            count = rng.randint(1, cfg.max_inserts_per_gap)
            out.append("".join(rng.choice(charset) for _ in range(count)))
        out.append(ch)
    return "".join(out)


def _fake_punctuation(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    return _insert_in_gaps(word, rng, cfg, cfg.punctuation_set)


def _random_spaces(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    return _insert_in_gaps(word, rng, cfg, " ")


def _neighboring_key(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    out = []
    for ch in word:
        neighbors = cfg.keyboard_layout.get(ch)
        if neighbors and rng.random() < cfg.per_char_probability:
            out.append(rng.choice(neighbors))
        else:
            out.append(ch)
    return "".join(out)


def _replace_unicode(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    out = []
    for ch in word:
        alternatives = cfg.lookalike_map.get(ch)
        if alternatives and rng.random() < cfg.per_char_probability:
            out.append(rng.choice(alternatives))
        else:
            out.append(ch)
    return "".join(out)


def _tandem_character(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    out = []
    for ch in word:
        seq = cfg.tandem_map.get(ch)
        if seq and rng.random() < cfg.per_char_probability:
            out.append(seq)
        else:
            out.append(ch)
    return "".join(out)


def _transposition(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    chars = list(word)
    for i in range(0, len(chars) - 1, 2):
        if rng.random() < cfg.per_char_probability:
            chars[i], chars[i + 1] = chars[i + 1], chars[i]
    return "".join(chars)


def _vowel_rep_del(word: str, rng: Random, cfg: PerturbationConfig) -> str:
    out = []
    for ch in word:
        if ch in cfg.vowel_set and rng.random() < cfg.per_char_probability:
            if rng.random() < 0.5:
                out.append(ch + ch)  # repetition
            # else deletion: emit nothing
        else:
            out.append(ch)
    return "".join(out)


_DISPATCH = {
    PerturbationKind.COMBINED_UNICODE: _combined_unicode,
    PerturbationKind.FAKE_PUNCTUATION: _fake_punctuation,
    PerturbationKind.NEIGHBORING_KEY: _neighboring_key,
    PerturbationKind.RANDOM_SPACES: _random_spaces,
    PerturbationKind.REPLACE_UNICODE: _replace_unicode,
    PerturbationKind.SPACE_SEPARATION: _space_separation,
    PerturbationKind.TANDEM_CHARACTER: _tandem_character,
    PerturbationKind.TRANSPOSITION: _transposition,
    PerturbationKind.VOWEL_REP_DEL: _vowel_rep_del,
    PerturbationKind.ZERO_WIDTH_SEPARATION: _zero_width_separation,
}


def perturb_word(word: str, kind: PerturbationKind, config: PerturbationConfig | None = None) -> str:
    """Attack a single word.  Deterministic given (word, kind, config)."""
    if not word:
        raise ValueError("cannot perturb an empty word")
    if config is None:
        config = PerturbationConfig()
    rng = derive_rng(config.rng_seed, kind.value, word)
    return _DISPATCH[PerturbationKind(kind)](word, rng, config)


def perturb_document(
    text: str,
    config: PerturbationConfig | None = None,
    kind: PerturbationKind | None = None,
) -> str:
    """Attack every whitespace-delimited word of length > 2 in ``text``.

    ``kind=None`` draws a uniformly random kind per word; otherwise the fixed
    kind is applied.  Words of length ≤ 2 and all whitespace pass through
    verbatim.  Per-word RNGs are derived from (seed, word position), so the
    result is deterministic and independent of processing order.
    """
    if config is None:
        config = PerturbationConfig()
    out = []
    word_pos = 0
    for token in _TOKEN_RE.findall(text):
        if token.isspace():
            out.append(token)
            continue
        if len(token) > 2:
            chosen = kind
            if chosen is None:
                chosen = derive_rng(config.rng_seed, "kind", word_pos).choice(ALL_KINDS)
            word_cfg = replace(config, rng_seed=derive_seed(config.rng_seed, "doc", word_pos))
            out.append(perturb_word(token, chosen, word_cfg))
        else:
            out.append(token)
        word_pos += 1
    return "".join(out)
