"""Rule-based deobfuscation: the Alternating Characters Defense (ACD) and
Unicode Canonicalization (UC).

ACD undoes separator-insertion attacks (spaces, zero-width characters,
repeated punctuation between letters); UC rewrites Unicode look-alike
characters and multi-character "tandem" sequences to their plain
equivalents via a validated replacement map.
"""

from __future__ import annotations

import re
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .util import data_path

# Zero-width code points stripped by ACD step 0.  U+200C is the separator
# used by the zero-width attack; the others are common invisible companions.
ZERO_WIDTH_CHARS = "​‌‍﻿"
_ZW_TABLE = {ord(c): None for c in ZERO_WIDTH_CHARS}

_TOKEN_RE = re.compile(r"\S+|\s+")


class ConfusablesParseError(ValueError):
    """Raised when a confusables-format line cannot be parsed."""


class MapValidationError(ValueError):
    """Raised when a replacement map violates the idempotence guarantees."""


class ConfusablesMap:
    """Ordered source → target replacement map with longest-match lookup.

    Sources may be single characters (classic confusables) or multi-character
    tandem sequences.  Construction validates that applying the map twice can
    never differ from applying it once: no target may contain any source as a
    substring, no source may be empty or equal its target, and sources must
    be unique.
    """

    def __init__(self, entries: Iterable[tuple[str, str]]):
        entries = list(entries)
        problems = []
        seen: dict[str, str] = {}
        for src, tgt in entries:
            if not src:
                problems.append(f"empty source for target {tgt!r}")
            elif src == tgt:
                problems.append(f"source equals target: {src!r}")
            if src in seen and seen[src] != tgt:
                problems.append(f"duplicate source {src!r} with conflicting targets")
            seen[src] = tgt
        sources = list(seen)
        for s, t in seen.items():
            for src in sources:
                if src in t:
                    problems.append(f"target of {s!r} → {t!r} contains source {src!r}")
        if problems:
            raise MapValidationError(
                "replacement map is not idempotent-safe: " + "; ".join(sorted(set(problems)))
            )
        self.entries: dict[str, str] = dict(entries)
        by_first: dict[str, list[str]] = {}
        for src in self.entries:
            by_first.setdefault(src[0], []).append(src)
        # Longest source first so a single left-to-right scan is longest-match.
        self._by_first = {c: sorted(v, key=lambda s: (-len(s), s)) for c, v in by_first.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, source: str) -> bool:
        return source in self.entries

    def apply(self, text: str) -> str:
        out = []
        i = 0
        n = len(text)
        while i < n:
            candidates = self._by_first.get(text[i])
            if candidates:
                for src in candidates:
                    if text.startswith(src, i):
                        out.append(self.entries[src])
                        i += len(src)
                        break
                else:
                    out.append(text[i])
                    i += 1
            else:
                out.append(text[i])
                i += 1
        return "".join(out)


def parse_confusables(lines: Iterable[str], origin: str = "<memory>") -> list[tuple[str, str]]:
    """Parse the published confusables table format into (source, target) pairs.

    Each data line is `<hex codepoints> ; <hex codepoints> ; <type>` with
    whitespace-separated hex fields; '#' starts a comment; a leading BOM is
    tolerated.  Raises :class:`ConfusablesParseError` with the line number on
    malformed fields.
    """
    entries = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.lstrip("﻿").split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(";")]
        if len(fields) < 2 or not fields[0] or not fields[1]:
            raise ConfusablesParseError(
                f"{origin}:{lineno}: expected 'source ; target ; type', got {raw.rstrip()!r}"
            )
        try:
            src = "".join(chr(int(tok, 16)) for tok in fields[0].split())
            tgt = "".join(chr(int(tok, 16)) for tok in fields[1].split())
        except (ValueError, OverflowError) as exc:
            raise ConfusablesParseError(f"{origin}:{lineno}: bad hex field: {exc}") from None
        entries.append((src, tgt))
    return entries


def load_confusables(path: str | Path, tandem_path: str | Path | None = None) -> ConfusablesMap:
    """Load and validate a confusables file, optionally merged with a tandem
    sequence file in the same format."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        entries = parse_confusables(fh, origin=path.name)
    if tandem_path is not None:
        tandem_path = Path(tandem_path)
        with open(tandem_path, encoding="utf-8") as fh:
            entries.extend(parse_confusables(fh, origin=tandem_path.name))
    return ConfusablesMap(entries)


@lru_cache(maxsize=1)
def default_confusables() -> ConfusablesMap:
    """The bundled confusables + tandem map."""
    return load_confusables(data_path("confusables.txt"), data_path("tandem.txt"))


def _join_single_char_runs(text: str) -> str:
    """ACD step 1: join every maximal run of ≥ 3 whitespace-separated
    single-character fragments into one word."""
    tokens = _TOKEN_RE.findall(text)
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.isspace() and len(tok) == 1:
            run = [tok]
            j = i
            while (
                j + 2 < len(tokens)
                and tokens[j + 1].isspace()
                and not tokens[j + 2].isspace()
                and len(tokens[j + 2]) == 1
            ):
                run.append(tokens[j + 2])
                j += 2
            if len(run) >= 3:
                out.append("".join(run))
                i = j + 1
                continue
        out.append(tok)
        i += 1
    return "".join(out)


def _strip_alternating_separator(word: str) -> str:
    """ACD step 2 for a single word: delete an identical non-alphanumeric
    separator occupying all odd (or all even) character positions.

    Only words of length ≥ 3 where at least half the characters are
    non-alphanumeric are candidates.  Odd positions win when both parities
    match ("t-e-x-t" over ".t.e.x.t").
    """
    if len(word) < 3:
        return word
    non_alnum = sum(1 for c in word if not c.isalnum())
    if 2 * non_alnum < len(word) - 1:
        return word
    for parity in (1, 0):
        slot = word[parity::2]
        if len(slot) >= 2 and not slot[0].isalnum() and slot == slot[0] * len(slot):
            return word.replace(slot[0], "")
    return word


def _acd_pass(text: str) -> str:
    text = _join_single_char_runs(text)
    tokens = _TOKEN_RE.findall(text)
    return "".join(t if t.isspace() else _strip_alternating_separator(t) for t in tokens)


def acd(text: str) -> str:
    """Alternating Characters Defense.

    Step 0 removes zero-width characters; step 1 joins runs of ≥ 3
    single-character fragments; step 2 deletes an alternating identical
    non-alphanumeric separator from each word of length ≥ 3 whose characters
    are at least half non-alphanumeric.  Steps 1–2 are iterated to a fixed
    point so the whole rewrite is idempotent (a step-2 deletion can create a
    new single-character fragment run that step 1 must then see).
    """
    text = text.translate(_ZW_TABLE)
    while True:
        rewritten = _acd_pass(text)
        if rewritten == text:
            return text
        text = rewritten


def unicode_canonicalize(text: str, cmap: ConfusablesMap | None = None) -> str:
    """Unicode Canonicalization: longest-match left-to-right replacement of
    look-alike sources with their plain targets."""
    if cmap is None:
        cmap = default_confusables()
    return cmap.apply(text)


def deobfuscate(
    text: str,
    cmap: ConfusablesMap | None = None,
    use_acd: bool = True,
    use_uc: bool = True,
) -> str:
    """Full defense pipeline: ACD first, then UC."""
    if use_acd:
        text = acd(text)
    if use_uc:
        text = unicode_canonicalize(text, cmap)
    return text


def defend_lines(lines: Sequence[str], use_acd: bool = True, use_uc: bool = True,
                 cmap: ConfusablesMap | None = None) -> list[str]:
    """Apply the configured defenses to each line of a corpus."""
    if use_uc and cmap is None:
        cmap = default_confusables()
    return [deobfuscate(line, cmap, use_acd=use_acd, use_uc=use_uc) for line in lines]
