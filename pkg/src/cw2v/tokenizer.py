"""Lowercasing alphanumeric tokenizer shared by training, classification
and evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, Iterator


@dataclass(frozen=True)
class TokenizedDoc:
    """A tokenized document plus an identifier for its source line/file."""

    tokens: tuple[str, ...]
    source_id: str = ""


def tokenize(text: str, source_id: str = "") -> TokenizedDoc:
    """Lowercase ``text`` and split it into maximal alphanumeric runs.

    A character is alphanumeric iff ``str.isalnum`` says so (Unicode letter
    and number categories); every other character separates tokens and is
    dropped.  Tokens preserve their original order and multiplicity.
    """
    tokens = tuple(
        "".join(run) for is_alnum, run in groupby(text.lower(), key=str.isalnum) if is_alnum
    )
    return TokenizedDoc(tokens=tokens, source_id=source_id)


def tokenize_lines(lines: Iterable[str], source_prefix: str = "") -> Iterator[TokenizedDoc]:
    """Tokenize an iterable of lines, one document per line."""
    for i, line in enumerate(lines):
        yield tokenize(line, source_id=f"{source_prefix}{i}")
