"""Shared plumbing: deterministic seed derivation, file helpers, config
fingerprints."""

from __future__ import annotations

import gzip
import hashlib
import json
import random
from pathlib import Path
from typing import Any, Iterable

# Separator chosen so that ("ab", "c") and ("a", "bc") derive different seeds.
_SEP = "\x1f"

DATA_DIR = Path(__file__).resolve().parent / "data"


def data_path(name: str) -> Path:
    """Path of a bundled data file."""
    return DATA_DIR / name


def derive_seed(*parts: Any) -> int:
    """Derive a 64-bit seed from an arbitrary mix of strings/ints.

    ``hash()`` is salted per process and ``random.Random`` no longer accepts
    tuples, so we hash an explicit byte encoding instead.  The result is
    stable across processes, platforms and Python versions.
    """
    payload = _SEP.join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(*parts: Any) -> random.Random:
    """A ``random.Random`` seeded from :func:`derive_seed`."""
    return random.Random(derive_seed(*parts))


def open_text(path: str | Path, mode: str = "rt"):
    """Open a text file, transparently handling ``.gz`` suffixes."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def read_lines(path: str | Path, strip: bool = True) -> list[str]:
    """All lines of a (possibly gzipped) text file, without newlines."""
    with open_text(path) as fh:
        if strip:
            return [line.rstrip("\n") for line in fh]
        return list(fh)


def config_fingerprint(config: Any) -> str:
    """A short stable hex digest of a JSON-serializable config mapping.

    Key order does not matter; values must be JSON serializable.
    """
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def write_json(path: str | Path, payload: Any) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def write_tsv(path: str | Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(cell) for cell in row) + "\n")
