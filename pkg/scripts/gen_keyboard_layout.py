#!/usr/bin/env python
"""Regenerate src/cw2v/data/qwerty_neighbors.tsv.

Models the four staggered rows of a US QWERTY board.  Each key sits at
x = row_offset + column (key widths of 1); two keys are adjacent when they
are next to each other in the same row or within one key width in a
neighboring row, which yields the usual 8-ish neighborhood.
"""

from __future__ import annotations

from pathlib import Path

ROWS = [
    ("`1234567890-=", 0.00),
    ("qwertyuiop[]\\", 1.50),
    ("asdfghjkl;'", 1.75),
    ("zxcvbnm,./", 2.25),
]


def build_neighbors() -> dict[str, str]:
    pos = {}
    for r, (chars, offset) in enumerate(ROWS):
        for c, ch in enumerate(chars):
            pos[ch] = (r, offset + c)
    out = {}
    for ch, (r, x) in pos.items():
        near = []
        for other, (r2, x2) in pos.items():
            if other == ch:
                continue
            if r2 == r and abs(x2 - x) == 1:
                near.append(other)
            elif abs(r2 - r) == 1 and abs(x2 - x) < 1.0:
                near.append(other)
        out[ch] = "".join(sorted(near))
    return out


def main() -> None:
    dest = Path(__file__).resolve().parent.parent / "src" / "cw2v" / "data" / "qwerty_neighbors.tsv"
    dest.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "# US QWERTY adjacency, lowercase.  Format: <key>\\t<neighboring keys>.",
        "# Regenerate with scripts/gen_keyboard_layout.py.",
    ]
    for ch, near in sorted(build_neighbors().items()):
        lines.append(f"{ch}\t{near}")
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {dest} ({len(lines) - 2} keys)")


if __name__ == "__main__":
    main()
