"""Shared text normalization and graphemization.

Every component that reads raw text (LM training, cipher synthesis,
reference transcripts) goes through these helpers so that the grapheme
view of a sentence is identical everywhere: lowercase words separated by
a single word-boundary token.
"""

from __future__ import annotations

WORD_BOUNDARY = "<wb>"
UNK = "<unk>"


def normalize_line(line: str) -> str:
    """Lowercase and collapse all whitespace runs to single spaces."""
    return " ".join(line.lower().split())


def line_to_graphemes(line: str) -> list[str]:
    """Grapheme tokens for a normalized line: characters of each word with
    the word-boundary token between words (not at the edges)."""
    words = normalize_line(line).split()
    out: list[str] = []
    for i, w in enumerate(words):
        if i:
            out.append(WORD_BOUNDARY)
        out.extend(w)
    return out


def graphemes_to_line(tokens: list[str]) -> str:
    """Inverse of line_to_graphemes; boundary tokens become spaces."""
    words: list[str] = []
    cur: list[str] = []
    for t in tokens:
        if t == WORD_BOUNDARY:
            words.append("".join(cur))
            cur = []
        else:
            cur.append(t)
    words.append("".join(cur))
    return " ".join(w for w in words if w)
