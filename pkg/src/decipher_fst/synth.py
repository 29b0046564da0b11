"""Synthetic decipherment tasks: text generation, a grapheme-to-phone
channel with optional noise, and utterance selection.

The channel stands in for a phone recognizer: graphemes map through a
pronunciation table (sampling among variants), spaces become silence
phones, and substitution/deletion/insertion noise is applied per phone.
Everything is deterministic under a fixed seed, with per-line derived
seeds so lines can be processed in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._words import WORDS
from .fst import ConfigError
from .textnorm import line_to_graphemes, normalize_line

SILENCE = "sil"


class PronunciationTable:
    """Grapheme -> weighted pronunciation variants (0 to 2 phones each)."""

    def __init__(self, variants: dict[str, list[tuple[list[str], float]]],
                 silence_phone: str = SILENCE):
        for g, alts in variants.items():
            total = sum(p for _, p in alts)
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(f"pronunciations of {g!r} sum to {total}")
            for phones, _ in alts:
                if not 0 <= len(phones) <= 2:
                    raise ConfigError(
                        f"pronunciation of {g!r} has {len(phones)} phones")
        self.variants = variants
        self.silence_phone = silence_phone

    def phone_inventory(self) -> list[str]:
        phones = {self.silence_phone}
        for alts in self.variants.values():
            for seq, _ in alts:
                phones.update(seq)
        return sorted(phones)

    def grapheme_inventory(self) -> list[str]:
        return sorted(self.variants)

    def is_ambiguous(self) -> bool:
        return any(len(alts) > 1 for alts in self.variants.values())

    # TSV: grapheme<TAB>phones<TAB>prob, phones space-joined (may be empty)
    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{SILENCE_KEY}\t{self.silence_phone}\t1.0\n")
            for g in sorted(self.variants):
                for phones, p in self.variants[g]:
                    fh.write(f"{g}\t{' '.join(phones)}\t{float(p)!r}\n")

    @classmethod
    def load(cls, path) -> "PronunciationTable":
        variants: dict[str, list[tuple[list[str], float]]] = {}
        silence = SILENCE
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                g, phones, p = line.split("\t")
                if g == SILENCE_KEY:
                    silence = phones
                    continue
                variants.setdefault(g, []).append(
                    (phones.split() if phones else [], float(p)))
        return cls(variants, silence)


SILENCE_KEY = "<silence>"


@dataclass
class ChannelNoise:
    substitution_rate: float = 0.0
    deletion_rate: float = 0.0
    insertion_rate: float = 0.0
    confusion_bias: dict | None = None   # phone -> {target: prob}
    seed: int = 0

    def __post_init__(self):
        rates = (self.substitution_rate, self.deletion_rate, self.insertion_rate)
        if any(r < 0 or r >= 1 for r in rates):
            raise ConfigError("noise rates must lie in [0, 1)")
        if sum(rates) >= 1:
            raise ConfigError("noise rates must sum to less than 1")

    def is_zero(self) -> bool:
        return (self.substitution_rate == 0 and self.deletion_rate == 0
                and self.insertion_rate == 0)


def gen_cipher(text: list[str], table: PronunciationTable, noise: ChannelNoise,
               p_sil: float = 1.0):
    """Cipher a text corpus into phone sequences.

    Returns (phone sequences, reference grapheme token sequences).  Word
    boundaries emit the silence phone with probability `p_sil`; noise is
    applied i.i.d. per phone.  References reflect the clean text.
    """
    phone_lines: list[list[str]] = []
    ref_lines: list[list[str]] = []
    # substitution/insertion targets: non-silence phones
    targets = [p for p in table.phone_inventory() if p != table.silence_phone]
    for idx, line in enumerate(text):
        norm = normalize_line(line)
        rng = np.random.default_rng([noise.seed, idx])
        phones: list[str] = []
        for word_i, word in enumerate(norm.split()):
            if word_i and (p_sil >= 1.0
                           or (p_sil > 0 and rng.random() < p_sil)):
                phones.append(table.silence_phone)
            for ch in word:
                alts = table.variants.get(ch)
                if alts is None:
                    raise ConfigError(f"character {ch!r} not covered by table")
                if len(alts) == 1:
                    seq = alts[0][0]
                else:
                    probs = [p for _, p in alts]
                    k = rng.choice(len(alts), p=probs)
                    seq = alts[k][0]
                phones.extend(seq)
        if not noise.is_zero():
            phones = _apply_noise(phones, noise, targets,
                                  table.silence_phone, rng)
        phone_lines.append(phones)
        ref_lines.append(line_to_graphemes(norm))
    return phone_lines, ref_lines


def _apply_noise(phones, noise: ChannelNoise, targets, silence, rng):
    out: list[str] = []
    p_del = noise.deletion_rate
    p_sub = noise.substitution_rate
    bias = noise.confusion_bias or {}
    for ph in phones:
        u = rng.random()
        if u < p_del:
            pass
        elif u < p_del + p_sub:
            d = bias.get(ph)
            if d:
                toks = sorted(d)
                probs = [d[t] for t in toks]
                out.append(toks[rng.choice(len(toks), p=probs)])
            else:
                pool = [t for t in targets if t != ph]
                out.append(pool[rng.integers(len(pool))])
        else:
            out.append(ph)
        if noise.insertion_rate and rng.random() < noise.insertion_rate:
            out.append(targets[rng.integers(len(targets))])
    return out


def select_shortest(corpus: list, n: int) -> list:
    """The n utterances with the fewest phones, ties by original order."""
    if n > len(corpus):
        raise ConfigError(f"asked for {n} of {len(corpus)} utterances")
    idx = select_shortest_indices([len(u) for u in corpus], n)
    return [corpus[i] for i in idx]


def select_shortest_indices(lengths: list[int], n: int) -> list[int]:
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    return sorted(order[:n])


# -- built-in tasks ---------------------------------------------------------

def letter_phone(ch: str) -> str:
    return f"p{ord(ch) - ord('a') + 1:02d}"


def bijective_table() -> PronunciationTable:
    """One distinct phone per letter; used by the noiseless benchmarks."""
    variants = {ch: [([letter_phone(ch)], 1.0)]
                for ch in "abcdefghijklmnopqrstuvwxyz"}
    return PronunciationTable(variants)


def ambiguous_table() -> PronunciationTable:
    """Six letters get a second pronunciation, including two-phone
    variants and collisions with other letters' phones; with silence this
    uses 30 phones."""
    variants = {ch: [([letter_phone(ch)], 1.0)]
                for ch in "abcdefghijklmnopqrstuvwxyz"}
    k, s, w = letter_phone("k"), letter_phone("s"), letter_phone("w")
    variants["e"] = [([letter_phone("e")], 0.7), (["p27"], 0.3)]
    variants["o"] = [([letter_phone("o")], 0.7), (["p28"], 0.3)]
    variants["j"] = [([letter_phone("j")], 0.7), (["p29"], 0.3)]
    variants["x"] = [([letter_phone("x")], 0.6), ([k, s], 0.4)]
    variants["c"] = [([letter_phone("c")], 0.6), ([k], 0.4)]
    variants["q"] = [([letter_phone("q")], 0.6), ([k, w], 0.4)]
    return PronunciationTable(variants)


def make_text_corpus(seed: int, n_lines: int,
                     words_per_line: tuple[int, int] = (3, 8),
                     min_word_len: int = 1) -> list[str]:
    """Deterministic pseudo-text: Zipf-weighted draws from the built-in
    vocabulary, one sentence per line.

    `min_word_len` restricts the vocabulary to longer words, emulating
    languages whose word boundaries matter less to decipherment.
    """
    rng = np.random.default_rng(seed)
    vocab = tuple(w for w in WORDS if len(w) >= min_word_len)
    ranks = np.arange(1, len(vocab) + 1, dtype=float)
    probs = 1.0 / ranks ** 1.05
    probs /= probs.sum()
    lo, hi = words_per_line
    lines = []
    for _ in range(n_lines):
        k = int(rng.integers(lo, hi + 1))
        picks = rng.choice(len(vocab), size=k, p=probs)
        lines.append(" ".join(vocab[i] for i in picks))
    return lines
