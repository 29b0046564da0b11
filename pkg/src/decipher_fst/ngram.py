"""Backoff n-gram language models with Witten-Bell smoothing.

Witten-Bell is used because it produces strictly positive backoff weights
with no tuning constants: a history with total count c and T distinct
followers keeps c/(c+T) of its mass for observed tokens and delegates
T/(c+T) to the next-shorter history.  The unigram level folds a uniform
floor over the whole alphabet into its distribution, so every token has
positive probability in every context.
"""

from __future__ import annotations

import math
from collections import Counter

from .textnorm import UNK, WORD_BOUNDARY, normalize_line

BOS = "<s>"
EOS = "</s>"


class NGramLm:
    """Conditional token model P(token | history) with backoff.

    `kind` is "char" or "word".  Histories are tuples of tokens (possibly
    containing the sentence-start marker); the empty tuple is the unigram
    history.  `alphabet` lists the predictable tokens (EOS included).
    """

    def __init__(self, order: int, kind: str, counts: list[dict], alphabet: list[str]):
        self.order = order
        self.kind = kind
        self.counts = counts          # counts[k][history] = Counter(token)
        self.alphabet = alphabet
        self._vocab = set(alphabet)
        self._totals = [
            {h: (sum(c.values()), len(c)) for h, c in level.items()}
            for level in counts
        ]
        # cache of -log backoff weights per history
        self._backoff: dict[tuple, float] = {}

    # -- probabilities ---------------------------------------------------
    #
    # Interpolated Witten-Bell expressed in backoff form: a history with
    # total count c and T distinct followers keeps lambda = c/(c+T) for
    # maximum-likelihood mass and sends mass = T/(c+T) to the next-shorter
    # history.  Observed tokens fold their lower-order share in directly,
    # so every level sums to one exactly and backoff weights are the
    # always-positive masses.  The unigram level interpolates with the
    # uniform distribution over the alphabet (the probability floor).

    def _wb_prob(self, history: tuple, token: str) -> float | None:
        """Smoothed probability if `token` was observed after `history`,
        else None."""
        k = len(history)
        c = self.counts[k].get(history)
        if c is None:
            return None
        n = c.get(token)
        if n is None:
            return None
        total, distinct = self._totals[k][history]
        mass = distinct / (total + distinct)
        if k == 0:
            lower = 1.0 / len(self.alphabet)
        else:
            lower = self.prob(history[1:], token)
        return n / (total + distinct) + mass * lower

    def backoff_mass(self, history: tuple) -> float:
        total, distinct = self._totals[len(history)][history]
        return distinct / (total + distinct)

    def backoff_weight(self, history: tuple) -> float:
        """-log of the backoff weight for an observed history."""
        w = self._backoff.get(history)
        if w is None:
            w = -math.log(self.backoff_mass(history))
            self._backoff[history] = w
        return w

    def has_history(self, history: tuple) -> bool:
        return history in self.counts[len(history)]

    def prob(self, history: tuple, token: str) -> float:
        """Backoff-resolved P(token | history); history may be any length
        up to order-1 and is truncated/shortened as needed."""
        history = history[-(self.order - 1):] if self.order > 1 else ()
        while True:
            if self.has_history(history):
                p = self._wb_prob(history, token)
                if p is not None:
                    return p
                if not history:
                    # unigram floor for never-observed tokens
                    return self.backoff_mass(()) / len(self.alphabet)
                return self.backoff_mass(history) * self.prob(history[1:], token)
            if not history:
                raise RuntimeError("unigram history missing from model")
            history = history[1:]

    def logprob(self, history: tuple, token: str) -> float:
        return math.log(self.prob(history, token))

    def context_after(self, history: tuple, token: str) -> tuple:
        """Longest observed context ending in `token` (the next LM state
        under the standard backoff-traversal convention)."""
        h = (history + (token,))[-(self.order - 1):] if self.order > 1 else ()
        while h and not self.has_history(h):
            h = h[1:]
        return h

    def start_context(self) -> tuple:
        h = (BOS,) * (self.order - 1)
        while h and not self.has_history(h):
            h = h[1:]
        return h

    # -- scoring ----------------------------------------------------------

    def map_token(self, token: str) -> str:
        if self.kind == "word" and token not in self._vocab:
            return UNK
        return token

    def score_tokens(self, tokens: list[str], include_eos: bool = True) -> float:
        """Natural-log probability of one sentence under the backoff model."""
        h = self.start_context()
        lp = 0.0
        for t in tokens:
            t = self.map_token(t)
            lp += self.logprob(h, t)
            h = self.context_after(h, t)
        if include_eos:
            lp += self.logprob(h, EOS)
        return lp

    def sentence_tokens(self, line: str) -> list[str]:
        line = normalize_line(line)
        if self.kind == "char":
            return _char_tokens(line)
        return [self.map_token(w) for w in line.split()]


def _char_tokens(line: str) -> list[str]:
    out: list[str] = []
    for ch in line:
        out.append(WORD_BOUNDARY if ch == " " else ch)
    return out


def _count(sentences: list[list[str]], order: int) -> tuple[list[dict], list[str]]:
    counts: list[dict] = [dict() for _ in range(order)]
    vocab: set[str] = set()
    for tokens in sentences:
        vocab.update(tokens)
        padded = [BOS] * (order - 1) + tokens + [EOS]
        base = order - 1
        for i in range(base, len(padded)):
            token = padded[i]
            for k in range(order):
                if k > i:
                    break
                hist = tuple(padded[i - k:i])
                level = counts[k]
                c = level.get(hist)
                if c is None:
                    c = Counter()
                    level[hist] = c
                c[token] += 1
    alphabet = sorted(vocab) + [EOS]
    return counts, alphabet


def train_char_lm(corpus: list[str], order: int) -> NGramLm:
    """Character n-gram model; spaces become the word-boundary token."""
    if not 1 <= order <= 7:
        raise ValueError(f"char LM order must be in 1..7, got {order}")
    sentences = []
    for line in corpus:
        line = normalize_line(line)
        if line:
            sentences.append(_char_tokens(line))
    if not sentences:
        raise ValueError("empty corpus")
    counts, alphabet = _count(sentences, order)
    return NGramLm(order, "char", counts, alphabet)


def train_word_lm(corpus: list[str], order: int, vocab_limit: int) -> NGramLm:
    """Word n-gram model over the `vocab_limit` most frequent words; other
    words map to <unk> (ties broken lexicographically)."""
    if not 1 <= order <= 7:
        raise ValueError(f"word LM order must be in 1..7, got {order}")
    if vocab_limit < 1:
        raise ValueError("vocab_limit must be >= 1")
    freq: Counter = Counter()
    lines = []
    for line in corpus:
        line = normalize_line(line)
        if line:
            words = line.split()
            lines.append(words)
            freq.update(words)
    if not lines:
        raise ValueError("empty corpus")
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    vocab = {w for w, _ in ranked[:vocab_limit]}
    sentences = [[w if w in vocab else UNK for w in words] for words in lines]
    counts, alphabet = _count(sentences, order)
    return NGramLm(order, "word", counts, alphabet)


def perplexity(lm: NGramLm, text: list[str]) -> float:
    """exp of the mean negative log probability of the text tokens.

    Sentence-end events are not scored; contexts reset per line.
    """
    total = 0.0
    n = 0
    for line in text:
        tokens = lm.sentence_tokens(line)
        if not tokens:
            continue
        total += lm.score_tokens(tokens, include_eos=False)
        n += len(tokens)
    if n == 0:
        raise ValueError("empty text")
    return math.exp(-total / n)
