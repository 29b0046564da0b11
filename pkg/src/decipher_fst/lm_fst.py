"""Compiling language models and lexicons into finite-state machines.

The n-gram acceptor has one state per observed context.  Token arcs carry
the Witten-Bell discounted probabilities; backoff goes through plain
epsilon arcs (the standard approximation: a string reachable both
directly and via backoff is counted twice, so the acceptor can slightly
overestimate string probability; scoring helpers therefore follow the
single backoff-traversal path).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .fst import ConfigError, Wfst
from .fst_text import read_fst, read_symbols, write_fst, write_symbols
from .ngram import EOS, NGramLm
from .semirings import INF, TROPICAL
from .symbols import EPS, SymbolTable
from .textnorm import WORD_BOUNDARY, normalize_line


def lm_to_fst(lm: NGramLm, syms: SymbolTable | None = None) -> Wfst:
    """Backoff acceptor for an n-gram model.

    The path following the backoff-traversal convention (direct arc when
    one exists, else the epsilon arc) scores a string exactly as the model
    does; sentence-end probability sits on the final weights.
    """
    if syms is None:
        syms = SymbolTable()
        for tok in lm.alphabet:
            if tok != EOS:
                syms.add(tok)
    f = Wfst(syms, syms, TROPICAL)

    contexts = [h for level in lm.counts for h in level]
    state_of = {}
    for h in sorted(contexts, key=lambda h: (len(h), h)):
        state_of[h] = f.add_state()
    f.set_start(state_of[lm.start_context()])

    unigram = state_of[()]
    floor = lm.backoff_mass(()) / len(lm.alphabet)
    for h, s in state_of.items():
        followers = lm.counts[len(h)][h] if lm.has_history(h) else {}
        for tok in sorted(followers):
            if tok == EOS:
                continue
            w = -math.log(lm._wb_prob(h, tok))
            f.add_arc(s, syms.id(tok), syms.id(tok), w, state_of[lm.context_after(h, tok)])
        if EOS in followers:
            f.set_final(s, -math.log(lm._wb_prob(h, EOS)))
        if h:
            f.add_arc(s, EPS, EPS, lm.backoff_weight(h), state_of[h[1:]])
    # unigram floor arcs for alphabet tokens never seen at the unigram level
    seen = set(lm.counts[0][()])
    for tok, tid in syms.items():
        if tid == EPS or tok in seen:
            continue
        f.add_arc(unigram, tid, tid, -math.log(floor), unigram)
    if unigram not in f.finals:
        f.set_final(unigram, -math.log(floor))
    return f


def convention_score(f: Wfst, tokens: list[int]) -> float:
    """Weight of the single backoff-traversal path through an n-gram
    acceptor: take the direct arc when present, otherwise the epsilon arc.
    Includes the final weight (resolved the same way)."""
    s = f.start
    total = 0.0
    for tid in tokens:
        while True:
            direct = next((a for a in f.arcs[s] if a.ilabel == tid), None)
            if direct is not None:
                total += direct.weight
                s = direct.dst
                break
            eps = next((a for a in f.arcs[s] if a.ilabel == EPS), None)
            if eps is None:
                return INF
            total += eps.weight
            s = eps.dst
    while s not in f.finals:
        eps = next((a for a in f.arcs[s] if a.ilabel == EPS), None)
        if eps is None:
            return INF
        total += eps.weight
        s = eps.dst
    return total + f.finals[s]


# -- grapheme lexicon -----------------------------------------------------

class GraphemeLexicon:
    """Vocabulary with grapheme spellings plus the word-boundary grapheme."""

    def __init__(self, vocabulary: list[tuple[str, list[str]]],
                 boundary: str = WORD_BOUNDARY):
        words = [w for w, _ in vocabulary]
        if len(set(words)) != len(words):
            raise ConfigError("duplicate words in lexicon")
        for w, spelling in vocabulary:
            if not spelling:
                raise ConfigError(f"empty spelling for word {w!r}")
        self.vocabulary = list(vocabulary)
        self.boundary = boundary

    @classmethod
    def from_words(cls, words, boundary: str = WORD_BOUNDARY) -> "GraphemeLexicon":
        return cls([(w, list(w)) for w in words], boundary)


def build_lexicon_fst(lex: GraphemeLexicon, grapheme_syms: SymbolTable,
                      word_syms: SymbolTable) -> Wfst:
    """Transducer from grapheme spellings to word tokens.

    Each word's spelling followed by the boundary grapheme maps to the
    word, looping back to the start so word sequences concatenate.  The
    word is emitted on its first grapheme arc; the last state of each
    spelling is final so an utterance may end without a trailing boundary.
    """
    if not lex.vocabulary:
        raise ConfigError("empty lexicon")
    f = Wfst(grapheme_syms, word_syms, TROPICAL)
    start = f.add_state()
    f.set_start(start)
    f.set_final(start, 0.0)
    wb = grapheme_syms.id(lex.boundary)
    for word, spelling in lex.vocabulary:
        wid = word_syms.id(word)
        s = start
        for i, g in enumerate(spelling):
            t = f.add_state()
            f.add_arc(s, grapheme_syms.id(g), wid if i == 0 else EPS, 0.0, t)
            s = t
        f.set_final(s, 0.0)
        f.add_arc(s, wb, EPS, 0.0, start)
    return f


# -- serialization --------------------------------------------------------

def save_lm(lm: NGramLm, directory, name: str,
            syms: SymbolTable | None = None) -> dict:
    """Write the model as its acceptor (text FST + symbols) with a JSON
    metadata sidecar; returns the metadata."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    f = lm_to_fst(lm, syms)
    fst_path = directory / f"{name}.fst.txt"
    syms_path = directory / f"{name}.syms.txt"
    write_fst(f, fst_path)
    write_symbols(f.isyms, syms_path)
    meta = {
        "order": lm.order,
        "token_kind": lm.kind,
        "alphabet_file": syms_path.name,
        "fst_file": fst_path.name,
    }
    with open(directory / f"{name}.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


class FstLm:
    """A language model reloaded from its acceptor form.

    Scores strings by the backoff-traversal convention, which matches the
    original model's probabilities exactly.
    """

    def __init__(self, fst: Wfst, order: int, kind: str):
        self.fst = fst
        self.order = order
        self.kind = kind

    def sentence_tokens(self, line: str) -> list[str]:
        line = normalize_line(line)
        if self.kind == "char":
            return [WORD_BOUNDARY if ch == " " else ch for ch in line]
        return [w if w in self.fst.isyms else "<unk>" for w in line.split()]

    def score_tokens(self, tokens: list[str], include_eos: bool = True) -> float:
        syms = self.fst.isyms
        ids = []
        for t in tokens:
            if t not in syms:
                return -INF
            ids.append(syms.id(t))
        if include_eos:
            return -convention_score(self.fst, ids)
        # token-only score: subtract the final-resolution part
        w = convention_score(self.fst, ids)
        if w == INF:
            return -INF
        return -(w - _final_resolution_weight(self.fst, ids))
    # NB. score_tokens returns a natural-log probability like NGramLm's.


def _final_resolution_weight(f: Wfst, ids: list[int]) -> float:
    s = f.start
    for tid in ids:
        while True:
            direct = next((a for a in f.arcs[s] if a.ilabel == tid), None)
            if direct is not None:
                s = direct.dst
                break
            eps = next((a for a in f.arcs[s] if a.ilabel == EPS), None)
            if eps is None:
                return INF
            s = eps.dst
    w = 0.0
    while s not in f.finals:
        eps = next((a for a in f.arcs[s] if a.ilabel == EPS), None)
        if eps is None:
            return INF
        w += eps.weight
        s = eps.dst
    return w + f.finals[s]


def load_lm(directory, name: str) -> FstLm:
    directory = Path(directory)
    with open(directory / f"{name}.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    syms = read_symbols(directory / meta["alphabet_file"])
    f = read_fst(directory / meta["fst_file"], syms, syms, TROPICAL)
    return FstLm(f, meta["order"], meta["token_kind"])
