"""Unsupervised training and decoding of the decipherment model.

Each EM iteration composes every utterance with the current edit model
and the stage's language model, runs forward-backward in the log
semiring, accumulates per-parameter posterior mass and renormalizes the
lexical rows.  Stages swap in progressively stronger language models;
smoothing and top-k pruning happen between stages as scheduled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .fst import ConfigError, Wfst
from .lattice import ExplicitSource, LatticeStructure, LexiconWordSource, build_structure
from .lexical import AlignmentModel, LexicalModel, prune_lexical, smooth
from .semirings import INF, TROPICAL
from .symbols import SymbolTable

# entries falling below this mass after normalization leave the support,
# mirroring the pruning of unseen substitutions during training
SUPPORT_FLOOR = 1e-12


class StageAborted(RuntimeError):
    def __init__(self, stage: str, n_empty: int, n_total: int):
        super().__init__(
            f"stage {stage!r}: {n_empty}/{n_total} utterances produced "
            f"empty lattices; model and language model are incompatible")
        self.stage = stage
        self.n_empty = n_empty
        self.n_total = n_total


@dataclass
class Stage:
    """One schedule entry.  `lm` names a language model ("char-3",
    "word-3", ...); a stage without an LM only applies its smooth/prune
    operations."""
    lm: str | None = None
    iterations: int = 0
    smooth_alpha: float | None = None
    prune_k: int | None = None
    beam: float | None = None

    def validate(self) -> None:
        if self.lm is not None and self.iterations < 1:
            raise ConfigError(f"stage {self.lm}: iterations must be >= 1")
        if self.smooth_alpha is not None and not 0 < self.smooth_alpha <= 1:
            raise ConfigError("smooth_alpha must be in (0, 1]")
        if self.prune_k is not None and self.prune_k < 1:
            raise ConfigError("prune_k must be >= 1")
        if self.beam is not None and not self.beam > 0:
            raise ConfigError("beam must be positive")


@dataclass
class TrainingSchedule:
    stages: list[Stage] = field(default_factory=list)

    def validate(self) -> None:
        for st in self.stages:
            st.validate()

    @classmethod
    def from_json(cls, data) -> "TrainingSchedule":
        if isinstance(data, str):
            data = json.loads(data)
        sched = cls([Stage(**obj) for obj in data])
        sched.validate()
        return sched

    def to_json(self) -> list[dict]:
        out = []
        for st in self.stages:
            obj = {}
            if st.lm is not None:
                obj["lm"] = st.lm
                obj["iterations"] = st.iterations
            if st.smooth_alpha is not None:
                obj["smooth_alpha"] = st.smooth_alpha
            if st.prune_k is not None:
                obj["prune_k"] = st.prune_k
            if st.beam is not None:
                obj["beam"] = st.beam
            out.append(obj)
        return out


def default_schedule() -> TrainingSchedule:
    """Bigram through 5-gram character stages (top-10 pruning once the
    bigram stage has localized the mapping), then a beam-pruned word
    trigram stage, with smoothing before and after the word stage."""
    return TrainingSchedule([
        Stage(lm="char-2", iterations=10),
        Stage(lm="char-3", iterations=10, prune_k=10),
        Stage(lm="char-4", iterations=10),
        Stage(lm="char-5", iterations=10),
        Stage(lm="word-3", iterations=10, smooth_alpha=0.9, beam=10.0),
        Stage(smooth_alpha=0.9),
    ])


class DecipherResult(NamedTuple):
    graphemes: list[int]      # grapheme ids (boundary included)
    words: list[int]          # word ids when a word LM drove the decode
    weight: float
    lattice: Wfst | None


def make_source(g) -> object:
    """Wrap a grapheme-side machine for the lattice builder."""
    if isinstance(g, (ExplicitSource, LexiconWordSource)):
        return g
    if isinstance(g, Wfst):
        return ExplicitSource(g)
    raise ConfigError(f"unsupported grapheme machine: {type(g)!r}")


def _structures(corpus: list[list[int]], lex: LexicalModel,
                ali: AlignmentModel, source) -> list[LatticeStructure]:
    return [build_structure(x, lex, ali, source) for x in corpus]


def _em_iteration(structures: list[LatticeStructure], lex: LexicalModel,
                  beam: float | None):
    """One E+M pass.  Returns (new lexical model, log-likelihood of the
    model that produced the posteriors, indices of skipped utterances)."""
    neglog = lex.neglog()
    counts = np.zeros_like(lex.prob)
    loglik = 0.0
    skipped: list[int] = []
    flat = counts.ravel()
    for i, st in enumerate(structures):
        w = st.weights(neglog)
        if beam is not None and beam != INF:
            w = st.beam_mask(w, beam)
        res = st.posteriors(w)
        if res is None:
            skipped.append(i)
            continue
        total, post = res
        loglik += -total
        tagged = st.atag >= 0
        np.add.at(flat, st.atag[tagged], post[tagged])
    new_lex = _m_step(lex, counts)
    return new_lex, loglik, skipped


def _m_step(lex: LexicalModel, counts: np.ndarray) -> LexicalModel:
    prob = lex.prob.copy()
    totals = counts.sum(axis=1)
    for y in range(lex.n_graphemes):
        if totals[y] <= 0:
            continue  # no evidence: keep the previous row
        row = counts[y] / totals[y]
        row[row < SUPPORT_FLOOR] = 0.0
        s = row.sum()
        if s <= 0:
            continue
        prob[y] = row / s
    out = lex.replace(prob)
    out.check_rows()
    return out


def em_step(lex: LexicalModel, ali: AlignmentModel, corpus: list[list[int]],
            g, beam: float | None = None):
    """Single full-batch Baum-Welch step against the grapheme machine `g`.

    Returns (new LexicalModel, corpus log-likelihood, skipped indices);
    utterances whose lattice is empty are skipped, not fatal.
    """
    source = make_source(g)
    structures = _structures(corpus, lex, ali, source)
    new_lex, loglik, skipped = _em_iteration(structures, lex, beam)
    return new_lex, loglik, skipped


def train(schedule: TrainingSchedule, corpus: list[list[int]],
          lex: LexicalModel, ali: AlignmentModel, lms: dict,
          log_sink=None) -> LexicalModel:
    """Run the staged EM protocol.

    `lms` maps stage LM names to grapheme machines (Wfst acceptors or
    LexiconWordSource instances).  `log_sink`, when given, receives one
    dict per EM iteration: {stage, iter, loglik, active_params, skipped}.
    A stage aborts when more than half the corpus yields empty lattices.
    """
    schedule.validate()
    for i, st in enumerate(schedule.stages):
        if st.lm is not None and st.lm not in lms:
            raise ConfigError(f"stage {i}: unknown language model {st.lm!r}")
    for st in schedule.stages:
        if st.prune_k is not None:
            lex = prune_lexical(lex, st.prune_k)
        if st.smooth_alpha is not None:
            lex = smooth(lex, st.smooth_alpha)
        if st.lm is None:
            continue
        source = make_source(lms[st.lm])
        structures = _structures(corpus, lex, ali, source)
        for it in range(st.iterations):
            lex, loglik, skipped = _em_iteration(structures, lex, st.beam)
            if len(skipped) * 2 > len(corpus):
                raise StageAborted(st.lm, len(skipped), len(corpus))
            if log_sink is not None:
                log_sink({"stage": st.lm, "iter": it, "loglik": loglik,
                          "active_params": lex.active_params,
                          "skipped": len(skipped)})
    return lex


def decipher(lex: LexicalModel, ali: AlignmentModel, g, x: list[int],
             beam: float | None = None,
             emit_lattice: bool = False) -> DecipherResult | None:
    """Best grapheme string for one phone sequence; None when the lattice
    admits no path.

    Graphemes are read from the edit-model side of the best path (its
    parameter tags), so word-LM decoding still yields grapheme output;
    word ids come along from the lexicon traversal when present.
    """
    source = make_source(g)
    st = build_structure(x, lex, ali, source)
    neglog = lex.neglog()
    w = st.weights(neglog)
    if beam is not None and beam != INF:
        w = st.beam_mask(w, beam)
    best = st.best_path(w)
    if best is None:
        return None
    arc_idx, weight = best
    graphemes = []
    words = []
    for j in arc_idx:
        t = int(st.atag[j])
        if t >= 0:
            y = t // lex.n_phones
            if y > 0:
                graphemes.append(y)
        ol = int(st.aol[j])
        if ol != 0:
            words.append(ol)
    lattice = None
    if emit_lattice:
        lattice = st.materialize(w, lex.phones, _output_syms(source),
                                 TROPICAL)
    return DecipherResult(graphemes, words, weight, lattice)


def _output_syms(source) -> SymbolTable:
    if isinstance(source, ExplicitSource):
        return source.fst.osyms
    return source.word_fst.osyms


def corpus_loglik(lex: LexicalModel, ali: AlignmentModel,
                  corpus: list[list[int]], g, beam: float | None = None) -> float:
    """Log-likelihood of a corpus under the current model (no update)."""
    source = make_source(g)
    total = 0.0
    neglog = lex.neglog()
    for x in corpus:
        st = build_structure(x, lex, ali, source)
        w = st.weights(neglog)
        if beam is not None and beam != INF:
            w = st.beam_mask(w, beam)
        fwd = st.log_forward(w)
        t = st.total_from(fwd)
        if t < INF:
            total += -t
    return total
