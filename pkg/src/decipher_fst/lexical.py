"""The trainable lexical model and the fixed alignment model.

The lexical table P(phone | grapheme) is stored as a dense array indexed
by symbol ids: row 0 is the deletion distribution (phones emitted from no
grapheme), column 0 holds each grapheme's insertion probability (grapheme
emitted from no phone).  A boolean mask carries both the structural
constraints and any training-time pruning; masked entries stay exactly
zero through every operation.

Structure:
  * the word-boundary row may only emit silence phones, and silence
    phones may only be emitted by the word-boundary row;
  * silence phones cannot be deleted, the boundary cannot be inserted;
  * no empty-to-empty operation.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .fst import ConfigError, Wfst
from .semirings import TROPICAL
from .symbols import EPS, EPS_TOKEN, SymbolTable

BASE, AFTER_INS, AFTER_DEL = 0, 1, 2


class AlignmentModel:
    """Fixed weights over {substitute, insert, delete}.

    The three-state machine (base / after-insertion / after-deletion)
    forbids two insertions or two deletions in a row; see build_edit_fst.
    """

    def __init__(self, substitute: float = 0.90, insert: float = 0.05,
                 delete: float = 0.05):
        total = substitute + insert + delete
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"alignment weights must sum to 1, got {total}")
        if min(substitute, insert, delete) < 0:
            raise ConfigError("alignment weights must be non-negative")
        self.substitute = substitute
        self.insert = insert
        self.delete = delete

    def as_dict(self) -> dict:
        return {"substitute": self.substitute, "insert": self.insert,
                "delete": self.delete}

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentModel":
        return cls(d["substitute"], d["insert"], d["delete"])


class LexicalModel:
    def __init__(self, phones: SymbolTable, graphemes: SymbolTable,
                 silence_ids: frozenset[int], boundary_id: int,
                 prob: np.ndarray, allowed: np.ndarray):
        self.phones = phones
        self.graphemes = graphemes
        self.silence_ids = silence_ids
        self.boundary_id = boundary_id
        self.prob = prob          # (n_graphemes, n_phones) float64
        self.allowed = allowed    # same shape, bool
        self.n_graphemes = len(graphemes)
        self.n_phones = len(phones)

    # -- tags -------------------------------------------------------------

    def tag(self, grapheme_id: int, phone_id: int) -> int:
        return grapheme_id * self.n_phones + phone_id

    def tag_pair(self, tag: int) -> tuple[int, int]:
        return divmod(tag, self.n_phones)

    @property
    def active_params(self) -> int:
        return int(np.count_nonzero(self.prob > 0))

    def neglog(self) -> np.ndarray:
        """-log probabilities; masked/zero entries become +inf."""
        with np.errstate(divide="ignore"):
            return -np.log(self.prob)

    # -- invariants --------------------------------------------------------

    def letter_rows(self) -> list[int]:
        """Grapheme rows other than the boundary row (and the eps row)."""
        return [y for y in range(1, self.n_graphemes) if y != self.boundary_id]

    def check_rows(self, tol: float = 1e-9) -> None:
        sums = self.prob.sum(axis=1)
        for y in range(self.n_graphemes):
            if not self.allowed[y].any():
                continue
            if abs(sums[y] - 1.0) > tol:
                raise AssertionError(
                    f"row {self.graphemes.token(y)!r} sums to {sums[y]!r}")
        if (self.prob[~self.allowed] != 0).any():
            raise AssertionError("masked entry has nonzero probability")

    def replace(self, prob: np.ndarray, allowed: np.ndarray | None = None) -> "LexicalModel":
        return LexicalModel(self.phones, self.graphemes, self.silence_ids,
                            self.boundary_id, prob,
                            self.allowed if allowed is None else allowed)


def init_lexical(phones: SymbolTable, graphemes: SymbolTable,
                 silence: list[str], boundary: str = "<wb>",
                 insertion_mass: float = 0.01) -> LexicalModel:
    """Uniform lexical model over all structurally permitted operations."""
    for s in silence:
        if s not in phones:
            raise ConfigError(f"silence phone {s!r} not in phone table")
    if boundary not in graphemes:
        raise ConfigError(f"boundary grapheme {boundary!r} not in grapheme table")
    silence_ids = frozenset(phones.id(s) for s in silence)
    boundary_id = graphemes.id(boundary)
    ng, np_ = len(graphemes), len(phones)
    nonsil = [x for x in range(1, np_) if x not in silence_ids]

    allowed = np.zeros((ng, np_), dtype=bool)
    prob = np.zeros((ng, np_))
    # deletion row: non-silence phones only
    for x in nonsil:
        allowed[0, x] = True
        prob[0, x] = 1.0 / len(nonsil)
    # boundary row: silence phones only
    if silence_ids:
        for x in silence_ids:
            allowed[boundary_id, x] = True
            prob[boundary_id, x] = 1.0 / len(silence_ids)
    # letter rows: insertion entry plus all non-silence substitutions
    for y in range(1, ng):
        if y == boundary_id:
            continue
        allowed[y, 0] = True
        prob[y, 0] = insertion_mass
        share = (1.0 - insertion_mass) / len(nonsil)
        for x in nonsil:
            allowed[y, x] = True
            prob[y, x] = share
    return LexicalModel(phones, graphemes, silence_ids, boundary_id, prob, allowed)


def smooth(lex: LexicalModel, alpha: float) -> LexicalModel:
    """Interpolate each letter row toward uniform over the non-silence
    phone set: P' = alpha * P + (1 - alpha) / |X| on unpruned entries,
    with the insertion entry scaled by alpha.  Rows renormalize to 1.
    """
    if not 0 < alpha <= 1:
        raise ConfigError(f"alpha must be in (0, 1], got {alpha}")
    prob = lex.prob.copy()
    n_nonsil = lex.n_phones - 1 - len(lex.silence_ids)
    floor = (1.0 - alpha) / n_nonsil
    for y in lex.letter_rows():
        row = prob[y]
        mask = lex.allowed[y].copy()
        mask[0] = False
        row[mask] = alpha * row[mask] + floor
        if lex.allowed[y, 0]:
            row[0] = alpha * row[0]
        total = row.sum()
        if total > 0:
            row /= total
    out = lex.replace(prob)
    out.check_rows()
    return out


def prune_lexical(lex: LexicalModel, k: int) -> LexicalModel:
    """Keep each letter row's k most probable phones (ties to the lower
    phone id), dropping the rest from the support and renormalizing.
    Insertion entries and the silence-structure rows are untouched."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    prob = lex.prob.copy()
    allowed = lex.allowed.copy()
    for y in lex.letter_rows():
        cols = [x for x in range(1, lex.n_phones) if allowed[y, x]]
        if len(cols) <= k:
            continue
        cols.sort(key=lambda x: (-prob[y, x], x))
        for x in cols[k:]:
            allowed[y, x] = False
            prob[y, x] = 0.0
        total = prob[y].sum()
        if total > 0:
            prob[y] /= total
    out = lex.replace(prob, allowed)
    out.check_rows()
    return out


def build_edit_fst(lex: LexicalModel, ali: AlignmentModel) -> Wfst:
    """The pre-composed lexical+alignment edit transducer.

    Three states (base, after-insertion, after-deletion), all final.
    Substitutions re-enter base from anywhere; insertions and deletions
    leave base only, so no two consecutive operations are both
    insertions or both deletions.  Every arc carries the tag of the
    lexical entry its weight was drawn from.
    """
    f = Wfst(lex.phones, lex.graphemes, TROPICAL)
    f.add_states(3)
    f.set_start(BASE)
    for s in (BASE, AFTER_INS, AFTER_DEL):
        f.set_final(s, 0.0)
    w_sub = -math.log(ali.substitute) if ali.substitute > 0 else None
    w_ins = -math.log(ali.insert) if ali.insert > 0 else None
    w_del = -math.log(ali.delete) if ali.delete > 0 else None
    for y in range(1, lex.n_graphemes):
        for x in range(1, lex.n_phones):
            p = lex.prob[y, x]
            if p <= 0 or w_sub is None:
                continue
            w = w_sub - math.log(p)
            t = lex.tag(y, x)
            for s in (BASE, AFTER_INS, AFTER_DEL):
                f.add_arc(s, x, y, w, BASE, t)
        p = lex.prob[y, 0]
        if p > 0 and w_ins is not None:
            f.add_arc(BASE, EPS, y, w_ins - math.log(p), AFTER_INS, lex.tag(y, 0))
    for x in range(1, lex.n_phones):
        p = lex.prob[0, x]
        if p > 0 and w_del is not None:
            f.add_arc(BASE, x, EPS, w_del - math.log(p), AFTER_DEL, lex.tag(0, x))
    return f


# -- serialization ----------------------------------------------------------

def save_lexical(lex: LexicalModel, ali: AlignmentModel, directory,
                 name: str = "lexical") -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{name}.tsv", "w", encoding="utf-8") as fh:
        for y in range(lex.n_graphemes):
            for x in range(lex.n_phones):
                if lex.allowed[y, x]:
                    fh.write(f"{lex.graphemes.token(y)}\t{lex.phones.token(x)}\t"
                             f"{float(lex.prob[y, x])!r}\n")
    meta = {
        "phones": list(lex.phones)[1:],
        "graphemes": list(lex.graphemes)[1:],
        "silence": sorted(lex.phones.token(i) for i in lex.silence_ids),
        "boundary": lex.graphemes.token(lex.boundary_id),
        "alignment": ali.as_dict(),
    }
    with open(directory / f"{name}.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_lexical(directory, name: str = "lexical") -> tuple[LexicalModel, AlignmentModel]:
    directory = Path(directory)
    with open(directory / f"{name}.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    phones = SymbolTable(meta["phones"])
    graphemes = SymbolTable(meta["graphemes"])
    ng, np_ = len(graphemes), len(phones)
    prob = np.zeros((ng, np_))
    allowed = np.zeros((ng, np_), dtype=bool)
    with open(directory / f"{name}.tsv", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            g, p, v = line.split("\t")
            y = EPS if g == EPS_TOKEN else graphemes.id(g)
            x = EPS if p == EPS_TOKEN else phones.id(p)
            prob[y, x] = float(v)
            allowed[y, x] = True
    lex = LexicalModel(phones, graphemes,
                       frozenset(phones.id(s) for s in meta["silence"]),
                       graphemes.id(meta["boundary"]), prob, allowed)
    return lex, AlignmentModel.from_dict(meta["alignment"])
