"""Error-rate scoring: WER/CER via Levenshtein alignment, plus the
lattice oracle rate (minimum error over any lattice path).

Counts come from the minimal-cost alignment that maximizes matches, which
makes the substitution/insertion/deletion split unique and symmetric
(swapping reference and hypothesis swaps I and D exactly).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

from .fst import Arc, Lattice, Wfst, compose
from .semirings import INF, TROPICAL
from .symbols import EPS, SymbolTable
from .textnorm import line_to_graphemes


@dataclass
class ErrorReport:
    unit: str
    substitutions: int
    insertions: int
    deletions: int
    ref_length: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def rate(self) -> float:
        if self.ref_length == 0:
            return 0.0 if self.errors == 0 else float("inf")
        return self.errors / self.ref_length

    def to_json(self) -> str:
        return json.dumps({"unit": self.unit, "S": self.substitutions,
                           "I": self.insertions, "D": self.deletions,
                           "N": self.ref_length, "rate": self.rate})

    def summary(self) -> str:
        return (f"{self.unit}: rate={self.rate:.4f} "
                f"(S={self.substitutions} I={self.insertions} "
                f"D={self.deletions} N={self.ref_length})")

    def __add__(self, other: "ErrorReport") -> "ErrorReport":
        if self.unit != other.unit:
            raise ValueError("cannot add reports for different units")
        return ErrorReport(self.unit,
                           self.substitutions + other.substitutions,
                           self.insertions + other.insertions,
                           self.deletions + other.deletions,
                           self.ref_length + other.ref_length)


def _distance_and_matches(ref: list, hyp: list) -> tuple[int, int]:
    """Minimal edit distance and, among minimal alignments, the maximal
    number of exact matches."""
    R, H = len(ref), len(hyp)
    # DP over (cost, -matches); row-wise
    prev = [(j, 0) for j in range(H + 1)]
    for i in range(1, R + 1):
        cur = [(i, 0)]
        ri = ref[i - 1]
        for j in range(1, H + 1):
            if ri == hyp[j - 1]:
                diag = (prev[j - 1][0], prev[j - 1][1] - 1)
            else:
                diag = (prev[j - 1][0] + 1, prev[j - 1][1])
            up = (prev[j][0] + 1, prev[j][1])
            left = (cur[j - 1][0] + 1, cur[j - 1][1])
            cur.append(min(diag, up, left))
        prev = cur
    cost, neg_matches = prev[H]
    return cost, -neg_matches


def error_rate(ref: list, hyp: list, unit: str = "word") -> ErrorReport:
    """Levenshtein error report with unit costs.

    `ref` and `hyp` are token lists appropriate to the unit (use
    `tokenize` to derive them from text lines; char tokens include the
    word-boundary marker, scored like any other character).
    """
    if unit not in ("word", "char", "phone"):
        raise ValueError(f"unknown unit {unit!r}")
    T, M = _distance_and_matches(ref, hyp)
    R, H = len(ref), len(hyp)
    S = R + H - 2 * M - T
    I = (T - S + H - R) // 2
    D = (T - S - H + R) // 2
    return ErrorReport(unit, S, I, D, R)


def tokenize(line: str, unit: str) -> list[str]:
    """Unit-appropriate tokens for a text line."""
    if unit == "char":
        return line_to_graphemes(line)
    return line.split()


def error_rate_lines(ref_line: str, hyp_line: str, unit: str) -> ErrorReport:
    return error_rate(tokenize(ref_line, unit), tokenize(hyp_line, unit), unit)


# -- oracle rate over a lattice --------------------------------------------

def _edit_machine(ref_ids: list[int], syms: SymbolTable) -> Wfst:
    """Edit-distance transducer pre-composed with the reference acceptor:
    state = reference position; arcs carry unit costs."""
    f = Wfst(syms, syms, TROPICAL)
    n = len(ref_ids)
    f.add_states(n + 1)
    f.set_start(0)
    f.set_final(n, 0.0)
    alphabet = [tid for _, tid in syms.items() if tid != EPS]
    for j in range(n + 1):
        for tid in alphabet:
            f.add_arc(j, tid, EPS, 1.0, j)        # hypothesis insertion
        if j < n:
            r = ref_ids[j]
            f.add_arc(j, EPS, r, 1.0, j + 1)      # deletion from hypothesis
            for tid in alphabet:
                f.add_arc(j, tid, r, 0.0 if tid == r else 1.0, j + 1)
    return f


def output_projection(lattice: Lattice) -> Wfst:
    """Unweighted acceptor over the lattice's output strings."""
    out = Wfst(lattice.osyms, lattice.osyms, TROPICAL)
    out.add_states(lattice.num_states)
    out.start = lattice.start
    for s in lattice.finals:
        out.set_final(s, 0.0)
    for s, a in lattice.all_arcs():
        out.add_arc(s, a.olabel, a.olabel, 0.0, a.dst)
    return out


def oracle_error_rate(lattice: Lattice, ref: list, unit: str = "char") -> ErrorReport | None:
    """Minimum error rate achievable by any output string in the lattice.

    Returns None for an empty lattice.  Counts follow one minimal-cost
    alignment of the best lattice path.
    """
    if lattice.start is None or not lattice.finals:
        return None
    syms = lattice.osyms
    ref_ids = [syms.id(t) if isinstance(t, str) else t for t in ref]
    proj = output_projection(lattice)
    edit = _edit_machine(ref_ids, syms)
    aligned = compose(proj, edit)
    path = _best_path_labels(aligned)
    if path is None:
        return None
    S = I = D = 0
    for il, ol in path:
        if il != EPS and ol != EPS and il != ol:
            S += 1
        elif il != EPS and ol == EPS:
            I += 1
        elif il == EPS and ol != EPS:
            D += 1
    return ErrorReport(unit, S, I, D, len(ref_ids))


def _best_path_labels(f: Wfst):
    """(ilabel, olabel) pairs along the tropical best path, epsilons kept."""
    if f.start is None or not f.finals:
        return None
    n = f.num_states
    dist = [INF] * n
    parent: list[tuple[int, Arc] | None] = [None] * n
    dist[f.start] = 0.0
    heap = [(0.0, f.start)]
    settled = [False] * n
    while heap:
        d, s = heapq.heappop(heap)
        if settled[s]:
            continue
        settled[s] = True
        for a in f.arcs[s]:
            nd = d + a.weight
            if nd < dist[a.dst]:
                dist[a.dst] = nd
                parent[a.dst] = (s, a)
                heapq.heappush(heap, (nd, a.dst))
    best_state, best = None, INF
    for s in sorted(f.finals):
        t = dist[s] + f.finals[s]
        if t < best:
            best, best_state = t, s
    if best_state is None or best == INF:
        return None
    pairs = []
    s = best_state
    while parent[s] is not None:
        ps, arc = parent[s]
        pairs.append((arc.ilabel, arc.olabel))
        s = ps
    pairs.reverse()
    return pairs
