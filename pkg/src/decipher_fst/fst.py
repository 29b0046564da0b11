"""Weighted finite-state transducers and the algorithms built on them.

A Wfst stores integer-indexed states, per-state arc lists and final
weights, with symbol tables mapping label ids to tokens (id 0 = epsilon).
All algorithms treat their inputs as immutable and return new machines;
a Wfst is safe to share across threads once construction is done.

Arc weights are -log probabilities; the machine's semiring (tropical or
log) fixes how weights of alternative paths combine.
"""

from __future__ import annotations

import heapq
import math
from typing import NamedTuple

from .semirings import INF, LOG, TROPICAL, Semiring
from .symbols import EPS, SymbolTable


class ConfigError(ValueError):
    """Raised when operands cannot legally be combined (e.g. symbol-table
    mismatch, invalid beam)."""


class CyclicMachineError(ValueError):
    """Raised when an algorithm requiring acyclic input sees a cycle."""


class Arc(NamedTuple):
    ilabel: int
    olabel: int
    weight: float
    dst: int
    tag: int | None = None  # lexical-parameter id the weight was drawn from


class Wfst:
    def __init__(self, isyms: SymbolTable, osyms: SymbolTable | None = None,
                 semiring: Semiring = TROPICAL):
        self.isyms = isyms
        self.osyms = osyms if osyms is not None else isyms
        self.semiring = semiring
        self.start: int | None = None
        self.finals: dict[int, float] = {}
        self.arcs: list[list[Arc]] = []

    # -- construction ----------------------------------------------------

    def add_state(self) -> int:
        self.arcs.append([])
        return len(self.arcs) - 1

    def add_states(self, n: int) -> None:
        for _ in range(n):
            self.arcs.append([])

    def set_start(self, s: int) -> None:
        self.start = s

    def set_final(self, s: int, weight: float = 0.0) -> None:
        self.finals[s] = weight

    def add_arc(self, src: int, ilabel: int, olabel: int, weight: float,
                dst: int, tag: int | None = None) -> None:
        self.arcs[src].append(Arc(ilabel, olabel, weight, dst, tag))

    # -- inspection ------------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.arcs)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self.arcs)

    def is_empty(self) -> bool:
        return self.start is None or not self.finals

    def is_acceptor(self) -> bool:
        return all(a.ilabel == a.olabel for arcs in self.arcs for a in arcs)

    def all_arcs(self):
        """(src, Arc) pairs in state order."""
        for s, arcs in enumerate(self.arcs):
            for a in arcs:
                yield s, a

    def __eq__(self, other):
        if not isinstance(other, Wfst):
            return NotImplemented
        return (self.start == other.start and self.finals == other.finals
                and self.arcs == other.arcs
                and self.isyms == other.isyms and self.osyms == other.osyms
                and self.semiring.name == other.semiring.name)

    def __repr__(self):
        return (f"Wfst({self.num_states} states, {self.num_arcs} arcs, "
                f"{self.semiring.name})")

    def copy(self) -> "Wfst":
        out = Wfst(self.isyms, self.osyms, self.semiring)
        out.start = self.start
        out.finals = dict(self.finals)
        out.arcs = [list(a) for a in self.arcs]
        return out

    def as_semiring(self, semiring: Semiring) -> "Wfst":
        """Same machine read under a different semiring (weights are
        -log probabilities either way)."""
        out = self.copy()
        out.semiring = semiring
        return out


# Lattices are ordinary Wfsts produced by composition; the alias marks
# intent in signatures.
Lattice = Wfst


def linear_acceptor(tokens, syms: SymbolTable, semiring: Semiring = TROPICAL,
                    weight: float = 0.0) -> Wfst:
    """Acceptor for exactly one token string (weight on the final)."""
    f = Wfst(syms, syms, semiring)
    ids = [syms.id(t) if isinstance(t, str) else t for t in tokens]
    f.add_states(len(ids) + 1)
    f.set_start(0)
    for i, tid in enumerate(ids):
        f.add_arc(i, tid, tid, 0.0, i + 1)
    f.set_final(len(ids), weight)
    return f


# -- composition ---------------------------------------------------------
#
# Epsilon handling uses a sequencing filter: between two matched arcs,
# output-epsilon moves of the left operand must all precede input-epsilon
# moves of the right operand.  Each (left-path, right-path) pair then
# yields exactly one composed path, which is what keeps log-semiring path
# sums correct.  Filter states: 0 = free, 1 = left-only run, 2 = right-run.

def compose(a: Wfst, b: Wfst) -> Wfst:
    if a.osyms != b.isyms:
        raise ConfigError("compose: output/input symbol tables differ")
    if a.semiring.name != b.semiring.name:
        raise ConfigError("compose: semiring mismatch")
    sr = a.semiring
    out = Wfst(a.isyms, b.osyms, sr)
    if a.start is None or b.start is None:
        return out

    # Right-operand arcs indexed by input label per state.
    b_index: list[dict[int, list[Arc]]] = []
    for arcs in b.arcs:
        d: dict[int, list[Arc]] = {}
        for arc in arcs:
            d.setdefault(arc.ilabel, []).append(arc)
        b_index.append(d)

    state_id: dict[tuple[int, int, int], int] = {}
    queue: list[tuple[int, int, int]] = []

    def get_state(key):
        sid = state_id.get(key)
        if sid is None:
            sid = out.add_state()
            state_id[key] = sid
            queue.append(key)
            qa, qb, _ = key
            if qa in a.finals and qb in b.finals:
                out.set_final(sid, sr.times(a.finals[qa], b.finals[qb]))
        return sid

    out.set_start(get_state((a.start, b.start, 0)))

    while queue:
        key = queue.pop()
        qa, qb, f = key
        src = state_id[key]
        for pa in a.arcs[qa]:
            if pa.olabel == EPS:
                # left operand moves alone
                if f != 2:
                    dst = get_state((pa.dst, qb, 1))
                    out.add_arc(src, pa.ilabel, EPS, pa.weight, dst, pa.tag)
            else:
                for pb in b_index[qb].get(pa.olabel, ()):
                    tag = _merge_tags(pa.tag, pb.tag)
                    dst = get_state((pa.dst, pb.dst, 0))
                    out.add_arc(src, pa.ilabel, pb.olabel,
                                sr.times(pa.weight, pb.weight), dst, tag)
        for pb in b_index[qb].get(EPS, ()):
            # right operand moves alone
            dst = get_state((qa, pb.dst, 2))
            out.add_arc(src, EPS, pb.olabel, pb.weight, dst, pb.tag)
    return out


def _merge_tags(ta: int | None, tb: int | None) -> int | None:
    if ta is not None and tb is not None:
        raise ConfigError("compose: both operands tag the same composed arc")
    return ta if ta is not None else tb


def compose3(x: Wfst, la: Wfst, g: Wfst, beam: float | None = None) -> Lattice:
    """Three-way composition x . la . g with optional beam pruning.

    Implemented as two sequential compositions; with a finite beam, arcs
    off every path within `beam` of the best path (tropical view) are
    dropped.  The result is trimmed.
    """
    if beam is not None and not beam > 0:
        raise ConfigError("compose3: beam must be positive")
    lattice = compose(compose(x, la), g)
    if beam is not None and beam != INF:
        lattice = prune_by_beam(lattice, beam)
    return trim(lattice)


def prune_by_beam(f: Wfst, beam: float) -> Wfst:
    """Keep arcs and finals lying on some path within `beam` of the best
    path's weight, reading weights tropically."""
    fwd = _tropical_distances(f)
    bwd = _tropical_distances(f, reverse=True)
    best = INF
    for s, w in f.finals.items():
        best = min(best, fwd[s] + w)
    if best == INF:
        out = Wfst(f.isyms, f.osyms, f.semiring)
        return out
    limit = best + beam
    out = Wfst(f.isyms, f.osyms, f.semiring)
    out.add_states(f.num_states)
    out.start = f.start
    for s, w in f.finals.items():
        if fwd[s] + w <= limit:
            out.set_final(s, w)
    for s, arcs in enumerate(f.arcs):
        keep = out.arcs[s]
        for a in arcs:
            if fwd[s] + a.weight + bwd[a.dst] <= limit:
                keep.append(a)
    return out


def _tropical_distances(f: Wfst, reverse: bool = False) -> list[float]:
    """Best-path distance from the start (or to a final, if reverse).

    Dijkstra over non-negative weights; works on cyclic machines.
    """
    dist = [INF] * f.num_states
    heap: list[tuple[float, int]] = []
    if reverse:
        incoming: list[list[tuple[int, float]]] = [[] for _ in range(f.num_states)]
        for s, arcs in enumerate(f.arcs):
            for a in arcs:
                incoming[a.dst].append((s, a.weight))
        for s, w in f.finals.items():
            if w < dist[s]:
                dist[s] = w
                heapq.heappush(heap, (w, s))
    else:
        if f.start is None:
            return dist
        dist[f.start] = 0.0
        heap.append((0.0, f.start))
    while heap:
        d, s = heapq.heappop(heap)
        if d > dist[s]:
            continue
        edges = incoming[s] if reverse else [(a.dst, a.weight) for a in f.arcs[s]]
        for t, w in edges:
            nd = d + w
            if nd < dist[t]:
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return dist


# -- shortest path -------------------------------------------------------

class Path(NamedTuple):
    ilabels: list[int]
    olabels: list[int]
    weight: float


def shortest_path(f: Wfst) -> Path | None:
    """Best accepting path under the tropical reading of the weights.

    Deterministic: among equal-weight final states the lowest id wins, and
    the traced path is fixed by exploration order.  Handles negative arc
    weights (n-gram backoff machines) provided no negative cycle exists.
    Returns None when no accepting path exists.
    """
    if f.start is None or not f.finals:
        return None
    n = f.num_states
    dist = [INF] * n
    parent: list[tuple[int, Arc] | None] = [None] * n
    dist[f.start] = 0.0
    heap: list[tuple[float, int]] = [(0.0, f.start)]
    while heap:
        d, s = heapq.heappop(heap)
        if d > dist[s]:
            continue
        for a in f.arcs[s]:
            nd = d + a.weight
            if nd < dist[a.dst]:
                dist[a.dst] = nd
                parent[a.dst] = (s, a)
                heapq.heappush(heap, (nd, a.dst))
    best_state = None
    best = INF
    for s in sorted(f.finals):
        total = dist[s] + f.finals[s]
        if total < best:
            best = total
            best_state = s
    if best_state is None or best == INF:
        return None
    ilabels: list[int] = []
    olabels: list[int] = []
    s = best_state
    while parent[s] is not None:
        ps, arc = parent[s]
        if arc.ilabel != EPS:
            ilabels.append(arc.ilabel)
        if arc.olabel != EPS:
            olabels.append(arc.olabel)
        s = ps
    ilabels.reverse()
    olabels.reverse()
    return Path(ilabels, olabels, best)


# -- forward-backward ----------------------------------------------------

def topological_order(f: Wfst) -> list[int]:
    """States in topological order; raises CyclicMachineError on a cycle."""
    n = f.num_states
    indeg = [0] * n
    for arcs in f.arcs:
        for a in arcs:
            indeg[a.dst] += 1
    stack = [s for s in range(n) if indeg[s] == 0]
    order: list[int] = []
    while stack:
        s = stack.pop()
        order.append(s)
        for a in f.arcs[s]:
            indeg[a.dst] -= 1
            if indeg[a.dst] == 0:
                stack.append(a.dst)
    if len(order) != n:
        raise CyclicMachineError("machine has a cycle")
    return order


class ForwardBackward(NamedTuple):
    total: float                    # -log of the summed path mass
    posteriors: dict[tuple[int, int], float]  # (state, arc index) -> [0, 1]
    forward: list[float]
    backward: list[float]


def forward_backward(f: Lattice) -> ForwardBackward | None:
    """Arc posteriors over an acyclic log-semiring lattice.

    Returns None when the machine has no accepting path.  The forward and
    backward totals are cross-checked to 1e-6 relative.
    """
    if f.semiring.name != "log":
        raise ConfigError("forward_backward requires the log semiring")
    if f.start is None or not f.finals:
        return None
    order = topological_order(f)
    plus = LOG.plus
    n = f.num_states
    fwd = [INF] * n
    fwd[f.start] = 0.0
    for s in order:
        ws = fwd[s]
        if ws == INF:
            continue
        for a in f.arcs[s]:
            fwd[a.dst] = plus(fwd[a.dst], ws + a.weight)
    total_f = INF
    for s, w in f.finals.items():
        total_f = plus(total_f, fwd[s] + w)
    if total_f == INF:
        return None
    bwd = [INF] * n
    for s, w in f.finals.items():
        bwd[s] = w
    for s in reversed(order):
        acc = bwd[s]
        for a in f.arcs[s]:
            wb = bwd[a.dst]
            if wb != INF:
                acc = plus(acc, a.weight + wb)
        bwd[s] = acc
    total_b = bwd[f.start]
    if abs(total_b - total_f) > 1e-6 * max(1.0, abs(total_f)):
        raise AssertionError(
            f"forward/backward totals disagree: {total_f} vs {total_b}")
    posteriors: dict[tuple[int, int], float] = {}
    for s in range(n):
        ws = fwd[s]
        if ws == INF:
            continue
        for i, a in enumerate(f.arcs[s]):
            wb = bwd[a.dst]
            if wb == INF:
                posteriors[(s, i)] = 0.0
            else:
                posteriors[(s, i)] = min(1.0, math.exp(total_f - (ws + a.weight + wb)))
    return ForwardBackward(total_f, posteriors, fwd, bwd)


# -- trimming and sorting ------------------------------------------------

def trim(f: Wfst) -> Wfst:
    """Drop states not on any start-to-final path, preserving state order."""
    out = Wfst(f.isyms, f.osyms, f.semiring)
    if f.start is None or not f.finals:
        return out
    n = f.num_states
    reach = [False] * n
    stack = [f.start]
    reach[f.start] = True
    while stack:
        s = stack.pop()
        for a in f.arcs[s]:
            if not reach[a.dst]:
                reach[a.dst] = True
                stack.append(a.dst)
    coreach = [False] * n
    incoming: list[list[int]] = [[] for _ in range(n)]
    for s, arcs in enumerate(f.arcs):
        for a in arcs:
            incoming[a.dst].append(s)
    stack = [s for s in f.finals if reach[s]]
    for s in stack:
        coreach[s] = True
    while stack:
        s = stack.pop()
        for p in incoming[s]:
            if not coreach[p]:
                coreach[p] = True
                stack.append(p)
    keep = [s for s in range(n) if reach[s] and coreach[s]]
    if not keep:
        return out
    remap = {s: i for i, s in enumerate(keep)}
    out.add_states(len(keep))
    out.set_start(remap[f.start])
    for s in keep:
        ns = remap[s]
        if s in f.finals:
            out.set_final(ns, f.finals[s])
        for a in f.arcs[s]:
            if a.dst in remap:
                out.add_arc(ns, a.ilabel, a.olabel, a.weight, remap[a.dst], a.tag)
    return out


def arc_sort(f: Wfst, by: str = "input") -> Wfst:
    """Sort each state's arcs by the chosen label (stable)."""
    if by not in ("input", "output"):
        raise ConfigError(f"arc_sort: by must be 'input' or 'output', got {by!r}")
    key = (lambda a: a.ilabel) if by == "input" else (lambda a: a.olabel)
    out = f.copy()
    out.arcs = [sorted(arcs, key=key) for arcs in f.arcs]
    return out


# -- path enumeration (used for small-machine checks and oracles) --------

def enumerate_paths(f: Wfst, max_length: int = 12):
    """All accepting paths with at most `max_length` arcs.

    Yields (ilabels, olabels, weight) with epsilons stripped from the
    label sequences.  Intended for small machines only.
    """
    if f.start is None:
        return
    stack = [(f.start, (), (), 0.0, 0)]
    while stack:
        s, il, ol, w, depth = stack.pop()
        if s in f.finals:
            yield Path(list(il), list(ol), w + f.finals[s])
        if depth == max_length:
            continue
        for a in f.arcs[s]:
            nil = il if a.ilabel == EPS else il + (a.ilabel,)
            nol = ol if a.olabel == EPS else ol + (a.olabel,)
            stack.append((a.dst, nil, nol, w + a.weight, depth + 1))
