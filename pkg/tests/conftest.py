"""Shared test helpers: random machine generators and brute-force oracles.

The oracles are deliberately independent of the library's algorithms:
they enumerate paths explicitly and combine weights with local
reimplementations of the semiring operations.
"""

from __future__ import annotations

import math
import random

import pytest

from decipher_fst.fst import Wfst
from decipher_fst.semirings import INF, LOG, TROPICAL
from decipher_fst.symbols import EPS, SymbolTable

SYMS = SymbolTable(["a", "b", "c", "d"])


def logsum(values):
    """-log sum exp(-v), computed naively."""
    finite = [v for v in values if v != INF]
    if not finite:
        return INF
    m = min(finite)
    return m - math.log(sum(math.exp(m - v) for v in finite))


def random_acyclic_machine(rng: random.Random, semiring=TROPICAL,
                           max_states: int = 5, n_syms: int = 3,
                           eps_prob: float = 0.2, max_arcs: int = 10,
                           tagged: bool = False) -> Wfst:
    """Acyclic random transducer over the shared symbol table; arcs only
    run from lower to higher state ids, so path enumeration is exact."""
    n = rng.randint(2, max_states)
    f = Wfst(SYMS, SYMS, semiring)
    f.add_states(n)
    f.set_start(0)
    for t in range(1, n):
        if rng.random() < 0.6 or t == n - 1:
            f.set_final(t, round(rng.uniform(0, 1), 3))
    n_arcs = rng.randint(n - 1, max_arcs)
    tag = 0
    for i in range(n_arcs):
        src = 0 if i == 0 else rng.randrange(0, n - 1)
        dst = rng.randrange(src + 1, n)
        il = EPS if rng.random() < eps_prob else rng.randint(1, n_syms)
        ol = EPS if rng.random() < eps_prob else rng.randint(1, n_syms)
        w = round(rng.uniform(0.05, 2.5), 3)
        f.add_arc(src, il, ol, w, dst, tag if tagged else None)
        tag += 1
    return f


def enumerate_label_paths(f: Wfst, max_len: int = 16):
    """All accepting paths as (ilabels, olabels, weight, arc_ids)."""
    if f.start is None:
        return
    stack = [(f.start, (), (), 0.0, (), 0)]
    while stack:
        s, il, ol, w, arcs, depth = stack.pop()
        if s in f.finals:
            yield il, ol, w + f.finals[s], arcs
        if depth == max_len:
            continue
        for i, a in enumerate(f.arcs[s]):
            nil = il if a.ilabel == EPS else il + (a.ilabel,)
            nol = ol if a.olabel == EPS else ol + (a.olabel,)
            stack.append((a.dst, nil, nol, w + a.weight,
                          arcs + ((s, i),), depth + 1))


def relation_weights(f: Wfst, semiring, max_len: int = 16) -> dict:
    """(input string, output string) -> aggregated weight."""
    out: dict = {}
    plus = min if semiring.name == "tropical" else None
    grouped: dict = {}
    for il, ol, w, _ in enumerate_label_paths(f, max_len):
        grouped.setdefault((il, ol), []).append(w)
    for key, ws in grouped.items():
        out[key] = min(ws) if semiring.name == "tropical" else logsum(ws)
    return out


def compose_oracle(a: Wfst, b: Wfst, semiring) -> dict:
    """Brute-force composition by pairing enumerated paths of a and b."""
    grouped: dict = {}
    b_paths = list(enumerate_label_paths(b))
    for ail, aol, aw, _ in enumerate_label_paths(a):
        for bil, bol, bw, _ in b_paths:
            if aol == bil:
                grouped.setdefault((ail, bol), []).append(aw + bw)
    return {k: (min(ws) if semiring.name == "tropical" else logsum(ws))
            for k, ws in grouped.items()}


@pytest.fixture
def rng():
    return random.Random(20260811)
