"""Generic WFST operations against brute-force oracles."""

import math
import random

import pytest

from decipher_fst.fst import (ConfigError, CyclicMachineError, Wfst, arc_sort,
                              compose, compose3, forward_backward,
                              linear_acceptor, shortest_path, trim)
from decipher_fst.semirings import INF, LOG, TROPICAL
from decipher_fst.symbols import EPS, SymbolTable

from conftest import (SYMS, compose_oracle, enumerate_label_paths, logsum,
                      random_acyclic_machine, relation_weights)


def identity_machine(syms, semiring=TROPICAL):
    f = Wfst(syms, syms, semiring)
    s = f.add_state()
    f.set_start(s)
    f.set_final(s, 0.0)
    for tok, tid in syms.items():
        if tid != EPS:
            f.add_arc(s, tid, tid, 0.0, s)
    return f


# -- compose ---------------------------------------------------------------

def test_compose_identity():
    acc = linear_acceptor(["a", "b"], SYMS)
    out = compose(acc, identity_machine(SYMS))
    assert relation_weights(out, TROPICAL) == relation_weights(acc, TROPICAL)


def test_compose_single_arcs_weights_add():
    a = Wfst(SYMS, SYMS, TROPICAL)
    a.add_states(2)
    a.set_start(0)
    a.set_final(1, 0.0)
    a.add_arc(0, SYMS.id("a"), SYMS.id("b"), 1.0, 1)
    b = Wfst(SYMS, SYMS, TROPICAL)
    b.add_states(2)
    b.set_start(0)
    b.set_final(1, 0.0)
    b.add_arc(0, SYMS.id("b"), SYMS.id("c"), 2.0, 1)
    out = compose(a, b)
    rel = relation_weights(out, TROPICAL)
    assert rel == {((SYMS.id("a"),), (SYMS.id("c"),)): pytest.approx(3.0)}


def test_compose_symbol_table_mismatch():
    other = SymbolTable(["x"])
    a = linear_acceptor(["a"], SYMS)
    b = linear_acceptor(["x"], other)
    with pytest.raises(ConfigError):
        compose(a, b)


@pytest.mark.parametrize("semiring", [TROPICAL, LOG])
def test_compose_matches_path_pair_oracle(semiring):
    rng = random.Random(7)
    for trial in range(120):
        a = random_acyclic_machine(rng, semiring, max_states=4)
        b = random_acyclic_machine(rng, semiring, max_states=4)
        got = relation_weights(compose(a, b), semiring)
        want = compose_oracle(a, b, semiring)
        assert set(got) == set(want), f"trial {trial}: path sets differ"
        for k in want:
            assert got[k] == pytest.approx(want[k], abs=1e-9), f"trial {trial}"


# -- compose3 ----------------------------------------------------------------

def _random_triple(rng, semiring):
    x = random_acyclic_machine(rng, semiring, max_states=4, eps_prob=0.0)
    la = random_acyclic_machine(rng, semiring, max_states=4)
    g = random_acyclic_machine(rng, semiring, max_states=4)
    return x, la, g


@pytest.mark.parametrize("semiring", [TROPICAL, LOG])
def test_compose3_no_beam_equals_sequential(semiring):
    rng = random.Random(11)
    for _ in range(60):
        x, la, g = _random_triple(rng, semiring)
        got = relation_weights(compose3(x, la, g), semiring)
        want = relation_weights(compose(compose(x, la), g), semiring)
        assert set(got) == set(want)
        for k in want:
            assert got[k] == pytest.approx(want[k], abs=1e-9)


def test_compose3_infinite_beam_same_best_path():
    rng = random.Random(13)
    hits = 0
    for _ in range(60):
        x, la, g = _random_triple(rng, TROPICAL)
        best_seq = shortest_path(compose(compose(x, la), g))
        best3 = shortest_path(compose3(x, la, g, beam=INF))
        if best_seq is None:
            assert best3 is None
        else:
            hits += 1
            assert best3.weight == pytest.approx(best_seq.weight, abs=1e-9)
    assert hits > 10


def test_compose3_beam_prunes_soundly():
    # every within-beam path survives; every surviving arc lies on some
    # within-beam path
    rng = random.Random(17)
    beam = 2.0
    checked = 0
    for _ in range(80):
        x, la, g = _random_triple(rng, TROPICAL)
        full = compose(compose(x, la), g)
        paths = list(enumerate_label_paths(full))
        if not paths:
            continue
        best = min(w for _, _, w, _ in paths)
        within = {(il, ol, round(w, 9)) for il, ol, w, _ in paths
                  if w <= best + beam}
        pruned = compose3(x, la, g, beam=beam)
        kept = {(il, ol, round(w, 9))
                for il, ol, w, _ in enumerate_label_paths(pruned)}
        assert within <= kept
        checked += 1
    assert checked > 20


def test_compose3_rejects_bad_beam():
    x, la, g = _random_triple(random.Random(1), TROPICAL)
    with pytest.raises(ConfigError):
        compose3(x, la, g, beam=0.0)


# -- shortest path -----------------------------------------------------------

def test_shortest_path_parallel_arcs():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(2)
    f.set_start(0)
    f.set_final(1, 0.0)
    f.add_arc(0, SYMS.id("a"), SYMS.id("a"), 1.0, 1)
    f.add_arc(0, SYMS.id("b"), SYMS.id("b"), 2.0, 1)
    p = shortest_path(f)
    assert p.weight == pytest.approx(1.0)
    assert p.ilabels == [SYMS.id("a")]


def test_shortest_path_single_chain():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(3)
    f.set_start(0)
    f.set_final(2, 0.0)
    f.add_arc(0, 1, 1, 0.5, 1)
    f.add_arc(1, 2, 2, 0.25, 2)
    p = shortest_path(f)
    assert p.weight == pytest.approx(0.75)
    assert p.ilabels == [1, 2]


def test_shortest_path_empty_signal():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(1)
    f.set_start(0)  # no finals
    assert shortest_path(f) is None


def test_shortest_path_matches_enumeration():
    rng = random.Random(23)
    for _ in range(200):
        f = random_acyclic_machine(rng, TROPICAL, max_states=8, max_arcs=16)
        paths = list(enumerate_label_paths(f))
        got = shortest_path(f)
        if not paths:
            assert got is None
            continue
        best = min(w for _, _, w, _ in paths)
        assert got.weight == pytest.approx(best, abs=1e-9)
        # the returned labels correspond to a real path of that weight
        match = [w for il, ol, w, _ in paths
                 if il == tuple(got.ilabels) and ol == tuple(got.olabels)]
        assert min(match) == pytest.approx(got.weight, abs=1e-9)


# -- forward-backward ---------------------------------------------------------

def fb_oracle(f):
    """Total mass and per-arc posteriors by path enumeration."""
    paths = list(enumerate_label_paths(f))
    if not paths:
        return None
    total = logsum([w for _, _, w, _ in paths])
    mass = {}
    for _, _, w, arcs in paths:
        for key in arcs:
            mass.setdefault(key, []).append(w)
    post = {k: math.exp(total - logsum(ws)) for k, ws in mass.items()}
    return total, post


def test_fb_single_path():
    f = Wfst(SYMS, SYMS, LOG)
    f.add_states(3)
    f.set_start(0)
    f.set_final(2, 0.5)
    f.add_arc(0, 1, 1, 1.0, 1)
    f.add_arc(1, 2, 2, 0.25, 2)
    res = forward_backward(f)
    assert res.total == pytest.approx(1.75)
    assert all(p == pytest.approx(1.0) for p in res.posteriors.values())


def test_fb_two_equal_branches():
    f = Wfst(SYMS, SYMS, LOG)
    f.add_states(2)
    f.set_start(0)
    f.set_final(1, 0.0)
    f.add_arc(0, 1, 1, 1.0, 1)
    f.add_arc(0, 2, 2, 1.0, 1)
    res = forward_backward(f)
    assert res.posteriors[(0, 0)] == pytest.approx(0.5)
    assert res.posteriors[(0, 1)] == pytest.approx(0.5)


def test_fb_requires_log_semiring():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(1)
    f.set_start(0)
    f.set_final(0, 0.0)
    with pytest.raises(ConfigError):
        forward_backward(f)


def test_fb_rejects_cycles():
    f = Wfst(SYMS, SYMS, LOG)
    f.add_states(2)
    f.set_start(0)
    f.set_final(1, 0.0)
    f.add_arc(0, 1, 1, 1.0, 1)
    f.add_arc(1, 1, 1, 1.0, 0)
    with pytest.raises(CyclicMachineError):
        forward_backward(f)


def test_fb_empty_machine_signal():
    f = Wfst(SYMS, SYMS, LOG)
    f.add_states(1)
    f.set_start(0)
    assert forward_backward(f) is None


def test_fb_matches_enumeration_oracle():
    rng = random.Random(31)
    for _ in range(150):
        f = random_acyclic_machine(rng, LOG, max_states=6, max_arcs=12)
        want = fb_oracle(f)
        got = forward_backward(f)
        if want is None:
            assert got is None
            continue
        total, post = want
        assert got.total == pytest.approx(total, abs=1e-9)
        for key, p in post.items():
            assert got.posteriors[key] == pytest.approx(p, abs=1e-9)
        # arcs not on any accepting path have posterior 0
        for key, p in got.posteriors.items():
            if key not in post:
                assert p == 0.0


def test_fb_flow_conservation():
    rng = random.Random(37)
    for _ in range(60):
        f = random_acyclic_machine(rng, LOG, max_states=6, max_arcs=12)
        got = forward_backward(f)
        if got is None:
            continue
        inflow = [0.0] * f.num_states
        outflow = [0.0] * f.num_states
        for (s, i), p in got.posteriors.items():
            outflow[s] += p
            inflow[f.arcs[s][i].dst] += p
        for s in range(f.num_states):
            if s == f.start or s in f.finals:
                continue
            assert inflow[s] == pytest.approx(outflow[s], abs=1e-6)


# -- trim and arc_sort ---------------------------------------------------------

def test_trim_removes_unreachable():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(3)
    f.set_start(0)
    f.set_final(1, 0.0)
    f.add_arc(0, 1, 1, 0.5, 1)
    f.add_arc(2, 1, 1, 0.5, 1)  # state 2 unreachable
    out = trim(f)
    assert out.num_states == 2
    assert relation_weights(out, TROPICAL) == relation_weights(f, TROPICAL)


def test_trim_idempotent_on_trim_machine():
    rng = random.Random(41)
    for _ in range(40):
        f = trim(random_acyclic_machine(rng, TROPICAL))
        if f.start is None:
            continue
        assert trim(f) == f


def test_trim_no_finals_gives_empty():
    f = Wfst(SYMS, SYMS, TROPICAL)
    f.add_states(2)
    f.set_start(0)
    f.add_arc(0, 1, 1, 0.5, 1)
    out = trim(f)
    assert out.num_states == 0 and out.is_empty()


def test_arc_sort_language_unchanged_and_sorted():
    rng = random.Random(43)
    for _ in range(40):
        f = random_acyclic_machine(rng, TROPICAL)
        s = arc_sort(f, "input")
        assert relation_weights(s, TROPICAL) == relation_weights(f, TROPICAL)
        for arcs in s.arcs:
            labels = [a.ilabel for a in arcs]
            assert labels == sorted(labels)
        assert arc_sort(s, "input") == s


def test_arc_sort_then_compose_equivalent():
    rng = random.Random(47)
    a = random_acyclic_machine(rng, TROPICAL)
    b = random_acyclic_machine(rng, TROPICAL)
    assert (relation_weights(compose(a, arc_sort(b, "input")), TROPICAL)
            == relation_weights(compose(a, b), TROPICAL))
