"""The single-pass lattice builder against the generic composition route.

The generic route composes pairwise with the epsilon filter and runs the
dict-based forward-backward; the fast route is what training uses.  The
two must agree on total mass, per-parameter posterior mass, and best-path
weight for the same inputs.
"""

import math
import random

import numpy as np
import pytest

from decipher_fst.fst import (Wfst, compose, forward_backward, linear_acceptor,
                              shortest_path, trim)
from decipher_fst.lattice import (ExplicitSource, LexiconWordSource,
                                  build_structure)
from decipher_fst.lexical import AlignmentModel, build_edit_fst, init_lexical
from decipher_fst.lm_fst import GraphemeLexicon, build_lexicon_fst, lm_to_fst
from decipher_fst.ngram import train_char_lm, train_word_lm
from decipher_fst.semirings import INF, LOG, TROPICAL
from decipher_fst.symbols import EPS, SymbolTable
from decipher_fst.textnorm import WORD_BOUNDARY


def small_task(n_letters=3, seed=0, insertion_mass=0.05):
    rng = np.random.default_rng(seed)
    letters = "abcdefghijklmnopqrstuvwxyz"[:n_letters]
    graphemes = SymbolTable(list(letters) + [WORD_BOUNDARY])
    phones = SymbolTable([f"p{i}" for i in range(1, n_letters + 1)] + ["sil"])
    lex = init_lexical(phones, graphemes, ["sil"], insertion_mass=insertion_mass)
    # random letter rows
    prob = lex.prob.copy()
    for y in lex.letter_rows():
        row = rng.random(lex.n_phones) * lex.allowed[y]
        prob[y] = row / row.sum()
    return phones, graphemes, lex.replace(prob)


def generic_lattice(x_tokens, lex, ali, g, phones):
    acc = linear_acceptor(x_tokens, phones, LOG)
    edit = build_edit_fst(lex, ali).as_semiring(LOG)
    return trim(compose(compose(acc, edit), g.as_semiring(LOG)))


def generic_tag_posteriors(lattice, lex):
    res = forward_backward(lattice)
    if res is None:
        return None
    counts = np.zeros_like(lex.prob)
    for (s, i), p in res.posteriors.items():
        tag = lattice.arcs[s][i].tag
        if tag is not None:
            counts.ravel()[tag] += p
    return res.total, counts


def fast_tag_posteriors(x_ids, lex, ali, source):
    st = build_structure(x_ids, lex, ali, source)
    w = st.weights(lex.neglog())
    res = st.posteriors(w)
    if res is None:
        return None
    total, post = res
    counts = np.zeros_like(lex.prob)
    tagged = st.atag >= 0
    np.add.at(counts.ravel(), st.atag[tagged], post[tagged])
    return total, counts


def char_lm_fst(corpus, order, graphemes):
    return lm_to_fst(train_char_lm(corpus, order), graphemes)


CORPUS3 = ["abc ab", "cab ba", "abc ca", "ba abc", "cab ab a"]


@pytest.mark.parametrize("order", [1, 2, 3])
def test_fast_equals_generic_char_lm(order):
    phones, graphemes, lex = small_task(3, seed=order)
    ali = AlignmentModel(0.8, 0.1, 0.1)
    g = char_lm_fst(CORPUS3, order, graphemes)
    source = ExplicitSource(g)
    rng = random.Random(order)
    pool = [f"p{i}" for i in range(1, 4)]
    for trial in range(12):
        n = rng.randint(1, 5)
        toks = [rng.choice(pool) for _ in range(n)]
        if rng.random() < 0.5:
            toks.insert(rng.randrange(len(toks) + 1), "sil")
        x_ids = phones.ids(toks)
        want = generic_tag_posteriors(
            generic_lattice(toks, lex, ali, g, phones), lex)
        got = fast_tag_posteriors(x_ids, lex, ali, source)
        assert (want is None) == (got is None)
        if want is None:
            continue
        assert got[0] == pytest.approx(want[0], abs=1e-9), f"trial {trial}"
        assert np.allclose(got[1], want[1], atol=1e-9), f"trial {trial}"


def test_fast_best_path_equals_generic_shortest_path():
    phones, graphemes, lex = small_task(3, seed=9)
    ali = AlignmentModel(0.85, 0.05, 0.10)
    g = char_lm_fst(CORPUS3, 2, graphemes)
    source = ExplicitSource(g)
    rng = random.Random(5)
    pool = [f"p{i}" for i in range(1, 4)] + ["sil"]
    checked = 0
    for _ in range(15):
        toks = [rng.choice(pool) for _ in range(rng.randint(1, 5))]
        x_ids = phones.ids(toks)
        acc = linear_acceptor(toks, phones, TROPICAL)
        edit = build_edit_fst(lex, ali)
        generic = shortest_path(compose(compose(acc, edit), g))
        st = build_structure(x_ids, lex, ali, source)
        fast = st.best_path(st.weights(lex.neglog()))
        assert (generic is None) == (fast is None)
        if generic is None:
            continue
        checked += 1
        assert fast[1] == pytest.approx(generic.weight, abs=1e-9)
    assert checked >= 10


def test_fast_materialize_round_trips_through_generic_fb():
    phones, graphemes, lex = small_task(3, seed=2)
    ali = AlignmentModel(0.8, 0.1, 0.1)
    g = char_lm_fst(CORPUS3, 2, graphemes)
    source = ExplicitSource(g)
    toks = ["p1", "p2", "sil", "p3"]
    x_ids = phones.ids(toks)
    st = build_structure(x_ids, lex, ali, source)
    w = st.weights(lex.neglog())
    total, _ = st.posteriors(w)
    lat = st.materialize(w, phones, graphemes, LOG)
    res = forward_backward(lat)
    assert res.total == pytest.approx(total, abs=1e-9)


def test_beam_mask_keeps_within_beam_paths():
    phones, graphemes, lex = small_task(3, seed=4)
    ali = AlignmentModel(0.8, 0.1, 0.1)
    g = char_lm_fst(CORPUS3, 2, graphemes)
    source = ExplicitSource(g)
    toks = ["p1", "p3", "p2"]
    x_ids = phones.ids(toks)
    st = build_structure(x_ids, lex, ali, source)
    w = st.weights(lex.neglog())
    best = st.best_path(w)[1]
    masked = st.beam_mask(w, 1.5)
    lat = st.materialize(masked, phones, graphemes, TROPICAL)
    from decipher_fst.fst import enumerate_paths
    paths = list(enumerate_paths(lat, 24))
    assert paths
    assert min(p.weight for p in paths) == pytest.approx(best, abs=1e-9)
    # completeness: enumerate the unmasked lattice; every within-beam path
    # weight must still be present
    full = st.materialize(w, phones, graphemes, TROPICAL)
    want = sorted(round(p.weight, 9) for p in enumerate_paths(full, 24)
                  if p.weight <= best + 1.5)
    got = sorted(round(p.weight, 9) for p in paths if p.weight <= best + 1.5)
    assert want == got


# -- word-LM lazy machine ------------------------------------------------------

WORD_CORPUS = ["ab b ab", "b ab", "ab ab b", "b b ab", "ab b", "b ab ab"]


def word_setup(order=2):
    phones, graphemes, lex = small_task(2, seed=8)
    wlm = train_word_lm(WORD_CORPUS, order, vocab_limit=10)
    wfst = lm_to_fst(wlm)
    lexicon = GraphemeLexicon.from_words(["ab", "b"])
    lexfst = build_lexicon_fst(lexicon, graphemes, wfst.isyms)
    return phones, graphemes, lex, wfst, lexfst


@pytest.mark.parametrize("order", [1, 2])
def test_lazy_lexicon_source_matches_explicit_composition(order):
    phones, graphemes, lex, wfst, lexfst = word_setup(order)
    ali = AlignmentModel(0.8, 0.1, 0.1)
    geff = compose(lexfst, wfst)
    source = LexiconWordSource(wfst, graphemes)
    rng = random.Random(31)
    pool = ["p1", "p2", "sil"]
    agree = 0
    for trial in range(14):
        toks = [rng.choice(pool) for _ in range(rng.randint(1, 5))]
        x_ids = phones.ids(toks)
        want = generic_tag_posteriors(
            generic_lattice(toks, lex, ali, geff, phones), lex)
        got = fast_tag_posteriors(x_ids, lex, ali, source)
        assert (want is None) == (got is None), f"trial {trial}"
        if want is None:
            continue
        agree += 1
        assert got[0] == pytest.approx(want[0], abs=1e-9), f"trial {trial}"
        assert np.allclose(got[1], want[1], atol=1e-9), f"trial {trial}"
    assert agree >= 8


def test_lazy_lexicon_best_path_words():
    phones, graphemes, lex, wfst, lexfst = word_setup(2)
    # concentrate the lexical model on the identity mapping
    prob = np.zeros_like(lex.prob)
    prob[graphemes.id("a"), phones.id("p1")] = 1.0
    prob[graphemes.id("b"), phones.id("p2")] = 1.0
    prob[lex.boundary_id, phones.id("sil")] = 1.0
    prob[0] = lex.prob[0]
    lex = lex.replace(prob)
    ali = AlignmentModel(1.0, 0.0, 0.0)
    source = LexiconWordSource(wfst, graphemes)
    x_ids = phones.ids(["p1", "p2", "sil", "p2"])
    st = build_structure(x_ids, lex, ali, source)
    w = st.weights(lex.neglog())
    arc_idx, weight = st.best_path(w)
    words = [wfst.osyms.token(int(st.aol[j])) for j in arc_idx if st.aol[j] != EPS]
    assert words == ["ab", "b"]
    assert weight < INF
