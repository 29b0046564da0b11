"""Word-stage timing + degradation ordering + data-scaling probes."""
import time

import numpy as np

from decipher_fst.engine import Stage, TrainingSchedule, decipher, train
from decipher_fst.lattice import ExplicitSource, LexiconWordSource
from decipher_fst.lexical import AlignmentModel, init_lexical
from decipher_fst.lm_fst import lm_to_fst
from decipher_fst.metrics import error_rate
from decipher_fst.ngram import train_char_lm, train_word_lm
from decipher_fst.symbols import SymbolTable
from decipher_fst.synth import (ChannelNoise, ambiguous_table, bijective_table,
                                gen_cipher, make_text_corpus,
                                select_shortest_indices)
from decipher_fst.textnorm import WORD_BOUNDARY


def run(table, noise, p_sil, n_utts, schedule, seed_text=12, word_stage=False,
        beam_override=None, lm_text=None, verbose=True):
    lm_text = lm_text or make_text_corpus(11, 3000)
    pool_text = make_text_corpus(seed_text, 1000)
    held_text = make_text_corpus(13, 200)
    pool_phones, pool_refs = gen_cipher(pool_text, table, noise, p_sil)
    held_phones, held_refs = gen_cipher(held_text, table, noise, p_sil)
    graphemes = SymbolTable(table.grapheme_inventory() + [WORD_BOUNDARY])
    phones = SymbolTable(table.phone_inventory())
    lms = {}
    for n in (2, 3, 4, 5):
        lms[f"char-{n}"] = lm_to_fst(train_char_lm(lm_text, n), graphemes)
    if word_stage:
        wlm = train_word_lm(lm_text, 3, vocab_limit=100000)
        wfst = lm_to_fst(wlm)
        lms["word-3"] = LexiconWordSource(wfst, graphemes)
    idx = select_shortest_indices([len(p) for p in pool_phones], n_utts)
    corpus = [phones.ids(pool_phones[i]) for i in idx]
    lex = init_lexical(phones, graphemes, [table.silence_phone])
    ali = AlignmentModel()
    if beam_override is not None:
        for st in schedule.stages:
            st.beam = beam_override
    logs = []
    t0 = time.time()
    stage_t = {}
    last = [t0]
    def sink(rec):
        now = time.time()
        stage_t.setdefault(rec["stage"], []).append(now - last[0])
        last[0] = now
        logs.append(rec)
    lex = train(schedule, corpus, lex, ali, lms, log_sink=sink)
    t_train = time.time() - t0
    # decode with the strongest stage's machine
    g_decode = lms["word-3"] if word_stage else lms["char-5"]
    beam = 10.0 if word_stage else None
    t0 = time.time()
    total = None
    src = g_decode if word_stage else ExplicitSource(g_decode)
    for ph, ref in zip(held_phones, held_refs):
        res = decipher(lex, ali, src, phones.ids(ph), beam=beam)
        hyp = [graphemes.token(t) for t in res.graphemes] if res else []
        rep = error_rate(ref, hyp, "char")
        total = rep if total is None else total + rep
    t_dec = time.time() - t0
    if verbose:
        for st, ts in stage_t.items():
            print(f"    {st}: {sum(ts):.1f}s/{len(ts)}it")
        print(f"  train {t_train:.1f}s decode {t_dec:.1f}s  CER {total.rate:.4f}"
              f" ({total.summary()})")
        mono_ok = True
        by_stage = {}
        for rec in logs:
            by_stage.setdefault(rec["stage"], []).append(rec["loglik"])
        for st_name, lls in by_stage.items():
            for a, b in zip(lls, lls[1:]):
                if b < a - 1e-6 * max(1.0, abs(a)):
                    mono_ok = False
                    print(f"    MONOTONICITY VIOLATION in {st_name}: {a} -> {b}")
        print(f"  monotone: {mono_ok}")
    return total.rate


def char_sched():
    return TrainingSchedule([
        Stage(lm="char-2", iterations=10),
        Stage(lm="char-3", iterations=10, prune_k=10),
        Stage(lm="char-4", iterations=10),
        Stage(lm="char-5", iterations=10),
    ])


def full_sched(word_beam=10.0):
    return TrainingSchedule([
        Stage(lm="char-2", iterations=10),
        Stage(lm="char-3", iterations=10, prune_k=10),
        Stage(lm="char-4", iterations=10),
        Stage(lm="char-5", iterations=10),
        Stage(lm="word-3", iterations=10, smooth_alpha=0.9, beam=word_beam),
        Stage(smooth_alpha=0.9),
    ])


print("== full schedule incl word stage (beam=10), bijective noiseless ==")
tAll = time.time()
run(bijective_table(), ChannelNoise(seed=5), 1.0, 200, full_sched(), word_stage=True)
print(f"total {time.time()-tAll:.1f}s")

print("== word stage at beam=inf (criterion 2 condition) ==")
tAll = time.time()
run(bijective_table(), ChannelNoise(seed=5), 1.0, 200, full_sched(None),
    word_stage=True)
print(f"total {time.time()-tAll:.1f}s")
