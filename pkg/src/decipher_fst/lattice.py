"""Single-pass construction of decipherment lattices.

Training composes ``X . (L.A) . G`` once per utterance per EM iteration.
Doing that with generic pairwise composition is far too slow for
full-batch training, so this module builds the composed lattice directly:
the input is a linear phone acceptor, the edit model contributes a fixed
three-state skeleton, and the grapheme side is consulted through an
ArcSource (a materialized backoff acceptor, or a lexicon+word-LM machine
expanded lazily).  The result is weighted-language equivalent to the
sequential composition, including the epsilon-sequencing filter that
keeps log-semiring path sums correct; tests check that equivalence
directly.

Lattice states are (position, op-state, grapheme-state) triples where the
op-state fuses the alignment state with the composition filter:

    B0/B2: base          (B2 = just backed off; deletions forbidden)
    I0/I2: after insert  (no insert, no delete)
    D1/D2: after delete  (no insert, no delete)

Substitutions re-enter B0 and advance the position; a deletion leaves B0
only; insertions leave B0/B2 and stay in place; grapheme-side epsilon
arcs (LM backoff) move to the 2-variant.  Structures are reusable across
EM iterations: only arc weights depend on the lexical parameters.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .fst import ConfigError, Wfst, trim
from .lexical import AlignmentModel, LexicalModel
from .semirings import INF, LOG, Semiring, TROPICAL
from .symbols import EPS, SymbolTable

B0, B2, I0, I2, D1, D2 = range(6)
_CRANK = np.array([0, 1, 2, 3, 2, 3])       # intra-block topological rank
_EPS_VARIANT = np.array([B2, B2, I2, I2, D2, D2])
_CAN_INS = np.array([True, True, False, False, False, False])


class StateArcs(NamedTuple):
    """Expansion of one grapheme-side state."""
    tokens: np.ndarray    # grapheme ids consumed (int32)
    weights: np.ndarray   # -log weights (float64)
    nexts: np.ndarray     # destination grapheme-state ids (int32)
    olabels: np.ndarray   # output labels of the composed arc (int32)
    eps_weights: np.ndarray
    eps_nexts: np.ndarray
    final: float


_EMPTY_I = np.empty(0, dtype=np.int32)
_EMPTY_F = np.empty(0, dtype=np.float64)


class ExplicitSource:
    """ArcSource view of a materialized grapheme-consuming Wfst.

    Epsilon arcs must form a DAG (true of backoff acceptors); their
    longest-path depth orders epsilon moves topologically.
    """

    def __init__(self, f: Wfst):
        self.fst = f
        if f.start is None:
            raise ConfigError("grapheme machine has no start state")
        self.start = f.start
        n = f.num_states
        self._states: list[StateArcs] = []
        eps_children: list[list[int]] = [[] for _ in range(n)]
        indeg = [0] * n
        for s in range(n):
            toks, ws, nxt, olab, ew, en = [], [], [], [], [], []
            for a in f.arcs[s]:
                if a.ilabel == EPS:
                    if a.olabel != EPS:
                        raise ConfigError(
                            "grapheme machine has an eps:non-eps arc")
                    ew.append(a.weight)
                    en.append(a.dst)
                    eps_children[s].append(a.dst)
                    indeg[a.dst] += 1
                else:
                    toks.append(a.ilabel)
                    ws.append(a.weight)
                    nxt.append(a.dst)
                    olab.append(a.olabel)
            self._states.append(StateArcs(
                np.array(toks, dtype=np.int32), np.array(ws, dtype=np.float64),
                np.array(nxt, dtype=np.int32), np.array(olab, dtype=np.int32),
                np.array(ew, dtype=np.float64), np.array(en, dtype=np.int32),
                f.finals.get(s, INF)))
        # longest-path depth over the epsilon subgraph
        depth = [0] * n
        stack = [s for s in range(n) if indeg[s] == 0]
        seen = 0
        while stack:
            s = stack.pop()
            seen += 1
            for t in eps_children[s]:
                depth[t] = max(depth[t], depth[s] + 1)
                indeg[t] -= 1
                if indeg[t] == 0:
                    stack.append(t)
        if seen != n:
            raise ConfigError("grapheme machine has an epsilon cycle")
        self._depth = depth

    def expand(self, gid: int) -> StateArcs:
        return self._states[gid]

    def depth(self, gid: int) -> int:
        return self._depth[gid]


class LexiconWordSource:
    """Lazy composition of a grapheme lexicon with a word-level acceptor.

    Equivalent to composing the early-emission lexicon transducer with the
    word LM acceptor: word arcs pay the LM weight on the word's first
    grapheme, spellings continue through per-word chains, and the chain
    end either consumes the boundary grapheme (back to a root state) or
    accepts with the backoff-resolved sentence-end weight.  Mid-spelling
    backoffs lead nowhere in the filtered composition, so they are never
    generated.
    """

    def __init__(self, word_fst: Wfst, grapheme_syms: SymbolTable,
                 boundary: str = "<wb>"):
        if word_fst.start is None:
            raise ConfigError("word machine has no start state")
        self.word_fst = word_fst
        self.gsyms = grapheme_syms
        self._wb = grapheme_syms.id(boundary)
        wsyms = word_fst.osyms
        # spellings, indexed by word id; None when not realizable
        self._spelling: list[np.ndarray | None] = [None] * len(wsyms)
        for word, wid in wsyms.items():
            if wid == EPS or word.startswith("<"):
                continue
            if all(ch in grapheme_syms for ch in word):
                self._spelling[wid] = np.array(grapheme_syms.ids(list(word)),
                                               dtype=np.int32)
        n = word_fst.num_states
        self._warcs: list[tuple] = []
        for s in range(n):
            toks, ws, nxt = [], [], []
            backoff = None
            for a in word_fst.arcs[s]:
                if a.ilabel == EPS:
                    backoff = (a.weight, a.dst)
                else:
                    toks.append(a.ilabel)
                    ws.append(a.weight)
                    nxt.append(a.dst)
            self._warcs.append((toks, ws, nxt, backoff))
        # backoff-resolved -log P(end | state), counting direct and
        # backed-off endings like the explicit epsilon machine does
        self._lm_depth = _eps_depths(word_fst)
        self._closure_final = [INF] * n
        for s in sorted(range(n), key=lambda s: -self._lm_depth[s]):
            w = word_fst.finals.get(s, INF)
            backoff = self._warcs[s][3]
            if backoff is not None:
                via = backoff[0] + self._closure_final[backoff[1]]
                w = LOG.plus(w, via)
            self._closure_final[s] = w

        self._ids: dict[tuple, int] = {}
        self._cache: list[StateArcs] = []
        self._depths: list[int] = []
        self._keys: list[tuple] = []
        self.start = self._intern(("root", word_fst.start))

    def _intern(self, key: tuple) -> int:
        gid = self._ids.get(key)
        if gid is None:
            gid = len(self._keys)
            self._ids[key] = gid
            self._keys.append(key)
            self._cache.append(None)  # type: ignore[arg-type]
            self._depths.append(self._lm_depth[key[1]] if key[0] == "root" else 0)
        return gid

    def expand(self, gid: int) -> StateArcs:
        got = self._cache[gid]
        if got is not None:
            return got
        key = self._keys[gid]
        if key[0] == "root":
            h = key[1]
            toks, ws, nxt, backoff = self._warcs[h]
            ftoks, fws, fnxt, folab = [], [], [], []
            for wid, w, h2 in zip(toks, ws, nxt):
                spelling = self._spelling[wid]
                if spelling is None:
                    continue
                ftoks.append(spelling[0])
                fws.append(w)
                folab.append(wid)
                if len(spelling) == 1:
                    fnxt.append(self._intern(("end", h2, wid)))
                else:
                    fnxt.append(self._intern(("mid", h2, wid, 1)))
            if backoff is not None:
                ew = np.array([backoff[0]])
                en = np.array([self._intern(("root", backoff[1]))], dtype=np.int32)
            else:
                ew, en = _EMPTY_F, _EMPTY_I
            out = StateArcs(np.array(ftoks, dtype=np.int32),
                            np.array(fws, dtype=np.float64),
                            np.array(fnxt, dtype=np.int32),
                            np.array(folab, dtype=np.int32),
                            ew, en, self.word_fst.finals.get(h, INF))
        elif key[0] == "mid":
            _, h, wid, i = key
            spelling = self._spelling[wid]
            last = i + 1 == len(spelling)
            nxt_key = ("end", h, wid) if last else ("mid", h, wid, i + 1)
            out = StateArcs(np.array([spelling[i]], dtype=np.int32),
                            np.zeros(1), np.array([self._intern(nxt_key)],
                                                  dtype=np.int32),
                            np.array([EPS], dtype=np.int32),
                            _EMPTY_F, _EMPTY_I, INF)
        else:  # chain end: boundary grapheme returns to the root
            _, h, _wid = key
            out = StateArcs(np.array([self._wb], dtype=np.int32),
                            np.zeros(1),
                            np.array([self._intern(("root", h))], dtype=np.int32),
                            np.array([EPS], dtype=np.int32),
                            _EMPTY_F, _EMPTY_I, self._closure_final[h])
        self._cache[gid] = out
        return out

    def depth(self, gid: int) -> int:
        return self._depths[gid]


def _eps_depths(f: Wfst) -> list[int]:
    n = f.num_states
    children: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for s in range(n):
        for a in f.arcs[s]:
            if a.ilabel == EPS:
                children[s].append(a.dst)
                indeg[a.dst] += 1
    depth = [0] * n
    stack = [s for s in range(n) if indeg[s] == 0]
    seen = 0
    while stack:
        s = stack.pop()
        seen += 1
        for t in children[s]:
            depth[t] = max(depth[t], depth[s] + 1)
            indeg[t] -= 1
            if indeg[t] == 0:
                stack.append(t)
    if seen != n:
        raise ConfigError("epsilon cycle in grapheme machine")
    return depth


class LatticeStructure:
    """Arc structure of one utterance's lattice, independent of the
    lexical parameter values.

    Weight of each arc = static part (grapheme machine + alignment op)
    plus the tagged lexical entry's current -log probability; recomputing
    weights per EM iteration reuses everything else.
    """

    def __init__(self, n_states, start, asrc, adst, atag, astatic, ail, aol,
                 final_states, final_w, levels, n_phones):
        self.n_states = n_states
        self.start = start
        self.asrc = asrc
        self.adst = adst
        self.atag = atag          # -1 for untagged (grapheme-eps) arcs
        self.astatic = astatic
        self.ail = ail
        self.aol = aol
        self.final_states = final_states
        self.final_w = final_w
        self.n_phones = n_phones
        order_f = np.argsort(levels[adst], kind="stable")
        self._order_f = order_f
        self._seg_f = _segments(levels[adst][order_f])
        order_b = np.argsort(-levels[asrc], kind="stable")
        self._order_b = order_b
        self._seg_b = _segments(levels[asrc][order_b])
        self._acc = np.zeros(n_states)
        self._inc_order = None

    @property
    def n_arcs(self) -> int:
        return len(self.asrc)

    def weights(self, lex_neglog: np.ndarray) -> np.ndarray:
        w = self.astatic.copy()
        tagged = self.atag >= 0
        w[tagged] += lex_neglog.ravel()[self.atag[tagged]]
        return w

    # -- log semiring ------------------------------------------------------

    def log_forward(self, w: np.ndarray) -> np.ndarray:
        fwd = np.full(self.n_states, INF)
        fwd[self.start] = 0.0
        acc = self._acc
        for lo, hi in self._seg_f:
            idx = self._order_f[lo:hi]
            vals = fwd[self.asrc[idx]] + w[idx]
            finite = vals < INF
            if not finite.any():
                continue
            d = self.adst[idx[finite]]
            v = vals[finite]
            np.minimum.at(fwd, d, v)
            np.add.at(acc, d, np.exp(fwd[d] - v))
            du = np.unique(d)
            fwd[du] -= np.log(acc[du])
            acc[du] = 0.0
        return fwd

    def log_backward(self, w: np.ndarray) -> np.ndarray:
        bwd = np.full(self.n_states, INF)
        bwd[self.final_states] = self.final_w
        acc = self._acc
        for lo, hi in self._seg_b:
            idx = self._order_b[lo:hi]
            vals = w[idx] + bwd[self.adst[idx]]
            finite = vals < INF
            if not finite.any():
                continue
            idxf = idx[finite]
            s = self.asrc[idxf]
            v = vals[finite]
            su = np.unique(s)
            old = bwd[su].copy()
            np.minimum.at(bwd, s, v)
            np.add.at(acc, s, np.exp(bwd[s] - v))
            fin = old < INF
            acc[su[fin]] += np.exp(bwd[su[fin]] - old[fin])
            bwd[su] = bwd[su] - np.log(acc[su])
            acc[su] = 0.0
        return bwd

    def total_from(self, fwd: np.ndarray) -> float:
        vals = fwd[self.final_states] + self.final_w
        vals = vals[vals < INF]
        if len(vals) == 0:
            return INF
        m = vals.min()
        return float(m - np.log(np.exp(m - vals).sum()))

    def posteriors(self, w: np.ndarray):
        """(total -log mass, per-arc posterior array); None when empty."""
        fwd = self.log_forward(w)
        total = self.total_from(fwd)
        if total == INF:
            return None
        bwd = self.log_backward(w)
        total_b = bwd[self.start]
        if abs(total_b - total) > 1e-6 * max(1.0, abs(total)):
            raise AssertionError(
                f"forward/backward totals disagree: {total} vs {total_b}")
        score = fwd[self.asrc] + w + bwd[self.adst]
        with np.errstate(invalid="ignore"):
            post = np.where(np.isfinite(score),
                            np.exp(np.minimum(total - score, 0.0)), 0.0)
        return total, post

    # -- tropical ----------------------------------------------------------

    def tropical_forward(self, w: np.ndarray) -> np.ndarray:
        fwd = np.full(self.n_states, INF)
        fwd[self.start] = 0.0
        for lo, hi in self._seg_f:
            idx = self._order_f[lo:hi]
            vals = fwd[self.asrc[idx]] + w[idx]
            np.minimum.at(fwd, self.adst[idx], vals)
        return fwd

    def tropical_backward(self, w: np.ndarray) -> np.ndarray:
        bwd = np.full(self.n_states, INF)
        bwd[self.final_states] = self.final_w
        for lo, hi in self._seg_b:
            idx = self._order_b[lo:hi]
            vals = w[idx] + bwd[self.adst[idx]]
            np.minimum.at(bwd, self.asrc[idx], vals)
        return bwd

    def beam_mask(self, w: np.ndarray, beam: float) -> np.ndarray:
        """Weights with arcs outside the beam (tropical slack) set to inf."""
        fwd = self.tropical_forward(w)
        bwd = self.tropical_backward(w)
        vals = fwd[self.final_states] + self.final_w
        best = vals.min() if len(vals) else INF
        if best == INF:
            return np.full_like(w, INF)
        slack = fwd[self.asrc] + w + bwd[self.adst]
        out = w.copy()
        out[slack > best + beam] = INF
        return out

    def best_path(self, w: np.ndarray) -> tuple[list[int], float] | None:
        """Arc indices of the tropical best path and its total weight."""
        fwd = self.tropical_forward(w)
        vals = fwd[self.final_states] + self.final_w
        if len(vals) == 0:
            return None
        k = int(np.argmin(vals))
        best = float(vals[k])
        if best == INF:
            return None
        if self._inc_order is None:
            self._inc_order = np.argsort(self.adst, kind="stable")
            self._inc_bounds = np.searchsorted(
                self.adst[self._inc_order], np.arange(self.n_states + 1))
        path: list[int] = []
        s = int(self.final_states[k])
        while s != self.start:
            lo, hi = self._inc_bounds[s], self._inc_bounds[s + 1]
            cand = self._inc_order[lo:hi]
            scores = fwd[self.asrc[cand]] + w[cand]
            j = int(cand[int(np.argmin(scores))])
            path.append(j)
            s = int(self.asrc[j])
        path.reverse()
        return path, best

    # -- materialization -----------------------------------------------------

    def materialize(self, w: np.ndarray, isyms: SymbolTable, osyms: SymbolTable,
                    semiring: Semiring = LOG) -> Wfst:
        f = Wfst(isyms, osyms, semiring)
        f.add_states(self.n_states)
        f.set_start(self.start)
        for s, fw in zip(self.final_states.tolist(), self.final_w.tolist()):
            if fw < INF:
                f.set_final(s, fw)
        keep = np.flatnonzero(w < INF)
        src, dst = self.asrc[keep], self.adst[keep]
        il, ol, tg, ww = self.ail[keep], self.aol[keep], self.atag[keep], w[keep]
        for i in range(len(keep)):
            f.add_arc(int(src[i]), int(il[i]), int(ol[i]), float(ww[i]),
                      int(dst[i]), int(tg[i]) if tg[i] >= 0 else None)
        return trim(f)


def _segments(sorted_levels: np.ndarray) -> list[tuple[int, int]]:
    if len(sorted_levels) == 0:
        return []
    bounds = np.flatnonzero(np.diff(sorted_levels)) + 1
    edges = np.concatenate(([0], bounds, [len(sorted_levels)]))
    return [(int(edges[i]), int(edges[i + 1])) for i in range(len(edges) - 1)]


def build_structure(phone_ids: list[int], lex: LexicalModel,
                    ali: AlignmentModel, source) -> LatticeStructure:
    """Expand the reachable part of X . (L.A) . G for one utterance.

    Arcs exist wherever the lexical entry is currently in the support;
    entries that shrink to zero later merely get infinite weights, so a
    structure stays valid for a whole training stage.
    """
    allowed = lex.allowed & (lex.prob > 0)
    n_phones = lex.n_phones
    w_sub = -math.log(ali.substitute) if ali.substitute > 0 else INF
    w_ins = -math.log(ali.insert) if ali.insert > 0 else INF
    w_del = -math.log(ali.delete) if ali.delete > 0 else INF
    L = len(phone_ids)

    ids: dict[int, int] = {}
    st_pos: list[int] = []
    st_c: list[int] = []
    st_g: list[int] = []

    def intern_batch(pos: int, cs: np.ndarray, gs: np.ndarray):
        keys = (gs.astype(np.int64) * (L + 1) + pos) * 6 + cs
        uniq, inv = np.unique(keys, return_inverse=True)
        uids = np.empty(len(uniq), dtype=np.int64)
        fresh = []
        for i, k in enumerate(uniq.tolist()):
            sid = ids.get(k)
            if sid is None:
                sid = len(st_pos)
                ids[k] = sid
                g = k // (6 * (L + 1))
                rem = k % (6 * (L + 1))
                st_pos.append(rem // 6)
                st_c.append(rem % 6)
                st_g.append(int(g))
                fresh.append(sid)
            uids[i] = sid
        return uids[inv], fresh

    A_src: list[np.ndarray] = []
    A_dst: list[np.ndarray] = []
    A_tag: list[np.ndarray] = []
    A_stat: list[np.ndarray] = []
    A_il: list[np.ndarray] = []
    A_ol: list[np.ndarray] = []

    def gather(sids: list[int]):
        gs = [st_g[s] for s in sids]
        exps = [source.expand(g) for g in gs]
        degs = np.array([len(e.tokens) for e in exps])
        rows = np.repeat(np.arange(len(sids)), degs)
        if degs.sum() == 0:
            return rows, _EMPTY_I, _EMPTY_F, _EMPTY_I, _EMPTY_I
        toks = np.concatenate([e.tokens for e in exps])
        ws = np.concatenate([e.weights for e in exps])
        nxts = np.concatenate([e.nexts for e in exps])
        olabs = np.concatenate([e.olabels for e in exps])
        return rows, toks, ws, nxts, olabs

    start_ids, _ = intern_batch(0, np.array([B0]), np.array([source.start]))
    start_id = int(start_ids[0])
    block = [start_id]

    for pos in range(L + 1):
        # close the block under insertions and grapheme-eps moves
        pending = list(block)
        while pending:
            sids = pending
            pending = []
            carr = np.array([st_c[s] for s in sids])
            sarr = np.array(sids)
            # insertions from base states
            ins_sel = (np.flatnonzero(_CAN_INS[carr])
                       if w_ins < INF else np.empty(0, dtype=np.int64))
            if len(ins_sel):
                sub_ids = [sids[i] for i in ins_sel]
                rows, toks, ws, nxts, olabs = gather(sub_ids)
                if len(toks):
                    ok = allowed[toks, 0]
                    if ok.any():
                        rows, toks, ws, nxts, olabs = (
                            rows[ok], toks[ok], ws[ok], nxts[ok], olabs[ok])
                        dst, fresh = intern_batch(
                            pos, np.full(len(toks), I0), nxts)
                        A_src.append(sarr[ins_sel][rows])
                        A_dst.append(dst)
                        A_tag.append(toks.astype(np.int64) * n_phones)
                        A_stat.append(ws + w_ins)
                        A_il.append(np.zeros(len(toks), dtype=np.int32))
                        A_ol.append(olabs)
                        pending.extend(fresh)
            # grapheme-side epsilon arcs
            degs = []
            eps_ws = []
            eps_ns = []
            for s in sids:
                e = source.expand(st_g[s])
                degs.append(len(e.eps_weights))
                if degs[-1]:
                    eps_ws.append(e.eps_weights)
                    eps_ns.append(e.eps_nexts)
            degs = np.array(degs)
            if degs.sum():
                rows = np.repeat(np.arange(len(sids)), degs)
                ew = np.concatenate(eps_ws)
                en = np.concatenate(eps_ns)
                dst, fresh = intern_batch(pos, _EPS_VARIANT[carr[rows]], en)
                A_src.append(sarr[rows])
                A_dst.append(dst)
                A_tag.append(np.full(len(ew), -1, dtype=np.int64))
                A_stat.append(ew)
                A_il.append(np.zeros(len(ew), dtype=np.int32))
                A_ol.append(np.zeros(len(ew), dtype=np.int32))
                pending.extend(fresh)
            block.extend(pending)

        if pos == L:
            break
        x = phone_ids[pos]
        carr = np.array([st_c[s] for s in block])
        sarr = np.array(block)
        nxt_block: list[int] = []
        # substitutions from every state
        rows, toks, ws, nxts, olabs = gather(block) if w_sub < INF else (
            _EMPTY_I, _EMPTY_I, _EMPTY_F, _EMPTY_I, _EMPTY_I)
        if len(toks):
            ok = allowed[toks, x]
            if ok.any():
                rows2, toks2, ws2, nxts2, olabs2 = (
                    rows[ok], toks[ok], ws[ok], nxts[ok], olabs[ok])
                dst, fresh = intern_batch(pos + 1, np.full(len(toks2), B0), nxts2)
                A_src.append(sarr[rows2])
                A_dst.append(dst)
                A_tag.append(toks2.astype(np.int64) * n_phones + x)
                A_stat.append(ws2 + w_sub)
                A_il.append(np.full(len(toks2), x, dtype=np.int32))
                A_ol.append(olabs2)
                nxt_block.extend(fresh)
        # deletion from pristine base states
        if allowed[0, x] and w_del < INF:
            del_sel = np.flatnonzero(carr == B0)
            if len(del_sel):
                gsel = np.array([st_g[block[i]] for i in del_sel], dtype=np.int64)
                dst, fresh = intern_batch(pos + 1, np.full(len(del_sel), D1), gsel)
                A_src.append(sarr[del_sel])
                A_dst.append(dst)
                A_tag.append(np.full(len(del_sel), x, dtype=np.int64))
                A_stat.append(np.full(len(del_sel), w_del))
                A_il.append(np.full(len(del_sel), x, dtype=np.int32))
                A_ol.append(np.zeros(len(del_sel), dtype=np.int32))
                nxt_block.extend(fresh)
        block = nxt_block

    n_states = len(st_pos)
    finals = []
    final_w = []
    for s in block:
        fw = source.expand(st_g[s]).final
        if fw < INF:
            finals.append(s)
            final_w.append(fw)

    pos_a = np.array(st_pos)
    c_a = np.array(st_c)
    depth_a = np.array([source.depth(g) for g in st_g])
    dmax = int(depth_a.max()) + 1 if n_states else 1
    levels = pos_a * 4 * dmax + _CRANK[c_a] * dmax + depth_a

    if A_src:
        asrc = np.concatenate(A_src).astype(np.int64)
        adst = np.concatenate(A_dst).astype(np.int64)
        atag = np.concatenate(A_tag)
        astat = np.concatenate(A_stat)
        ail = np.concatenate(A_il)
        aol = np.concatenate(A_ol)
    else:
        asrc = adst = atag = np.empty(0, dtype=np.int64)
        astat = _EMPTY_F
        ail = aol = _EMPTY_I

    return LatticeStructure(
        n_states, start_id, asrc, adst, atag, astat, ail, aol,
        np.array(finals, dtype=np.int64), np.array(final_w), levels, n_phones)
