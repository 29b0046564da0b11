"""Text serialization for Wfsts and symbol tables.

Arc lines:   src<TAB>dst<TAB>ilabel<TAB>olabel<TAB>weight
Final lines: state<TAB>weight
Labels are written as token strings resolved through the symbol tables.
The start state is the first field of the first line, so the writer emits
the start state's block first.  Weights use repr() so that floats
round-trip bit-exactly.

Symbol table files hold one `token<TAB>id` pair per line, id 0 = <eps>.
"""

from __future__ import annotations

from pathlib import Path

from .fst import Wfst
from .semirings import Semiring, TROPICAL
from .symbols import SymbolTable


def format_weight(w: float) -> str:
    return repr(w)


def write_symbols(syms: SymbolTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok, i in syms.items():
            fh.write(f"{tok}\t{i}\n")


def read_symbols(path) -> SymbolTable:
    syms = SymbolTable()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            tok, sid = line.split("\t")
            got = syms.add(tok)
            if got != int(sid):
                raise ValueError(f"non-contiguous symbol table entry: {line!r}")
    return syms


def write_fst(f: Wfst, path) -> None:
    states = list(range(f.num_states))
    lead_final = None
    if f.start is not None:
        states.remove(f.start)
        states.insert(0, f.start)
        if not f.arcs[f.start] and f.start in f.finals:
            # the reader takes the start state from the first line
            lead_final = f.start
    with open(path, "w", encoding="utf-8") as fh:
        if lead_final is not None:
            fh.write(f"{lead_final}\t{format_weight(f.finals[lead_final])}\n")
        for s in states:
            for a in f.arcs[s]:
                fh.write(f"{s}\t{a.dst}\t{f.isyms.token(a.ilabel)}\t"
                         f"{f.osyms.token(a.olabel)}\t{format_weight(a.weight)}\n")
        for s in states:
            if s in f.finals and s != lead_final:
                fh.write(f"{s}\t{format_weight(f.finals[s])}\n")


def read_fst(path, isyms: SymbolTable, osyms: SymbolTable | None = None,
             semiring: Semiring = TROPICAL) -> Wfst:
    if osyms is None:
        osyms = isyms
    f = Wfst(isyms, osyms, semiring)
    arcs = []
    finals = []
    start = None
    max_state = -1
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if start is None:
                start = int(fields[0])
            if len(fields) == 5:
                src, dst = int(fields[0]), int(fields[1])
                arcs.append((src, isyms.id(fields[2]), osyms.id(fields[3]),
                             float(fields[4]), dst))
                max_state = max(max_state, src, dst)
            elif len(fields) == 2:
                s = int(fields[0])
                finals.append((s, float(fields[1])))
                max_state = max(max_state, s)
            else:
                raise ValueError(f"malformed FST line: {line!r}")
    if start is None:
        return f
    f.add_states(max_state + 1)
    f.set_start(start)
    for src, il, ol, w, dst in arcs:
        f.add_arc(src, il, ol, w, dst)
    for s, w in finals:
        f.set_final(s, w)
    return f


def write_fst_with_symbols(f: Wfst, fst_path, isyms_path, osyms_path=None) -> None:
    write_fst(f, fst_path)
    write_symbols(f.isyms, isyms_path)
    if osyms_path is not None and Path(osyms_path) != Path(isyms_path):
        write_symbols(f.osyms, osyms_path)
