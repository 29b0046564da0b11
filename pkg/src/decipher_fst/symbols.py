"""Symbol tables: bijections between token strings and integer ids.

Id 0 is always reserved for the epsilon token `<eps>`.
"""

from __future__ import annotations

EPS = 0
EPS_TOKEN = "<eps>"


class SymbolTable:
    def __init__(self, tokens=()):
        self._token_to_id = {EPS_TOKEN: EPS}
        self._id_to_token = [EPS_TOKEN]
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        """Add a token (idempotent) and return its id."""
        tid = self._token_to_id.get(token)
        if tid is None:
            tid = len(self._id_to_token)
            self._token_to_id[token] = tid
            self._id_to_token.append(token)
        return tid

    def id(self, token: str) -> int:
        try:
            return self._token_to_id[token]
        except KeyError:
            raise KeyError(f"token {token!r} not in symbol table") from None

    def token(self, tid: int) -> str:
        try:
            return self._id_to_token[tid]
        except IndexError:
            raise KeyError(f"id {tid} not in symbol table") from None

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __iter__(self):
        return iter(self._id_to_token)

    def items(self):
        """(token, id) pairs in id order."""
        return ((tok, i) for i, tok in enumerate(self._id_to_token))

    def ids(self, tokens) -> list[int]:
        return [self.id(t) for t in tokens]

    def tokens(self, ids) -> list[str]:
        return [self.token(i) for i in ids]

    def __eq__(self, other):
        if not isinstance(other, SymbolTable):
            return NotImplemented
        return self._id_to_token == other._id_to_token

    def __repr__(self):
        return f"SymbolTable({len(self)} symbols)"

    def copy(self) -> "SymbolTable":
        out = SymbolTable()
        out._token_to_id = dict(self._token_to_id)
        out._id_to_token = list(self._id_to_token)
        return out
