"""Weight semirings over negative log probabilities.

Weights are plain floats storing -log(p).  Both semirings share
multiplication (+) and the identities (zero = +inf, one = 0.0); they
differ in how alternative paths combine: tropical keeps the best path,
log accumulates probability mass.
"""

import math

INF = math.inf


class Semiring:
    """Base class; subclasses define `plus`. `times` is + for both rings."""

    name = "abstract"

    @staticmethod
    def plus(a: float, b: float) -> float:
        raise NotImplementedError

    @staticmethod
    def times(a: float, b: float) -> float:
        return a + b

    zero = INF
    one = 0.0

    @classmethod
    def plus_many(cls, values) -> float:
        total = cls.zero
        for v in values:
            total = cls.plus(total, v)
        return total

    def __repr__(self):
        return f"<{self.name} semiring>"


class TropicalSemiring(Semiring):
    """(min, +): path weight of the single best path."""

    name = "tropical"

    @staticmethod
    def plus(a: float, b: float) -> float:
        return a if a <= b else b


class LogSemiring(Semiring):
    """(-log(e^-a + e^-b), +): total probability mass over paths."""

    name = "log"

    @staticmethod
    def plus(a: float, b: float) -> float:
        if a == INF:
            return b
        if b == INF:
            return a
        if a <= b:
            return a - math.log1p(math.exp(a - b))
        return b - math.log1p(math.exp(b - a))


TROPICAL = TropicalSemiring()
LOG = LogSemiring()

_BY_NAME = {"tropical": TROPICAL, "log": LOG}


def semiring_by_name(name: str) -> Semiring:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}") from None
