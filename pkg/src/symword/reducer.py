"""Equivalence rewrites for symmetric word equations ``S(A, B) = P``.

Three rules shrink an equation without changing its solvability:

* strip an outer ``B^s ... B^s`` pair, moving it into ``P``;
* replace ``V^k = P`` by ``V = P^{1/k}``;
* substitute ``A = X^L`` so every ``A`` exponent becomes an integer.

Each applied rule leaves a step in a :class:`ReductionTrail`, and
:func:`map_back` turns a solution of the reduced equation into one of the
original.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple, Union

from .matcore import DimensionMismatchError, PDMatrix, as_pd, matrix_power, powers
from .wordlang import WordExpr, detect_power, format_word, is_symmetric, shape


class EquationError(ValueError):
    """The word does not define a symmetric word equation."""


class NotApplicable(Exception):
    """A rewrite rule does not apply to the given equation."""


@dataclass(frozen=True)
class Equation:
    word: WordExpr
    B: PDMatrix
    P: PDMatrix

    def __post_init__(self):
        object.__setattr__(self, "B", as_pd(self.B))
        object.__setattr__(self, "P", as_pd(self.P))
        check_equation_word(self.word)
        if self.B.n != self.P.n:
            raise DimensionMismatchError(f"B is {self.B.n}x{self.B.n} but P is {self.P.n}x{self.P.n}")

    @property
    def n(self) -> int:
        return self.P.n


def check_equation_word(w: WordExpr) -> None:
    """Reject words that are not symmetric and A-positive, or that lack ``A``."""
    sh = shape(w)
    if not sh.symmetric:
        raise EquationError(
            f"word {format_word(w)!r} is not symmetric; a symmetric word equation "
            "needs a palindromic, A-positive word"
        )
    if not sh.a_positive:
        raise EquationError(
            f"word {format_word(w)!r} is not A-positive; a symmetric word equation "
            "needs every exponent of A to be positive (mixed signs can have no PD solution)"
        )
    if not w.letters("A"):
        raise EquationError(f"word {format_word(w)!r} does not contain the unknown A")


@dataclass(frozen=True)
class StripOuterB:
    s: Fraction

    def to_dict(self):
        return {"step": "StripOuterB", "s": str(self.s)}


@dataclass(frozen=True)
class RootReduce:
    k: int

    def to_dict(self):
        return {"step": "RootReduce", "k": self.k}


@dataclass(frozen=True)
class RescaleA:
    """New unknown ``X = A^{1/L}``; the original solution is ``A = X^L``."""

    L: int

    def to_dict(self):
        return {"step": "RescaleA", "L": self.L}


@dataclass(frozen=True)
class RescaleB:
    """``S(A, B) = P`` rewritten as ``S'(A, B^s) = P``; ``A`` is unchanged."""

    s: Fraction

    def to_dict(self):
        return {"step": "RescaleB", "s": str(self.s)}


Step = Union[StripOuterB, RootReduce, RescaleA, RescaleB]


@dataclass(frozen=True)
class ReductionTrail:
    steps: Tuple[Step, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.steps)

    def to_list(self):
        return [s.to_dict() for s in self.steps]


# Symbolic halves: each rule on words alone.  The numeric versions below
# apply the same step to (B, P).


def _strip_word(w: WordExpr) -> Tuple[WordExpr, StripOuterB]:
    fs = w.factors
    if len(fs) < 3 or fs[0][0] != "B" or fs[0] != fs[-1]:
        raise NotApplicable("word does not start and end with the same power of B")
    return WordExpr(fs[1:-1]), StripOuterB(fs[0][1])


def _root_word(w: WordExpr) -> Tuple[WordExpr, RootReduce]:
    base, k = detect_power(w)
    if k < 2:
        raise NotApplicable("word is not a proper power")
    if not is_symmetric(base):
        raise NotApplicable("power base is not symmetric")
    return base, RootReduce(k)


def _rescale_word(w: WordExpr) -> Tuple[WordExpr, RescaleA]:
    dens = [e.denominator for e in w.letters("A")]
    L = math.lcm(*dens) if dens else 1
    if L == 1:
        raise NotApplicable("all A exponents are already integers")
    return WordExpr(tuple((l, e * L if l == "A" else e) for l, e in w.factors)), RescaleA(L)


def rescale_b(eq: Equation, s) -> Tuple[Equation, RescaleB]:
    """Use ``B^s`` as the new coefficient letter (every B exponent divided by ``s``)."""
    s = Fraction(s)
    if s == 0:
        raise ValueError("s must be nonzero")
    w = WordExpr(tuple((l, e / s if l == "B" else e) for l, e in eq.word.factors))
    return Equation(w, matrix_power(eq.B, s), eq.P), RescaleB(s)


def strip_outer_b(eq: Equation) -> Tuple[Equation, StripOuterB]:
    w, step = _strip_word(eq.word)
    m = powers(eq.B, (-step.s,))[-step.s]
    return Equation(w, eq.B, PDMatrix(m @ eq.P.array @ m)), step


def root_reduce(eq: Equation) -> Tuple[Equation, RootReduce]:
    w, step = _root_word(eq.word)
    return Equation(w, eq.B, matrix_power(eq.P, Fraction(1, step.k))), step


def rescale_a_to_integer(eq: Equation) -> Tuple[Equation, RescaleA]:
    w, step = _rescale_word(eq.word)
    return Equation(w, eq.B, eq.P), step


_RULES = (strip_outer_b, root_reduce, rescale_a_to_integer)
_WORD_RULES = (_strip_word, _root_word, _rescale_word)


def reduce_word(w: WordExpr) -> Tuple[WordExpr, ReductionTrail]:
    """Symbolic fixpoint of the three rules (no matrices needed)."""
    check_equation_word(w)
    steps = []
    while True:
        for rule in _WORD_RULES:
            try:
                w, step = rule(w)
            except NotApplicable:
                continue
            steps.append(step)
            break
        else:
            return w, ReductionTrail(tuple(steps))


def reduce_fully(eq: Equation) -> Tuple[Equation, ReductionTrail]:
    """Apply strip, root and rescale, in that priority, until none applies."""
    steps = []
    while True:
        for rule in _RULES:
            try:
                eq, step = rule(eq)
            except NotApplicable:
                continue
            steps.append(step)
            break
        else:
            return eq, ReductionTrail(tuple(steps))


def map_back(trail: ReductionTrail, a_reduced) -> PDMatrix:
    """Turn a solution of the reduced equation into a solution of the original."""
    a = as_pd(a_reduced)
    for step in reversed(trail.steps):
        if isinstance(step, RescaleA):
            a = matrix_power(a, step.L)
    return a
