"""Generalized words in two letters ``A`` and ``B``.

A word is a normalized tuple of ``(letter, exponent)`` factors with exact
:class:`fractions.Fraction` exponents: adjacent factors never share a letter
and no exponent is zero.  The empty tuple is the identity word.

Grammar::

    word   := ws? factor (ws? factor)* ws?
    factor := letter exp?
    letter := "A" | "B"
    exp    := "^" signed | "^(" signed ("/" unsigned)? ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple

import numpy as np

from .matcore import DimensionMismatchError, PDMatrix, as_pd, inverse, powers, rel_frobenius

LETTERS = ("A", "B")

Factor = Tuple[str, Fraction]


class WordSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


def _normalize_factors(factors: Iterable[Tuple[str, object]]) -> Tuple[Factor, ...]:
    # one stack pass reaches the fixpoint: a cancellation exposes the new
    # neighbour pair on top of the stack, which the next push merges
    stack: list = []
    for letter, exp in factors:
        if letter not in LETTERS:
            raise ValueError(f"unknown letter {letter!r}")
        e = Fraction(exp)
        if e == 0:
            continue
        if stack and stack[-1][0] == letter:
            merged = stack[-1][1] + e
            stack.pop()
            if merged != 0:
                stack.append((letter, merged))
        else:
            stack.append((letter, e))
    return tuple(stack)


@dataclass(frozen=True)
class WordExpr:
    """A normalized word; construct through :func:`word`, :func:`parse_word` or :func:`normalize`."""

    factors: Tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", _normalize_factors(self.factors))

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __mul__(self, other: "WordExpr") -> "WordExpr":
        return WordExpr(self.factors + other.factors)

    def __pow__(self, k: int) -> "WordExpr":
        if k < 0:
            return reversal(inverse_word(self)) ** (-k)
        return WordExpr(self.factors * k)

    def __str__(self) -> str:
        return format_word(self)

    def letters(self, letter: str):
        return [e for l, e in self.factors if l == letter]

    @property
    def is_identity(self) -> bool:
        return not self.factors


def word(*factors: Tuple[str, object]) -> WordExpr:
    return WordExpr(tuple((l, Fraction(e)) for l, e in factors))


def normalize(w) -> WordExpr:
    """Merge adjacent same-letter factors and drop zero exponents (idempotent)."""
    if isinstance(w, WordExpr):
        return WordExpr(w.factors)
    return WordExpr(tuple((l, Fraction(e)) for l, e in w))


def inverse_word(w: WordExpr) -> WordExpr:
    """Group inverse: reversed order, negated exponents."""
    return WordExpr(tuple((l, -e) for l, e in reversed(w.factors)))


def reversal(w: WordExpr) -> WordExpr:
    return WordExpr(tuple(reversed(w.factors)))


_TOKEN = re.compile(
    r"""\s*(?P<letter>[AB])
        (?:\^(?:\((?P<pnum>-?\d+)(?:/(?P<pden>\d+))?\)|(?P<num>-?\d+)))?""",
    re.VERBOSE,
)


def parse_word(text: str) -> WordExpr:
    """Parse a word such as ``"A^(1/2) B A B A^(1/2)"``; ``"1"`` or ``""`` is the identity."""
    stripped = text.strip()
    if stripped in ("", "1", "I"):
        return WordExpr()
    pos = 0
    factors = []
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise WordSyntaxError("expected 'A' or 'B'", text, bad)
        if m.group("pden") is not None:
            den = int(m.group("pden"))
            if den == 0:
                raise WordSyntaxError("zero denominator", text, m.start("pden"))
            exp = Fraction(int(m.group("pnum")), den)
        elif m.group("pnum") is not None:
            exp = Fraction(int(m.group("pnum")))
        elif m.group("num") is not None:
            exp = Fraction(int(m.group("num")))
        else:
            if m.end() < end and text[m.end()] == "^":
                raise WordSyntaxError("malformed exponent", text, m.end())
            exp = Fraction(1)
        factors.append((m.group("letter"), exp))
        pos = m.end()
    return WordExpr(tuple(factors))


def _format_exp(e: Fraction) -> str:
    if e == 1:
        return ""
    if e.denominator == 1 and e > 0:
        return f"^{e.numerator}"
    if e.denominator == 1:
        return f"^({e.numerator})"
    return f"^({e.numerator}/{e.denominator})"


def format_word(w: WordExpr) -> str:
    """Canonical text: one space between factors, parentheses only for negative or fractional exponents."""
    if w.is_identity:
        return "1"
    return " ".join(f"{l}{_format_exp(e)}" for l, e in w.factors)


@dataclass(frozen=True)
class WordShape:
    class_number: int
    symmetric: bool
    a_positive: bool
    s_a: Fraction
    s_b_pos: Fraction
    s_b_neg: Fraction

    @property
    def s_b_total(self) -> Fraction:
        return self.s_b_pos - self.s_b_neg


def is_symmetric(w: WordExpr) -> bool:
    return w.factors == tuple(reversed(w.factors))


def shape(w: WordExpr) -> WordShape:
    a = w.letters("A")
    b = w.letters("B")
    return WordShape(
        class_number=len(b),
        symmetric=is_symmetric(w),
        a_positive=all(e > 0 for e in a),
        s_a=sum(a, Fraction(0)),
        s_b_pos=sum((e for e in b if e > 0), Fraction(0)),
        s_b_neg=sum((-e for e in b if e < 0), Fraction(0)),
    )


def _period(seq: tuple) -> int:
    n = len(seq)
    for r in range(1, n + 1):
        if n % r == 0 and seq[:r] * (n // r) == seq:
            return r
    return n


def detect_power(w: WordExpr) -> Tuple[WordExpr, int]:
    """Maximal ``k`` and base ``V`` with ``normalize(V^k) == w``.

    Writes ``w = U C U^{-1}`` with ``C`` cyclically reduced; roots are unique in
    this group, so ``w`` is a ``k``-th power exactly when ``C`` is.  A single
    syllable ``L^p`` counts as ``(L^{p/|num p|})^{|num p|}``.
    """
    fs = w.factors
    conj: list = []
    while len(fs) >= 3 and fs[0][0] == fs[-1][0]:
        (l, a), (_, b) = fs[0], fs[-1]
        conj.append((l, a))
        if a + b == 0:
            fs = fs[1:-1]
        else:
            fs = fs[1:-1] + ((l, a + b),)
            break
    if not fs:
        return w, 1
    if len(fs) == 1:
        l, p = fs[0]
        k = abs(p.numerator)
        core = ((l, p / k),)
    else:
        r = _period(fs)
        k = len(fs) // r
        core = fs[:r]
    u = WordExpr(tuple(conj))
    base = u * WordExpr(core) * inverse_word(u)
    return base, k


def word_product(w: WordExpr, a, b) -> np.ndarray:
    """Raw value of ``w(A, B)`` as an ndarray, without PD validation.

    Symmetric words use the congruence form ``Z C Z*`` so the result is
    exactly Hermitian.
    """
    a, b = as_pd(a), as_pd(b)
    if a.n != b.n:
        raise DimensionMismatchError(f"A is {a.n}x{a.n} but B is {b.n}x{b.n}")
    tables = {
        "A": powers(a, {e for l, e in w.factors if l == "A"}),
        "B": powers(b, {e for l, e in w.factors if l == "B"}),
    }
    dtype = np.result_type(a.array, b.array)
    out = np.eye(a.n, dtype=dtype)
    if is_symmetric(w) and w.factors:
        half = len(w.factors) // 2
        for l, e in w.factors[:half]:
            out = out @ tables[l][e]
        l, e = w.factors[half]
        return out @ tables[l][e] @ out.conj().T
    for l, e in w.factors:
        out = out @ tables[l][e]
    return out


def evaluate(w: WordExpr, a, b):
    """Substitute PD matrices for the letters and multiply left to right.

    Symmetric words return a validated :class:`PDMatrix`; other words return
    a general ndarray.
    """
    out = word_product(w, a, b)
    if is_symmetric(w):
        return PDMatrix(out)
    return out


def evaluate_inverse_identity_check(w: WordExpr, a, b, rtol: float = 1e-9) -> bool:
    """Whether ``S(A, B)^{-1} == S(A^{-1}, B^{-1})`` within ``rtol``."""
    lhs = np.linalg.inv(np.asarray(evaluate(w, a, b)))
    rhs = np.asarray(evaluate(w, inverse(a), inverse(b)))
    return rel_frobenius(lhs, rhs) <= rtol
