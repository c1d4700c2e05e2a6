import sys
from fractions import Fraction

import numpy as np
import pytest

from symword.matcore import matrix_power
from symword.reducer import reduce_word
from symword.solver import SolveOptions, newton_solve, solve_aba, solve_power
from symword.wordlang import WordExpr, parse_word


def random_exponent(rng, max_num=3, max_den=3, positive=False):
    while True:
        num = int(rng.integers(1 if positive else -max_num, max_num + 1))
        if num:
            return Fraction(num, int(rng.integers(1, max_den + 1)))


def random_symmetric_word(rng, max_class=4, max_den=3, a_positive=False, max_num=3):
    """Palindrome ``h + [center] + reversed(h)`` with alternating letters."""
    while True:
        half_len = int(rng.integers(0, 5))
        first = "AB"[int(rng.integers(0, 2))]
        letters = [("A", "B")[(("A", "B").index(first) + i) % 2] for i in range(half_len + 1)]
        factors = [
            (l, random_exponent(rng, max_num, max_den, positive=a_positive and l == "A")) for l in letters
        ]
        half, center = factors[:-1], factors[-1]
        w = WordExpr(tuple(half) + (center,) + tuple(reversed(half)))
        n_b = len(w.letters("B"))
        if n_b <= max_class and (not a_positive or w.letters("A")):
            return w


def random_word(rng, length=6, max_num=3, max_den=3):
    fs = []
    for _ in range(int(rng.integers(0, length + 1))):
        fs.append(("AB"[int(rng.integers(0, 2))], random_exponent(rng, max_num, max_den)))
    return WordExpr(tuple(fs))


def random_hermitian(rng, n, real=False):
    x = rng.standard_normal((n, n))
    if not real:
        x = x + 1j * rng.standard_normal((n, n))
    return (x + x.conj().T) / 2


CORES = ["A B A", "A^(1/2) B A^(1/2)", "A^(1/3) B^-1 A^(2/3) B^-1 A^(1/3)", "A^2 B A B A^2", "A^(3/2)", "A B^(1/2) A^2 B^(1/2) A"]


def reducible_word(rng):
    """Raise a core to a power and wrap it in outer B factors until some rule applies."""
    while True:
        w = parse_word(CORES[int(rng.integers(len(CORES)))]) ** int(rng.integers(1, 4))
        for _ in range(int(rng.integers(0, 3))):
            s = [Fraction(1, 2), Fraction(1), Fraction(-1), Fraction(2)][int(rng.integers(4))]
            w = WordExpr((("B", s),) + w.factors + (("B", s),))
        if len(reduce_word(w)[1]):
            return w


def solve_reduced(eq):
    w = eq.word
    if len(w) == 1:
        return solve_power(w.factors[0][1], eq.P)
    fs = w.factors
    if len(fs) == 3 and fs[0] == fs[2]:
        x = solve_aba(matrix_power(eq.B, fs[1][1]), eq.P)
        return matrix_power(x, 1 / fs[0][1])
    rep = newton_solve(eq, SolveOptions(tol=1e-13))
    assert rep.converged
    return rep.solution


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
