"""Experiments around the trace question for words with positive integer powers.

Symmetric words, and juxtapositions of two symmetric words, always have
positive trace on real PD pairs.  The tools here classify a word into one of
those classes (or neither) and search random real PD pairs for the smallest
trace, keeping the witness so any negative value can be re-checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.optimize import minimize

from .matcore import MatrixError, PDMatrix, as_pd, random_pd, spectral_norm
from .wordlang import WordExpr, format_word, parse_word, word_product

SYMMETRIC = "Symmetric"
TWO_SYMMETRIC = "TwoSymmetricProduct"
NEITHER = "Neither"


@dataclass(frozen=True)
class WordClass:
    tag: str
    splits: Tuple[Tuple[WordExpr, WordExpr], ...] = ()
    cyclic_variants: Tuple[str, ...] = ()

    def to_dict(self):
        return {
            "tag": self.tag,
            "splits": [[format_word(u), format_word(v)] for u, v in self.splits],
            "cyclic_variants": list(self.cyclic_variants),
        }


def _require_positive_integer(w: WordExpr) -> None:
    for _, e in w.factors:
        if e.denominator != 1 or e <= 0:
            raise ValueError(f"word {format_word(w)!r} must have positive integer exponents")


def letter_string(w: WordExpr) -> str:
    _require_positive_integer(w)
    return "".join(l * int(e) for l, e in w.factors)


def _from_letters(s: str) -> WordExpr:
    return WordExpr(tuple((c, 1) for c in s))


def classify_word(w: WordExpr) -> WordClass:
    """Symmetric, a product of two nonempty symmetric words, or neither.

    Splits are taken between letters, so ``A^3`` may split as ``A`` | ``A^2``.
    """
    s = letter_string(w)
    rotations = sorted({s[i:] + s[:i] for i in range(1, len(s))} - {s})
    cyclic = tuple(format_word(_from_letters(r)) for r in rotations)
    if s == s[::-1]:
        return WordClass(SYMMETRIC, (), cyclic)
    splits = tuple(
        (_from_letters(s[:i]), _from_letters(s[i:]))
        for i in range(1, len(s))
        if s[:i] == s[:i][::-1] and s[i:] == s[i:][::-1]
    )
    return WordClass(TWO_SYMMETRIC if splits else NEITHER, splits, cyclic)


@dataclass
class TraceSearchReport:
    word: WordExpr
    trials: int
    dimension: int
    min_trace: float
    witness: Tuple[np.ndarray, np.ndarray]
    seed: int
    cond_range: Tuple[float, float]
    negative_count: int = 0

    def to_dict(self):
        return {
            "word": format_word(self.word),
            "trials": self.trials,
            "dimension": self.dimension,
            "min_trace": self.min_trace,
            "negative_count": self.negative_count,
            "seed": self.seed,
            "cond_range": list(self.cond_range),
            "witness": {"A": self.witness[0].tolist(), "B": self.witness[1].tolist()},
        }


def word_trace(w: WordExpr, a, b) -> float:
    return float(np.real(np.trace(word_product(w, a, b))))


def _trial_pair(n: int, seed: int, trial: int, cond_range) -> Tuple[PDMatrix, PDMatrix]:
    rng = np.random.default_rng((seed, trial))
    lo, hi = np.log(cond_range[0]), np.log(cond_range[1])
    ca, cb = np.exp(rng.uniform(lo, hi, 2))
    a = random_pd(n, (seed, trial, 0), float(ca), real=True)
    b = random_pd(n, (seed, trial, 1), float(cb), real=True)
    return a, b


def trace_search(
    w: WordExpr,
    n: int = 3,
    trials: int = 1000,
    seed: int = 0,
    cond_range: Tuple[float, float] = (1.0, 1e3),
) -> TraceSearchReport:
    """Random search for the smallest trace of ``w(A, B)`` over real PD pairs.

    Trial ``t`` draws from its own generator seeded with ``(seed, t)``, so the
    result does not depend on evaluation order.
    """
    _require_positive_integer(w)
    if n < 2:
        raise ValueError("n must be >= 2 (1x1 traces of positive products are positive)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 1 <= cond_range[0] <= cond_range[1]:
        raise ValueError("cond_range must satisfy 1 <= low <= high")
    best, witness, neg = np.inf, None, 0
    for t in range(trials):
        a, b = _trial_pair(n, seed, t, cond_range)
        tr = word_trace(w, a, b)
        neg += tr < 0
        if tr < best:
            best, witness = tr, (a.array, b.array)
    return TraceSearchReport(w, trials, n, float(best), witness, seed, tuple(cond_range), int(neg))


# --- mixed-sign counterexample ------------------------------------------------

MIXED_WORD = parse_word("A^-1 B A^2 B A^-1")


@dataclass
class CounterexampleReport:
    min_residual: float
    sampled_min: float
    witness: np.ndarray
    trials: int
    seed: int
    polish: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "word": format_word(MIXED_WORD),
            "min_residual": self.min_residual,
            "sampled_min": self.sampled_min,
            "trials": self.trials,
            "seed": self.seed,
            "witness": self.witness.tolist(),
            "polish": self.polish,
        }


def mixed_residual(a, b) -> float:
    """``||A^{-1} B A^2 B A^{-1} - I||_F``."""
    v = word_product(MIXED_WORD, a, b)
    return float(np.linalg.norm(v - np.eye(v.shape[0])))


def _sym_from_params(x: np.ndarray, n: int) -> np.ndarray:
    h = np.zeros((n, n))
    h[np.triu_indices(n)] = x
    return h + np.triu(h, 1).T


def counterexample_demo(b, trials: int = 10_000, seed: int = 0, polish_iters: int = 2000) -> CounterexampleReport:
    """Search PD ``A`` minimizing the residual of ``A^{-1} B A^2 B A^{-1} = I``.

    The equation has no PD solution unless ``B = I``; the reported minimum
    illustrates that it stays away from zero.  Real ``A`` only.
    """
    b = as_pd(b)
    if np.linalg.norm(b.array - np.eye(b.n)) / spectral_norm(b) <= 1e-6:
        raise ValueError("B = I makes every A a solution; pick B != I")
    n = b.n
    best, best_a = np.inf, None
    rng = np.random.default_rng(seed)
    for t in range(trials):
        cond = float(np.exp(rng.uniform(0.0, np.log(1e4))))
        scale = float(np.exp(rng.uniform(-3.0, 3.0)))
        a = random_pd(n, (seed, t), cond, real=True, scale=scale)
        r = mixed_residual(a, b)
        if r < best:
            best, best_a = r, a.array
    sampled = best
    # derivative-free polish in log coordinates: A = expm(H), H symmetric
    w, u = np.linalg.eigh(best_a)
    h0 = (u * np.log(w)) @ u.T
    x0 = h0[np.triu_indices(n)]

    def objective(x):
        hw, hu = np.linalg.eigh(_sym_from_params(x, n))
        try:
            return mixed_residual(PDMatrix((hu * np.exp(hw)) @ hu.T), b)
        except MatrixError:
            return np.inf

    res = minimize(objective, x0, method="Nelder-Mead", options={"maxiter": polish_iters, "xatol": 1e-12, "fatol": 1e-14})
    if res.fun < best:
        hw, hu = np.linalg.eigh(_sym_from_params(res.x, n))
        best_a = (hu * np.exp(hw)) @ hu.T
        best = mixed_residual(best_a, b)
    return CounterexampleReport(
        float(best), float(sampled), best_a, trials, seed, {"iterations": int(res.nit), "improved": bool(best < sampled)}
    )
