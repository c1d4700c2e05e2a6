"""Solvers for symmetric word equations ``S(A, B) = P``.

Closed forms cover ``A^q = P`` and ``A B A = P``.  Everything else goes
through a linearized (Newton) iteration: expand ``S(A0 + D, B)``, keep the
terms with at most one ``D``, solve the resulting linear system for ``D``
through ``vec(L D R) = (R^T kron L) vec(D)``, and repeat.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from . import matcore
from .matcore import (
    DimensionMismatchError,
    MatrixError,
    PDMatrix,
    as_hermitian,
    as_pd,
    matrix_power,
    powers,
    random_pd,
    spectral_norm,
)
from .reducer import Equation, ReductionTrail, map_back, reduce_fully
from .wordlang import WordExpr, evaluate, format_word, shape, word_product

log = logging.getLogger(__name__)

CLOSED_FORM_POWER = "ClosedFormPower"
CLOSED_FORM_ABA = "ClosedFormABA"
NEWTON = "Newton"

# A template is the word with B powers already evaluated: ints are A^m
# (m >= 1), arrays are constant factors.
Template = List[Union[int, np.ndarray]]


class ReductionRequired(ValueError):
    """The Newton engine needs positive integer A exponents."""


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iters: int = 100
    max_halvings: int = 30
    starts: int = 8
    seed: int = 0
    start_scale: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be >= 0")


@dataclass
class SolveReport:
    solution: Optional[PDMatrix]
    relative_residual: float
    iterations: int
    residual_history: List[float]
    trail: ReductionTrail
    starts_used: int
    dispersion: float
    method: str
    converged: bool
    best_iterate: Optional[np.ndarray] = field(default=None, repr=False)
    notes: dict = field(default_factory=dict)


@dataclass
class LinearizedSystem:
    operator: np.ndarray
    constant: np.ndarray
    rhs: np.ndarray


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape((n, n), order="F")


def relative_residual(value, p) -> float:
    """``||value - P||_F / ||P||_F``."""
    return matcore.rel_frobenius(np.asarray(value), np.asarray(p))


def verify(eq: Equation, a) -> float:
    return relative_residual(evaluate(eq.word, a, eq.B), eq.P)


# --- closed forms -----------------------------------------------------------


def solve_power(q, p) -> PDMatrix:
    """Unique PD solution of ``A^q = P``."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("exponent must be nonzero")
    return matrix_power(p, 1 / q)


def solve_aba(b, p) -> PDMatrix:
    """Unique PD solution of ``A B A = P``: ``B^{-1/2} (B^{1/2} P B^{1/2})^{1/2} B^{-1/2}``."""
    b, p = as_pd(b), as_pd(p)
    if b.n != p.n:
        raise DimensionMismatchError(f"B is {b.n}x{b.n} but P is {p.n}x{p.n}")
    h = powers(b, (0.5, -0.5))
    mid = matrix_power(PDMatrix(h[0.5] @ p.array @ h[0.5]), 0.5).array
    return PDMatrix(h[-0.5] @ mid @ h[-0.5])


# --- linearization ----------------------------------------------------------


def word_template(w: WordExpr, b) -> Template:
    """Evaluate the B powers of ``w``; A powers must be positive integers."""
    a_exps = w.letters("A")
    if any(e.denominator != 1 or e <= 0 for e in a_exps):
        raise ReductionRequired(
            f"word {format_word(w)!r} has non-integer or non-positive A exponents; "
            "reduce the equation first"
        )
    tab = powers(b, {e for l, e in w.factors if l == "B"})
    return [int(e) if l == "A" else tab[e] for l, e in w.factors]


def template_a_degree(tpl: Template) -> int:
    return sum(t for t in tpl if isinstance(t, int))


def _int_powers(a0: np.ndarray, top: int) -> List[np.ndarray]:
    out = [np.eye(a0.shape[0], dtype=a0.dtype)]
    for _ in range(top):
        out.append(out[-1] @ a0)
    return out


def evaluate_template(tpl: Template, a0: np.ndarray) -> np.ndarray:
    a0 = np.asarray(a0)
    top = max([t for t in tpl if isinstance(t, int)], default=0)
    pw = _int_powers(a0, top)
    dtype = np.result_type(a0, *[t for t in tpl if not isinstance(t, int)])
    out = np.eye(a0.shape[0], dtype=dtype)
    for t in tpl:
        out = out @ (pw[t] if isinstance(t, int) else t)
    return out


def linearize_template(tpl: Template, a0, p) -> LinearizedSystem:
    a0 = np.asarray(a0)
    n = a0.shape[0]
    top = max([t for t in tpl if isinstance(t, int)], default=0)
    pw = _int_powers(a0, top)
    mats = [pw[t] if isinstance(t, int) else t for t in tpl]
    dtype = np.result_type(a0, np.asarray(p), *mats)
    eye = np.eye(n, dtype=dtype)
    prefix = [eye]
    for m in mats:
        prefix.append(prefix[-1] @ m)
    suffix = [eye]
    for m in reversed(mats):
        suffix.append(m @ suffix[-1])
    suffix.reverse()
    k = np.zeros((n * n, n * n), dtype=dtype)
    for i, t in enumerate(tpl):
        if not isinstance(t, int):
            continue
        left, right = prefix[i], suffix[i + 1]
        for j in range(t):
            k += np.kron((pw[t - 1 - j] @ right).T, left @ pw[j])
    constant = prefix[-1]
    return LinearizedSystem(k, constant, vec(np.asarray(p) - constant))


def linearize(w: WordExpr, a0, b, p=None) -> LinearizedSystem:
    """First-order expansion of ``S(A0 + D, B)`` as ``K vec(D)``.

    ``A0`` only needs to be Hermitian.  With ``p`` omitted the right-hand
    side is ``-vec(S(A0, B))``.
    """
    a0 = as_hermitian(a0).array
    b = as_pd(b)
    if b.n != a0.shape[0]:
        raise DimensionMismatchError(f"A0 is {a0.shape[0]}x{a0.shape[0]} but B is {b.n}x{b.n}")
    tpl = word_template(w, b)
    return linearize_template(tpl, a0, np.zeros_like(a0) if p is None else np.asarray(p))


# --- Newton engine ----------------------------------------------------------


@dataclass
class _Run:
    a: np.ndarray
    residual: float
    history: List[float]
    iterations: int
    pd: bool

    @property
    def solution(self) -> Optional[PDMatrix]:
        try:
            return PDMatrix(self.a)
        except MatrixError:
            return None


def _newton_run(tpl: Template, p: np.ndarray, a0: np.ndarray, tol: float, max_iters: int, max_halvings: int) -> _Run:
    a = np.array(a0, dtype=np.result_type(a0, p, *[t for t in tpl if not isinstance(t, int)]))
    res = relative_residual(evaluate_template(tpl, a), p)
    history = [res]
    its = 0
    while res > tol and its < max_iters:
        system = linearize_template(tpl, a, p)
        d = unvec(np.linalg.lstsq(system.operator, system.rhs, rcond=None)[0], a.shape[0])
        d = (d + d.conj().T) / 2
        alpha = 1.0
        for _ in range(max_halvings + 1):
            trial = a + alpha * d
            r = relative_residual(evaluate_template(tpl, trial), p)
            if r < res:
                break
            alpha /= 2
        else:
            log.debug("line search stalled at residual %.3e", res)
            break
        a, res = trial, r
        its += 1
        history.append(res)
    a = (a + a.conj().T) / 2
    try:
        PDMatrix(a)
        pd = True
    except MatrixError:
        pd = False
    return _Run(a, res, history, its, pd)


def scalar_start(tpl: Template, p) -> float:
    """Scale ``a`` so that ``a^{deg} ||S(I)|| = ||P||`` (the 1x1 solution in norm)."""
    deg = template_a_degree(tpl)
    n = np.shape(p)[0]
    s_identity = evaluate_template(tpl, np.eye(n))
    return float((np.linalg.norm(p, 2) / np.linalg.norm(s_identity, 2)) ** (1.0 / deg))


def start_matrix(tpl: Template, p, index: int, opts: SolveOptions, real: bool) -> np.ndarray:
    """Start 0 is the scaled identity; later starts are seeded random PD matrices."""
    n = np.shape(p)[0]
    a = opts.start_scale * scalar_start(tpl, p)
    if index == 0:
        return a * np.eye(n)
    cond = 10.0
    m = random_pd(n, (opts.seed, index), cond, real=real, scale=a / np.sqrt(cond))
    return m.array


def _is_real(*mats) -> bool:
    return not any(np.iscomplexobj(np.asarray(m)) for m in mats)


def _succeeded(run: _Run, tol: float) -> bool:
    return run.residual <= tol and run.pd


def newton_template(tpl: Template, p, opts: SolveOptions, trail: Optional[ReductionTrail] = None) -> SolveReport:
    """Damped, Hermitized Newton with up to ``opts.starts`` restarts."""
    p = np.asarray(p)
    real = _is_real(p, *[t for t in tpl if not isinstance(t, int)])
    best: Optional[_Run] = None
    used = 0
    for index in range(opts.starts):
        used += 1
        run = _newton_run(tpl, p, start_matrix(tpl, p, index, opts, real), opts.tol, opts.max_iters, opts.max_halvings)
        rank = (not run.pd, run.residual)
        if best is None or rank < (not best.pd, best.residual):
            best = run
        if _succeeded(run, opts.tol):
            break
        log.info("start %d ended at residual %.3e (pd=%s)", index, run.residual, run.pd)
    ok = _succeeded(best, opts.tol)
    return SolveReport(
        solution=best.solution if best.pd else None,
        relative_residual=best.residual,
        iterations=best.iterations,
        residual_history=best.history,
        trail=trail or ReductionTrail(),
        starts_used=used,
        dispersion=0.0,
        method=NEWTON,
        converged=ok,
        best_iterate=best.a,
    )


def newton_solve(eq: Equation, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Newton iteration on an equation whose A exponents are positive integers."""
    return newton_template(word_template(eq.word, eq.B), eq.P.array, opts)


# --- dispatch ---------------------------------------------------------------


def _aba_pattern(w: WordExpr):
    fs = w.factors
    if len(fs) == 3 and fs[0][0] == "A" and fs[1][0] == "B" and fs[0] == fs[2]:
        return fs[0][1], fs[1][1]
    return None


def solve(eq: Equation, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Reduce, solve by closed form or Newton, and map the solution back.

    The reported residual is measured on the original equation.
    """
    reduced, trail = reduce_fully(eq)
    w = reduced.word
    aba = _aba_pattern(w)
    if len(w) == 1:
        sol = solve_power(w.factors[0][1], reduced.P)
        report = SolveReport(sol, 0.0, 0, [], trail, 0, 0.0, CLOSED_FORM_POWER, True)
    elif aba is not None:
        p_exp, q_exp = aba
        x = solve_aba(matrix_power(reduced.B, q_exp), reduced.P)
        sol = matrix_power(x, 1 / p_exp)
        report = SolveReport(sol, 0.0, 0, [], trail, 0, 0.0, CLOSED_FORM_ABA, True)
    else:
        inner = SolveOptions(
            tol=max(opts.tol * 1e-2, 1e-14),
            max_iters=opts.max_iters,
            max_halvings=opts.max_halvings,
            starts=opts.starts,
            seed=opts.seed,
            start_scale=opts.start_scale,
        )
        report = newton_solve(reduced, inner)
        report.trail = trail
        if report.solution is None:
            report.converged = False
            return report
    report.solution = map_back(trail, report.solution)
    report.relative_residual = verify(eq, report.solution)
    report.converged = report.relative_residual <= opts.tol
    return report


# --- uniqueness probe -------------------------------------------------------


@dataclass
class ProbeReport:
    solutions: List[PDMatrix]
    residuals: List[float]
    converged: List[bool]
    dispersion: float

    @property
    def n_converged(self) -> int:
        return sum(self.converged)


def dispersion(solutions: Sequence) -> float:
    """Largest pairwise ``||X_i - X_j||_F / max(||X_i||_F, ||X_j||_F)``."""
    arrs = [np.asarray(s) for s in solutions]
    worst = 0.0
    for i in range(len(arrs)):
        for j in range(i + 1, len(arrs)):
            den = max(np.linalg.norm(arrs[i]), np.linalg.norm(arrs[j]))
            worst = max(worst, float(np.linalg.norm(arrs[i] - arrs[j]) / den))
    return worst


def uniqueness_probe(eq: Equation, opts: SolveOptions = SolveOptions()) -> ProbeReport:
    """Run Newton from every start independently and measure how far the PD solutions spread."""
    tpl = word_template(eq.word, eq.B)
    p = eq.P.array
    real = _is_real(p, *[t for t in tpl if not isinstance(t, int)])
    sols, res, ok = [], [], []
    for index in range(opts.starts):
        run = _newton_run(tpl, p, start_matrix(tpl, p, index, opts, real), opts.tol, opts.max_iters, opts.max_halvings)
        good = _succeeded(run, opts.tol)
        ok.append(good)
        res.append(run.residual)
        if good:
            sols.append(run.solution)
    return ProbeReport(sols, res, ok, dispersion(sols))


# --- fixed-point map --------------------------------------------------------


def split_outer_a(w: WordExpr) -> WordExpr:
    """Inner word ``S`` of ``A S A``: peel one power of A from each end."""
    fs = w.factors
    if not fs or fs[0][0] != "A" or fs[0][1] < 1:
        raise ValueError(f"word {format_word(w)!r} is not of the form A S(A,B) A")
    if len(fs) == 1:
        if fs[0][1] < 2:
            raise ValueError(f"word {format_word(w)!r} is not of the form A S(A,B) A")
        return WordExpr((("A", fs[0][1] - 2),))
    return WordExpr((("A", fs[0][1] - 1),) + fs[1:-1] + (("A", fs[-1][1] - 1),))


def fixed_point_scale(x, eq: Equation, k: int) -> float:
    """``||P|| ||P^{-1}||^{1/2} ||B||^{S_{-B}/2} ||B^{-1}||^{S_B/2} ||(X+I/k)^{-1}||^{S_A/2}``."""
    inner = split_outer_a(eq.word)
    sh = shape(inner)
    y = PDMatrix(np.asarray(x) + np.eye(eq.n) / k)
    p_norm = spectral_norm(eq.P)
    p_inv = 1.0 / eq.P.min_eigenvalue
    b_norm = spectral_norm(eq.B)
    b_inv = 1.0 / eq.B.min_eigenvalue
    y_inv = 1.0 / y.min_eigenvalue
    return float(
        p_norm
        * p_inv**0.5
        * b_norm ** (float(sh.s_b_neg) / 2)
        * b_inv ** (float(sh.s_b_pos) / 2)
        * y_inv ** (float(sh.s_a) / 2)
    )


def fixed_point_map(x, eq: Equation, k: int) -> PDMatrix:
    """``f_k(X) = P # S(X + I/k, B)^{-1} / g_k(X)`` on the PSD unit ball.

    ``eq.word`` is read as ``A S(A,B) A``; ``S`` supplies the exponent sums.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    h = as_hermitian(x)
    w = np.linalg.eigvalsh(h.array)
    if w[0] < -1e-12 or w[-1] > 1 + 1e-12:
        raise ValueError("X must be positive semidefinite with spectral norm <= 1")
    inner = split_outer_a(eq.word)
    y = PDMatrix(h.array + np.eye(eq.n) / k)
    # P # S^{-1} = P^{1/2} (P^{1/2} S P^{1/2})^{-1/2} P^{1/2}; S itself may be
    # too ill-conditioned for PD validation, so it stays a raw array
    ph = powers(eq.P, (0.5,))[0.5]
    t = ph @ word_product(inner, y, eq.B) @ ph
    lam, u = np.linalg.eigh((t + t.conj().T) / 2)
    if not lam[0] > 0:
        raise MatrixError(f"S(X + I/{k}, B) is numerically singular")
    gm = ph @ ((u * lam**-0.5) @ u.conj().T) @ ph
    return PDMatrix(gm / fixed_point_scale(h.array, eq, k))
