"""Generalized symmetric words ``W(A; C_1, ..., C_m)`` and complete invertibility.

A generalized symmetric word is stored by its left half::

    A^{p_1} C_{i_1} A^{p_2} C_{i_2} ... A^{p_m} C_{i_m}  [center]  C_{i_m}* A^{p_m} ... C_{i_1}* A^{p_1}

where the center is either ``A^{p_c}`` or empty (the fold ``C_{i_m} C_{i_m}*``).
Coefficient indices are 1-based, matching the text syntax ``"A C1 A^2 C1* A"``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .matcore import (
    SINGULAR_COND,
    DimensionMismatchError,
    MatrixError,
    PDMatrix,
    SingularMatrixError,
    as_pd,
    matrix_power,
    powers,
)
from .reducer import ReductionTrail, RescaleA, map_back
from .solver import (
    CLOSED_FORM_ABA,
    CLOSED_FORM_POWER,
    SolveOptions,
    SolveReport,
    newton_template,
    relative_residual,
    solve_aba,
    solve_power,
)

GRID_POINTS = 720
ANGLE_RESOLUTION = 1e-12
ZERO_TOL = 1e-10


class GenWordError(ValueError):
    pass


class NotCompletelyInvertibleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GenSymWord:
    exponents: Tuple[Fraction, ...]
    coeffs: Tuple[int, ...]
    center: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(Fraction(e) for e in self.exponents))
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.center is not None:
            object.__setattr__(self, "center", Fraction(self.center))
        if len(self.exponents) != len(self.coeffs):
            raise GenWordError("half must alternate A exponents and coefficients")
        if not self.coeffs and self.center is None:
            raise GenWordError("a word without coefficients needs a central A power")
        if any(e <= 0 for e in self.exponents) or (self.center is not None and self.center <= 0):
            raise GenWordError("all A exponents must be positive")
        if any(c < 1 for c in self.coeffs):
            raise GenWordError("coefficient indices are 1-based")
        exp = self.expanded()
        if exp != adjoint_reversal(exp):
            raise GenWordError("word is not self-adjoint")

    @property
    def m(self) -> int:
        return max(self.coeffs, default=0)

    def expanded(self) -> List[tuple]:
        """Factor list of ``("A", p)`` and ``("C", i, adjoint)`` items."""
        left = []
        for p, c in zip(self.exponents, self.coeffs):
            left += [("A", p), ("C", c, False)]
        right = adjoint_reversal(left)
        mid = [("A", self.center)] if self.center is not None else []
        return left + mid + right

    def a_exponents(self) -> List[Fraction]:
        return [f[1] for f in self.expanded() if f[0] == "A"]

    def __str__(self) -> str:
        return format_genword(self)


def adjoint_reversal(factors: Sequence[tuple]) -> List[tuple]:
    out = []
    for f in reversed(factors):
        out.append(f if f[0] == "A" else ("C", f[1], not f[2]))
    return out


def _fmt_a(p: Fraction) -> str:
    if p == 1:
        return "A"
    if p.denominator == 1:
        return f"A^{p.numerator}"
    return f"A^({p.numerator}/{p.denominator})"


def format_genword(w: GenSymWord) -> str:
    return " ".join(_fmt_a(f[1]) if f[0] == "A" else f"C{f[1]}{'*' if f[2] else ''}" for f in w.expanded())


_GTOKEN = re.compile(
    r"""\s*(?:
        A(?:\^(?:\((?P<pnum>-?\d+)(?:/(?P<pden>\d+))?\)|(?P<num>-?\d+)))?
      | C(?P<idx>\d+)(?P<star>\*)?
    )""",
    re.VERBOSE,
)


def parse_genword(text: str) -> GenSymWord:
    """Parse e.g. ``"A C1 A^2 C2 A C2* A^2 C1* A"`` into its folded form."""
    pos, end = 0, len(text.rstrip())
    items: List[tuple] = []
    while pos < end:
        m = _GTOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise GenWordError(f"syntax error at position {pos}: {text!r}")
        if m.group("idx") is not None:
            items.append(("C", int(m.group("idx")), m.group("star") is not None))
        else:
            if m.group("pden") is not None:
                if int(m.group("pden")) == 0:
                    raise GenWordError(f"zero denominator at position {pos}: {text!r}")
                p = Fraction(int(m.group("pnum")), int(m.group("pden")))
            elif m.group("pnum") is not None:
                p = Fraction(int(m.group("pnum")))
            elif m.group("num") is not None:
                p = Fraction(int(m.group("num")))
            else:
                p = Fraction(1)
            if items and items[-1][0] == "A":
                p += items.pop()[1]
            if p != 0:
                items.append(("A", p))
        pos = m.end()
    if items != adjoint_reversal(items):
        raise GenWordError(f"word is not self-adjoint: {text!r}")
    half = items[: len(items) // 2]
    center = items[len(items) // 2] if len(items) % 2 else None
    if center is not None and center[0] != "A":
        raise GenWordError("a central coefficient C would have to equal its own adjoint; use C C* instead")
    exps, coeffs = [], []
    for i, f in enumerate(half):
        want = "A" if i % 2 == 0 else "C"
        if f[0] != want:
            raise GenWordError("half-word must alternate A powers and coefficients, starting with A")
        if want == "A":
            exps.append(f[1])
        else:
            if f[2]:
                raise GenWordError("left half must use C_i, not C_i*")
            coeffs.append(f[1])
    if len(half) % 2:
        raise GenWordError("left half must end with a coefficient")
    return GenSymWord(tuple(exps), tuple(coeffs), center[1] if center is not None else None)


def _check_coeffs(w: GenSymWord, coeffs: Sequence, n: int) -> List[np.ndarray]:
    mats = [np.asarray(c) for c in coeffs]
    if len(mats) < w.m:
        raise GenWordError(f"word uses C{w.m} but only {len(mats)} coefficient matrices were given")
    for i, c in enumerate(mats, start=1):
        if c.shape != (n, n):
            raise DimensionMismatchError(f"C{i} has shape {c.shape}, expected {(n, n)}")
        if np.linalg.cond(c) > SINGULAR_COND:
            raise SingularMatrixError(f"C{i} is singular or nearly so")
    return mats


def evaluate_genword(w: GenSymWord, a, coeffs: Sequence) -> PDMatrix:
    a = as_pd(a)
    mats = _check_coeffs(w, coeffs, a.n)
    tab = powers(a, set(w.a_exponents()))
    dtype = np.result_type(a.array, *mats)
    out = np.eye(a.n, dtype=dtype)
    for f in w.expanded():
        if f[0] == "A":
            out = out @ tab[f[1]]
        else:
            c = mats[f[1] - 1]
            out = out @ (c.conj().T if f[2] else c)
    return PDMatrix((out + out.conj().T) / 2)


# --- field of values -------------------------------------------------------


@dataclass(frozen=True)
class FovCertificate:
    """``margin = max_theta lambda_min(Re(e^{i theta} C))``; 0 is outside F(C) iff margin > 0."""

    contains_zero: bool
    margin: float
    theta_star: float
    grid_points: int

    def to_dict(self):
        return {
            "contains_zero": self.contains_zero,
            "margin": self.margin,
            "theta_star": self.theta_star,
            "grid_points": self.grid_points,
        }


def rotated_margin(c, theta: float) -> float:
    c = np.asarray(c)
    r = np.exp(1j * theta) * c
    return float(np.linalg.eigvalsh((r + r.conj().T) / 2)[0])


def _wrap(theta: float) -> float:
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if t == -math.pi else t


def is_completely_invertible(c, grid_points: int = GRID_POINTS) -> FovCertificate:
    """Test ``0 not in F(C)`` by rotating ``C`` until its Hermitian part is PD."""
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {c.shape}")
    thetas = 2 * np.pi * np.arange(grid_points) / grid_points
    vals = np.array([rotated_margin(c, t) for t in thetas])
    j = int(np.argmax(vals))  # first maximiser: smallest angle on ties
    step = 2 * np.pi / grid_points
    lo, hi = thetas[j] - step, thetas[j] + step
    inv_phi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo)
    f1, f2 = rotated_margin(c, x1), rotated_margin(c, x2)
    while hi - lo > ANGLE_RESOLUTION:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = rotated_margin(c, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = rotated_margin(c, x2)
    theta = (lo + hi) / 2
    if rotated_margin(c, theta) < vals[j]:
        theta = float(thetas[j])
    theta = _wrap(theta)
    margin = rotated_margin(c, theta)
    scale = max(float(np.linalg.norm(c, 2)), np.finfo(float).tiny)
    return FovCertificate(margin <= ZERO_TOL * scale, margin, theta, grid_points)


# --- solving ---------------------------------------------------------------


def genword_template(w: GenSymWord, mats: Sequence[np.ndarray]) -> Tuple[list, int]:
    """Newton template with A exponents scaled to integers; returns (template, L)."""
    L = math.lcm(*[e.denominator for e in w.a_exponents()])
    tpl = []
    for f in w.expanded():
        if f[0] == "A":
            tpl.append(int(f[1] * L))
        else:
            c = mats[f[1] - 1]
            tpl.append(c.conj().T if f[2] else c)
    return tpl, L


def solve_genword(w: GenSymWord, coeffs: Sequence, p, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Solve ``W(A; C_1, ..., C_m) = P`` for PD ``A``.

    Coefficients failing the complete-invertibility test only trigger a
    :class:`NotCompletelyInvertibleWarning`; their certificates are kept in
    ``report.notes["fov"]``.
    """
    p = as_pd(p)
    mats = _check_coeffs(w, coeffs, p.n)
    used = sorted(set(w.coeffs))
    certs = {i: is_completely_invertible(mats[i - 1]) for i in used}
    for i, cert in certs.items():
        if cert.contains_zero:
            warnings.warn(
                f"C{i} is not completely invertible (0 in its field of values); solvability is not guaranteed",
                NotCompletelyInvertibleWarning,
                stacklevel=2,
            )
    notes = {"fov": {f"C{i}": cert.to_dict() for i, cert in certs.items()}}

    if not w.coeffs:
        sol = solve_power(w.center, p)
        report = SolveReport(sol, 0.0, 0, [], ReductionTrail(), 0, 0.0, CLOSED_FORM_POWER, True)
    elif len(w.coeffs) == 1 and w.center is None:
        c = mats[w.coeffs[0] - 1]
        x = solve_aba(PDMatrix(c @ c.conj().T), p)
        sol = matrix_power(x, 1 / w.exponents[0])
        report = SolveReport(sol, 0.0, 0, [], ReductionTrail(), 0, 0.0, CLOSED_FORM_ABA, True)
    else:
        tpl, L = genword_template(w, mats)
        trail = ReductionTrail((RescaleA(L),) if L > 1 else ())
        inner = SolveOptions(
            tol=max(opts.tol * 1e-2, 1e-14),
            max_iters=opts.max_iters,
            max_halvings=opts.max_halvings,
            starts=opts.starts,
            seed=opts.seed,
            start_scale=opts.start_scale,
        )
        report = newton_template(tpl, p.array, inner, trail)
        if report.solution is None:
            report.converged = False
            report.notes = notes
            return report
        report.solution = map_back(trail, report.solution)
    report.relative_residual = relative_residual(evaluate_genword(w, report.solution, mats), p)
    report.converged = report.relative_residual <= opts.tol
    report.notes = notes
    return report
