"""Symmetric word equations in two positive definite letters."""

from .matcore import (
    HermitianMatrix,
    PDMatrix,
    congruence,
    eig_hermitian,
    geometric_mean,
    matrix_power,
    random_pd,
    spectral_norm,
)
from .reducer import Equation, map_back, reduce_fully
from .solver import SolveOptions, SolveReport, newton_solve, solve, solve_aba, solve_power, uniqueness_probe
from .wordlang import WordExpr, evaluate, format_word, parse_word, shape

__version__ = "0.1.0"

__all__ = [
    "Equation",
    "HermitianMatrix",
    "PDMatrix",
    "SolveOptions",
    "SolveReport",
    "WordExpr",
    "congruence",
    "eig_hermitian",
    "evaluate",
    "format_word",
    "geometric_mean",
    "map_back",
    "matrix_power",
    "newton_solve",
    "parse_word",
    "random_pd",
    "reduce_fully",
    "shape",
    "solve",
    "solve_aba",
    "solve_power",
    "spectral_norm",
    "uniqueness_probe",
]
