"""Dense Hermitian and positive definite matrix primitives.

Every fractional power goes through one Hermitian eigendecomposition
(``(U D U*)^p = U D^p U*``).  Matrices are stored as read-only numpy arrays;
real input stays real so that real problems produce real answers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

HERMITIAN_RTOL = 1e-12
PD_RTOL = 1e-12
SINGULAR_COND = 1e14

SeedLike = Union[int, Sequence[int]]


class MatrixError(ValueError):
    """Raised when a matrix violates a structural precondition."""


class NotHermitianError(MatrixError):
    pass


class NotPositiveDefiniteError(MatrixError):
    pass


class DimensionMismatchError(MatrixError):
    pass


class SingularMatrixError(MatrixError):
    pass


class EigenSolverError(RuntimeError):
    pass


def _square(x, name: str = "matrix") -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise MatrixError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.number):
        raise MatrixError(f"{name} must be numeric")
    if np.iscomplexobj(a):
        a = a.astype(np.complex128)
        if not np.any(a.imag):
            a = a.real.copy()
    else:
        a = a.astype(np.float64)
    if not np.all(np.isfinite(a)):
        raise MatrixError(f"{name} has non-finite entries")
    return a


class HermitianMatrix:
    """An n-by-n Hermitian matrix with exactly Hermitian storage.

    The constructor rejects inputs whose asymmetry exceeds
    ``1e-12 * (1 + max|entry|)`` and then stores ``(H + H*) / 2``.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = _square(entries, "Hermitian matrix")
        scale = 1.0 + float(np.max(np.abs(a)))
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_RTOL * scale:
            raise NotHermitianError("matrix is not Hermitian within tolerance")
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        self._a = a

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._a)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a.copy() if copy else self._a
        return self._a.astype(dtype)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class PDMatrix(HermitianMatrix):
    """A Hermitian matrix whose smallest eigenvalue exceeds ``1e-12 * ||H||``."""

    __slots__ = ("min_eigenvalue",)

    def __init__(self, entries):
        super().__init__(entries)
        w = _eigvalsh(self._a)
        top = max(abs(w[0]), abs(w[-1]))
        if not w[0] > PD_RTOL * top:
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite (min eigenvalue {w[0]:.3e}, norm {top:.3e})"
            )
        self.min_eigenvalue = float(w[0])


@dataclass(frozen=True)
class SpectralDecomposition:
    unitary: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.unitary
        return (u * self.eigenvalues) @ u.conj().T


def _eigvalsh(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"Hermitian eigensolver failed: {exc}") from exc


def as_hermitian(x) -> HermitianMatrix:
    return x if isinstance(x, HermitianMatrix) else HermitianMatrix(x)


def as_pd(x) -> PDMatrix:
    return x if isinstance(x, PDMatrix) else PDMatrix(x)


def eig_hermitian(h) -> SpectralDecomposition:
    """Ascending eigendecomposition ``H = U diag(w) U*`` of a Hermitian matrix."""
    a = as_hermitian(h).array
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"Hermitian eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(u))):
        raise EigenSolverError("Hermitian eigensolver returned non-finite values")
    return SpectralDecomposition(u, w)


def _power_from(dec: SpectralDecomposition, p: float) -> np.ndarray:
    u = dec.unitary
    return (u * dec.eigenvalues ** float(p)) @ u.conj().T


def matrix_power(a, p: float) -> PDMatrix:
    """Primary PD power ``A^p``; ``p = 0`` gives the identity."""
    a = as_pd(a)
    if p == 0:
        return PDMatrix(np.eye(a.n, dtype=a.array.dtype))
    if p == 1:
        return a
    return PDMatrix(_power_from(eig_hermitian(a), p))


def powers(a, exponents) -> dict:
    """Several primary powers of one PD matrix from a single eigendecomposition.

    Returns plain arrays keyed by exponent.
    """
    a = as_pd(a)
    dec = eig_hermitian(a)
    out = {}
    for p in exponents:
        if p in out:
            continue
        if p == 0:
            out[p] = np.eye(a.n, dtype=a.array.dtype)
        elif p == 1:
            out[p] = a.array
        else:
            m = _power_from(dec, p)
            out[p] = (m + m.conj().T) / 2
    return out


def inverse(a) -> PDMatrix:
    return matrix_power(a, -1)


def spectral_norm(x) -> float:
    """Largest singular value; for a Hermitian matrix, the largest |eigenvalue|."""
    if isinstance(x, HermitianMatrix):
        w = _eigvalsh(x.array)
        return float(max(abs(w[0]), abs(w[-1])))
    a = _square(x)
    return float(np.linalg.norm(a, 2))


def _check_same_dim(*mats) -> None:
    dims = {np.shape(m)[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")


def geometric_mean(c, d) -> PDMatrix:
    """``C # D = C^{1/2} (C^{-1/2} D C^{-1/2})^{1/2} C^{1/2}``."""
    c, d = as_pd(c), as_pd(d)
    _check_same_dim(c.array, d.array)
    half = powers(c, (0.5, -0.5))
    inner = PDMatrix(half[-0.5] @ d.array @ half[-0.5])
    root = matrix_power(inner, 0.5).array
    return PDMatrix(half[0.5] @ root @ half[0.5])


def congruence(x, z) -> HermitianMatrix:
    """``Z* X Z`` for invertible ``Z``; preserves inertia."""
    x = as_hermitian(x)
    z = _square(z, "congruence factor")
    _check_same_dim(x.array, z)
    if np.linalg.cond(z) > SINGULAR_COND:
        raise SingularMatrixError("congruence factor is singular or nearly so")
    y = z.conj().T @ x.array @ z
    return HermitianMatrix((y + y.conj().T) / 2)


def inertia(x, tol: float = 1e-12) -> tuple:
    """(positive, negative, zero) eigenvalue counts, zero meaning |w| <= tol * ||x||."""
    w = _eigvalsh(as_hermitian(x).array)
    cut = tol * max(abs(w[0]), abs(w[-1]), np.finfo(float).tiny)
    return int(np.sum(w > cut)), int(np.sum(w < -cut)), int(np.sum(np.abs(w) <= cut))


def haar_unitary(n: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Haar-distributed orthogonal/unitary matrix (QR with phase correction)."""
    if real:
        g = rng.standard_normal((n, n))
    else:
        g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_pd(
    n: int,
    seed: SeedLike = 0,
    cond_target: float = 10.0,
    real: bool = False,
    scale: float = 1.0,
) -> PDMatrix:
    """Seeded random PD matrix ``Q diag(w) Q*`` with condition number ``cond_target``.

    The extreme eigenvalues are ``scale`` and ``scale * cond_target``; the
    interior ones are log-uniform between them.  Identical arguments give
    bit-identical output.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if cond_target < 1:
        raise ValueError("cond_target must be >= 1")
    rng = np.random.default_rng(seed)
    if n == 1:
        return PDMatrix([[scale * float(np.exp(rng.uniform(0.0, np.log(cond_target) + 1.0)))]])
    logc = np.log(cond_target)
    inner = np.sort(rng.uniform(0.0, logc, n - 2))
    w = scale * np.exp(np.concatenate(([0.0], inner, [logc])))
    q = haar_unitary(n, rng, real=real)
    return PDMatrix((q * w) @ q.conj().T)


def condition_number(a) -> float:
    w = _eigvalsh(as_pd(a).array)
    return float(w[-1] / w[0])


def rel_frobenius(x, y) -> float:
    """``||x - y||_F / ||y||_F``."""
    x, y = np.asarray(x), np.asarray(y)
    den = np.linalg.norm(y)
    return float(np.linalg.norm(x - y) / (den if den > 0 else 1.0))
