"""Dense matrix and polynomial helpers for low-order (n <= 8) systems.

Matrices are plain 2-D float ``numpy`` arrays.  Polynomials are stored
highest power first, the same ordering ``numpy.polyval`` uses.
"""

from __future__ import annotations

import warnings
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from servoctl.errors import DimensionMismatch, InvalidPolynomial, SingularMatrix

MAX_ORDER = 8
RANK_TOL = 1e-9


class Polynomial:
    """Real polynomial, coefficients highest degree first.

    Leading zeros are stripped at construction; the zero polynomial is
    stored as ``[0.0]`` and has degree 0.  Instances are immutable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[float]):
        if not isinstance(coeffs, np.ndarray):
            coeffs = list(coeffs)
        c = np.atleast_1d(np.array(coeffs, dtype=float))
        if c.ndim != 1:
            raise InvalidPolynomial("coefficients must be a flat sequence")
        if not np.all(np.isfinite(c)):
            raise InvalidPolynomial("coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[nz[0]:] if nz.size else np.zeros(1)
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> Polynomial:
        if not len(roots):
            return cls([1.0])
        return cls(np.poly(np.asarray(roots, dtype=complex)).real)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return float(self.coeffs[0])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, s):
        return np.polyval(self.coeffs, s)

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial(np.polyadd(self.coeffs, _coerce(other).coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return Polynomial(np.polysub(self.coeffs, _coerce(other).coeffs))

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, float)):
            return Polynomial(self.coeffs * float(other))
        return Polynomial(np.polymul(self.coeffs, _coerce(other).coeffs))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def monic(self) -> Polynomial:
        return Polynomial(self.coeffs / self.coeffs[0])

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


def _coerce(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _square(m, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > MAX_ORDER:
        raise DimensionMismatch(f"{name} has order {a.shape[0]} > {MAX_ORDER}")
    return a


def companion(p: Polynomial) -> np.ndarray:
    """Frobenius companion matrix whose eigenvalues are the roots of ``p``."""
    c = p.coeffs / p.coeffs[0]
    n = p.degree
    m = np.zeros((n, n))
    m[0, :] = -c[1:]
    m[1:, :-1] = np.eye(n - 1)
    return m


def poly_roots(p: Polynomial) -> list[complex]:
    p = _coerce(p)
    if p.degree < 1:
        raise InvalidPolynomial(f"need degree >= 1, got {p!r}")
    return eigenvalues(companion(p))


def eigenvalues(m) -> list[complex]:
    """Eigenvalues with multiplicity, sorted by (real, imag)."""
    a = _square(m)
    if a.shape[0] == 0:
        return []
    ev = np.linalg.eigvals(a)
    return sorted((complex(v) for v in ev), key=lambda z: (z.real, z.imag))


def charpoly(m) -> Polynomial:
    """Characteristic polynomial det(sI - M) via Faddeev-LeVerrier."""
    a = _square(m)
    n = a.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(a)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ mk) / k)
    return Polynomial(coeffs)


def matrix_exp(m) -> np.ndarray:
    # scipy's expm is scaling-and-squaring with a Pade(13) core.
    a = _square(m)
    if a.shape[0] == 0:
        return a.copy()
    return scipy.linalg.expm(a)


def linear_solve(m, rhs) -> np.ndarray:
    """Solve ``m @ x = rhs`` by partial-pivot LU.

    Raises :class:`SingularMatrix` when a pivot falls below
    ``1e-12 * max|m|``.
    """
    a = _square(m)
    b = np.asarray(rhs, dtype=float)
    vector = b.ndim == 1
    b = b.reshape(a.shape[0], -1)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-12 * scale:
        raise SingularMatrix(f"pivot below {1e-12 * scale:.3g}")
    x = scipy.linalg.lu_solve((lu, piv), b)
    return x.ravel() if vector else x


def controllability_matrix(a, b) -> np.ndarray:
    a = _square(a, "A")
    b = as_matrix(b, "B")
    n = a.shape[0]
    if b.shape != (n, 1):
        raise DimensionMismatch(f"B must be {n}x1, got {b.shape}")
    cols = [b]
    for _ in range(n - 1):
        cols.append(a @ cols[-1])
    return np.hstack(cols)


def matrix_rank(m, tol: float = RANK_TOL) -> int:
    """Numerical rank by Gaussian elimination with complete pivoting.

    A pivot counts when it exceeds ``tol`` times the first (largest) pivot.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.array(as_matrix(m), dtype=float)
    rows, cols = a.shape
    rank = 0
    first = None
    for k in range(min(rows, cols)):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        pivot = sub[i, j]
        if first is None:
            first = pivot
        if first == 0.0 or pivot <= tol * first:
            break
        i += k
        j += k
        a[[k, i], :] = a[[i, k], :]
        a[:, [k, j]] = a[:, [j, k]]
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k:])
        rank += 1
    return rank
