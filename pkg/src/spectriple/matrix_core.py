"""
Dense complex linear algebra with tolerance-based comparison and
antilinear-operator support.

Operators live in plain numpy arrays of dtype complex128.  The helpers here
add the shape discipline the rest of the package relies on (mismatched shapes
are rejected, never broadcast) and the conjugation rule for antilinear
operators J = m ∘ (complex conjugation), which carries the real structure of
a spectral triple and the "hat" operation T -> J T J^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AntilinearOp",
    "adjoint",
    "approx_eq",
    "as_matrix",
    "commutator",
    "conj_by_antilinear",
    "frob_norm",
    "identity",
    "kron",
    "mat_mul",
    "matrix_unit",
    "random_matrix",
]


def as_matrix(data) -> np.ndarray:
    """Coerce to a 2-d complex128 array (no copies when already one)."""
    m = np.asarray(data, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """The n x n matrix unit E_ij (single 1 at row i, column j)."""
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Matrix product with an explicit inner-dimension check.

    Plain ``a @ b`` happily broadcasts some shape mistakes; every product in
    this package goes through here (or through ``@`` on shapes already
    validated at construction time).
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch for product: {a.shape} x {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """ab - ba for square matrices of the same size."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"commutator needs equal square shapes, got {a.shape}, {b.shape}")
    return a @ b - b @ a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (i,k),(j,l) ordering with the a-index major."""
    return np.kron(as_matrix(a), as_matrix(b))


def frob_norm(a: np.ndarray) -> float:
    """Frobenius norm: square root of the sum of squared entry moduli."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def approx_eq(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """
    True iff ||a - b||_F <= tol * max(1, ||a||_F, ||b||_F).

    The max(1, ...) floor makes the comparison absolute near zero and
    relative at scale, which is the single tolerance convention used across
    the package.
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for comparison: {a.shape} vs {b.shape}")
    return frob_norm(a - b) <= tol * max(1.0, frob_norm(a), frob_norm(b))


@dataclass(frozen=True, eq=False)
class AntilinearOp:
    """
    Antilinear operator xi -> m @ conj(xi).

    Only the matrix part is stored; the conjugation semantics are fixed by
    convention.  Composing two of these gives a plain linear matrix, and
    conjugating a linear operator T gives J T J^{-1} = m @ conj(T) @ inv(m)
    (exact for the signed-permutation m's used by the shipped models).
    """

    m: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.m)
        if m.shape[0] != m.shape[1]:
            raise ValueError("antilinear operator needs a square matrix part")
        object.__setattr__(self, "m", m)
        try:
            m_inv = np.linalg.inv(m)
        except np.linalg.LinAlgError as exc:
            raise ValueError("antilinear operator matrix part is singular") from exc
        object.__setattr__(self, "_m_inv", m_inv)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def apply(self, xi: np.ndarray) -> np.ndarray:
        """Apply to a vector (or columnwise to a matrix of vectors)."""
        return self.m @ np.conj(xi)

    def conjugate(self, t: np.ndarray) -> np.ndarray:
        """J T J^{-1} for a linear operator t."""
        t = as_matrix(t)
        if t.shape != self.m.shape:
            raise ValueError(f"operator shape {t.shape} does not match J dimension {self.m.shape}")
        return self.m @ np.conj(t) @ self._m_inv

    def compose(self, other: "AntilinearOp") -> np.ndarray:
        """The linear map (m1 conj) ∘ (m2 conj) = m1 @ conj(m2)."""
        if self.m.shape != other.m.shape:
            raise ValueError("dimension mismatch composing antilinear operators")
        return self.m @ np.conj(other.m)

    def square(self) -> np.ndarray:
        """J^2 as a linear matrix (equals eps_J * identity for real structures)."""
        return self.compose(self)


def conj_by_antilinear(j: AntilinearOp, t: np.ndarray) -> np.ndarray:
    """Functional form of :meth:`AntilinearOp.conjugate` (the hat operation)."""
    return j.conjugate(t)


def random_matrix(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    """Complex standard-normal matrix, the stock randomness for tests/CLI."""
    if cols is None:
        cols = rows
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
