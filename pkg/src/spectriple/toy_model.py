"""
A finite model on an 8-dimensional Hilbert space with two coupling constants.

The algebra is M_2 + M_2.  The first summand acts on the first four basis
vectors as B (x) 1_2, the second on the last four as 1_2 (x) m; the real
structure exchanges the two halves, so the right action puts the factors the
other way around.  The grading forces the first summand to be diagonal, which
cuts the algebra down to the even subalgebra spanned by

    (diag(1,0), 0), (diag(0,1), 0), (0, E_11), (0, E_12), (0, E_21), (0, E_22).

The Dirac operator couples the two diagonal entries of the first summand with
strength k_x and the two halves of H with strength k_y; the k_y coupling is
what violates the first-order condition.  Inner fluctuations close on two
fields: a complex coefficient x multiplying the k_x entries and a complex
2-vector v entering the k_y block as the rank-one matrix v v^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .matrix_core import AntilinearOp, as_matrix, identity
from .spectral_triple import (
    AlgebraElement,
    AlgebraSpec,
    FiniteSpectralTriple,
    KOSigns,
    RepBlock,
)
from .perturbation import UniversalOneForm

__all__ = [
    "FieldPoint",
    "ToyParams",
    "a_ev",
    "a_f",
    "assemble_dirac",
    "build_toy",
    "closed_dirac",
    "extract_fields",
    "full_algebra",
    "y_block",
]


@dataclass(frozen=True)
class ToyParams:
    """Couplings of the model; both may be complex, k_y = 0 is allowed."""

    k_x: complex = 1.0
    k_y: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k_x", complex(self.k_x))
        object.__setattr__(self, "k_y", complex(self.k_y))


@dataclass(frozen=True)
class FieldPoint:
    """Values of the two fields: scalar x and 2-vector v = (v1, v2)."""

    x: complex
    v1: complex
    v2: complex

    def __post_init__(self):
        for name in ("x", "v1", "v2"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def v(self) -> np.ndarray:
        return np.array([self.v1, self.v2], dtype=complex)

    @classmethod
    def unfluctuated(cls) -> "FieldPoint":
        """The point where the fluctuated operator is the bare D."""
        return cls(1.0, 1.0, 0.0)


@lru_cache(maxsize=None)
def full_algebra() -> AlgebraSpec:
    """The ambient M_2 + M_2 (zeroth order holds, but the grading fails)."""
    return AlgebraSpec((2, 2))


def _ev_basis():
    z = np.zeros((2, 2), dtype=complex)
    elems = [
        AlgebraElement((np.diag([1.0, 0.0]).astype(complex), z)),
        AlgebraElement((np.diag([0.0, 1.0]).astype(complex), z)),
    ]
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            elems.append(AlgebraElement((z, e)))
    return tuple(elems)


@lru_cache(maxsize=None)
def a_ev() -> AlgebraSpec:
    """The even subalgebra: diagonal first summand, full second summand."""
    return AlgebraSpec((2, 2), basis=_ev_basis())


@lru_cache(maxsize=None)
def a_f() -> AlgebraSpec:
    """
    The largest subalgebra satisfying the first-order condition: the upper
    diagonal entry of the first summand is tied to the upper diagonal entry
    of the second.
    """
    z = np.zeros((2, 2), dtype=complex)
    e11 = np.diag([1.0, 0.0]).astype(complex)
    e22 = np.diag([0.0, 1.0]).astype(complex)
    return AlgebraSpec(
        (2, 2),
        basis=(
            AlgebraElement((e11, e11)),
            AlgebraElement((e22, z)),
            AlgebraElement((z, e22)),
        ),
    )


def assemble_dirac(x_entry: complex, y_mat) -> np.ndarray:
    """
    Hermitian 8x8 operator with the model's sparsity pattern: ``x_entry`` at
    the four k_x positions (conjugated where hermiticity demands it) and the
    2x2 block ``y_mat`` coupling the primed to the unprimed half.
    """
    x_entry = complex(x_entry)
    y_mat = as_matrix(y_mat)
    if y_mat.shape != (2, 2):
        raise ValueError("y block must be 2x2")
    d = np.zeros((8, 8), dtype=complex)
    d[0, 2] = d[1, 3] = x_entry
    d[2, 0] = d[3, 1] = np.conj(x_entry)
    d[4, 6] = d[5, 7] = np.conj(x_entry)
    d[6, 4] = d[7, 5] = x_entry
    d[4:6, 0:2] = y_mat
    d[0:2, 4:6] = y_mat.conj().T
    return d


def y_block(op) -> np.ndarray:
    """The primed-to-unprimed 2x2 coupling block of an 8x8 operator."""
    return as_matrix(op)[4:6, 0:2].copy()


def build_toy(params: ToyParams = ToyParams()) -> FiniteSpectralTriple:
    """The spectral triple of the model, carrying the even subalgebra."""
    d = assemble_dirac(params.k_x, params.k_y * np.outer([1.0, 0.0], [1.0, 0.0]))
    gamma = np.diag([1, 1, -1, -1, -1, -1, 1, 1]).astype(complex)
    swap = np.zeros((8, 8), dtype=complex)
    swap[0:4, 4:8] = identity(4)
    swap[4:8, 0:4] = identity(4)
    return FiniteSpectralTriple(
        algebra=a_ev(),
        dim_h=8,
        rep_blocks=(
            RepBlock(summand=0, left_mult_dim=1, right_mult_dim=2, mode="plain", offset=0),
            RepBlock(summand=1, left_mult_dim=2, right_mult_dim=1, mode="plain", offset=4),
        ),
        d=d,
        j=AntilinearOp(swap),
        gamma=gamma,
        signs=KOSigns(eps_j=+1, eps_d=+1, eps_gamma=-1),
    )


def closed_dirac(params: ToyParams, fp: FieldPoint) -> np.ndarray:
    """The fluctuated operator at a field point: x scales k_x, v v^T scales k_y."""
    return assemble_dirac(params.k_x * fp.x, params.k_y * np.outer(fp.v, fp.v))


def extract_fields(w: UniversalOneForm) -> FieldPoint:
    """
    Field point of a one-form over the even subalgebra.

    For each pair (a, b) with a = (diag(r', l'), m') and b = (diag(r, l), m)
    the contributions are

        phi     += r' (l - r)
        sigma_1 += m'[0,0] r - (m' m)[0,0]
        sigma_2 += m'[1,0] r - (m' m)[1,0]

    and the fields are x = 1 + phi, v = (1 + sigma_1, sigma_2).  When the
    represented one-form is self-adjoint, the full fluctuation of the model's
    D equals ``closed_dirac`` at this point.
    """
    spec = a_ev()
    phi = 0.0 + 0.0j
    sig1 = 0.0 + 0.0j
    sig2 = 0.0 + 0.0j
    for idx, (a, b) in enumerate(w.pairs):
        if not spec.contains(a) or not spec.contains(b):
            raise ValueError(f"pair {idx} is not in the even subalgebra")
        r_p = a.blocks[0][0, 0]
        m_p = a.blocks[1]
        r, l = b.blocks[0][0, 0], b.blocks[0][1, 1]
        m = b.blocks[1]
        phi += r_p * (l - r)
        mm = m_p @ m
        sig1 += m_p[0, 0] * r - mm[0, 0]
        sig2 += m_p[1, 0] * r - mm[1, 0]
    return FieldPoint(1.0 + phi, 1.0 + sig1, sig2)
