"""
Finite real spectral triples (A, H, D; J, gamma) and their axiom checks.

The algebra is a direct sum of full matrix algebras, optionally cut down to a
subalgebra by an explicit spanning set (that is how the even subalgebra and
the first-order subalgebra of the toy model are expressed).  The
representation on H is encoded by tiling blocks of the form
I_left ⊗ a_summand ⊗ I_right; the right action is never stored, it is always
derived as pi_op(a) = J pi(a)* J^{-1}.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np
from scipy.linalg import expm

from .matrix_core import (
    AntilinearOp,
    adjoint,
    as_matrix,
    commutator,
    frob_norm,
    identity,
    matrix_unit,
    random_matrix,
)

__all__ = [
    "AlgebraElement",
    "AlgebraSpec",
    "CheckReport",
    "FiniteSpectralTriple",
    "KOReport",
    "KOSigns",
    "RepBlock",
    "anti_hermitian_basis",
    "check_first_order",
    "check_ko_signs",
    "check_zeroth_order",
    "random_element",
    "random_hermitian",
    "random_unitary",
    "represent",
    "represent_opposite",
    "spanning_set",
]

_MODES = ("plain", "transpose", "conjugate", "conjugate-transpose")


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """One matrix block per summand of the parent :class:`AlgebraSpec`."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(as_matrix(b) for b in self.blocks))
        for b in self.blocks:
            if b.shape[0] != b.shape[1]:
                raise ValueError("algebra blocks must be square")

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_shapes(other)
        return AlgebraElement(tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_shapes(other)
        return AlgebraElement(tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_shapes(other)
        return AlgebraElement(tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __rmul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(tuple(complex(scalar) * b for b in self.blocks))

    def __neg__(self) -> "AlgebraElement":
        return (-1.0) * self

    def star(self) -> "AlgebraElement":
        """Blockwise adjoint (the involution of the algebra)."""
        return AlgebraElement(tuple(adjoint(b) for b in self.blocks))

    def vec(self) -> np.ndarray:
        """Flatten to a single complex coordinate vector (for membership tests)."""
        return np.concatenate([b.ravel() for b in self.blocks])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec()))

    def _check_shapes(self, other: "AlgebraElement") -> None:
        if len(self.blocks) != len(other.blocks) or any(
            a.shape != b.shape for a, b in zip(self.blocks, other.blocks)
        ):
            raise ValueError("algebra elements live over different summand structures")


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """
    Direct sum of full matrix algebras M_{n_1} ⊕ ... ⊕ M_{n_k}, optionally
    constrained to the span of an explicit basis of elements.

    A constraint basis must be closed under products and adjoints (checked at
    construction on the spanning set), which is exactly what makes the span a
    *-subalgebra.
    """

    summands: tuple
    basis: tuple | None = None

    def __post_init__(self):
        summands = tuple(int(n) for n in self.summands)
        if not summands or any(n < 1 for n in summands):
            raise ValueError("need at least one summand, all sizes >= 1")
        object.__setattr__(self, "summands", summands)
        if self.basis is not None:
            basis = tuple(self.basis)
            if not basis:
                raise ValueError("constraint basis must be nonempty")
            for e in basis:
                if tuple(b.shape[0] for b in e.blocks) != summands:
                    raise ValueError("constraint basis element has wrong summand shapes")
            object.__setattr__(self, "basis", basis)
            object.__setattr__(self, "_basis_mat", np.column_stack([e.vec() for e in basis]))
            self._check_closure()
        else:
            object.__setattr__(self, "_basis_mat", None)

    def _check_closure(self):
        for i, a in enumerate(self.basis):
            if not self.contains(a.star()):
                raise ValueError(f"constraint basis not closed under adjoint (element {i})")
            for k, b in enumerate(self.basis):
                if not self.contains(a * b):
                    raise ValueError(f"constraint basis not closed under product ({i},{k})")

    @property
    def ambient_dim(self) -> int:
        return sum(n * n for n in self.summands)

    def dim(self) -> int:
        """Complex dimension of the (sub)algebra."""
        return len(self.basis) if self.basis is not None else self.ambient_dim

    def unit(self) -> AlgebraElement:
        return AlgebraElement(tuple(identity(n) for n in self.summands))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(tuple(np.zeros((n, n), dtype=complex) for n in self.summands))

    def element(self, *blocks) -> AlgebraElement:
        """Build an element from per-summand blocks (scalars allowed for 1x1)."""
        mats = []
        for n, b in zip(self.summands, blocks, strict=True):
            b = np.atleast_2d(np.asarray(b, dtype=complex))
            if b.shape != (n, n):
                raise ValueError(f"block shape {b.shape} does not match summand size {n}")
            mats.append(b)
        return AlgebraElement(tuple(mats))

    def contains(self, a: AlgebraElement, tol: float = 1e-9) -> bool:
        """Membership test: shapes match and (if constrained) a is in the span."""
        if tuple(b.shape[0] for b in a.blocks) != self.summands:
            return False
        if self.basis is None:
            return True
        v = a.vec()
        coeffs, *_ = np.linalg.lstsq(self._basis_mat, v, rcond=None)
        resid = np.linalg.norm(self._basis_mat @ coeffs - v)
        return resid <= tol * max(1.0, float(np.linalg.norm(v)))


def spanning_set(spec: AlgebraSpec) -> list:
    """
    A spanning set of the algebra as a complex vector space: the constraint
    basis when present, otherwise the matrix units of every summand.
    """
    if spec.basis is not None:
        return list(spec.basis)
    out = []
    for s, n in enumerate(spec.summands):
        for i in range(n):
            for j in range(n):
                blocks = [np.zeros((m, m), dtype=complex) for m in spec.summands]
                blocks[s] = matrix_unit(n, i, j)
                out.append(AlgebraElement(tuple(blocks)))
    return out


@dataclass(frozen=True)
class RepBlock:
    """
    One tile of the representation: the summand acts as
    I_left ⊗ mode(block) ⊗ I_right starting at ``offset`` on H.
    """

    summand: int
    left_mult_dim: int
    right_mult_dim: int
    mode: str = "plain"
    offset: int = 0

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown representation mode {self.mode!r}")
        if self.left_mult_dim < 1 or self.right_mult_dim < 1:
            raise ValueError("multiplicity dimensions must be positive")


def _apply_mode(block: np.ndarray, mode: str) -> np.ndarray:
    if mode == "plain":
        return block
    if mode == "transpose":
        return block.T
    if mode == "conjugate":
        return np.conj(block)
    return np.conj(block).T


@dataclass(frozen=True)
class KOSigns:
    """KO-dimension signs: J^2 = eps_j, JD = eps_d DJ, J gamma = eps_gamma gamma J."""

    eps_j: int
    eps_d: int
    eps_gamma: int

    def __post_init__(self):
        for name in ("eps_j", "eps_d", "eps_gamma"):
            if getattr(self, name) not in (+1, -1):
                raise ValueError(f"{name} must be exactly +1 or -1")


@dataclass(frozen=True, eq=False)
class FiniteSpectralTriple:
    """
    (A, H, D; J, gamma) with declared KO signs.

    Construction validates the even-triple axioms (D self-adjoint, gamma a
    self-adjoint involution anticommuting with D and commuting with the
    represented algebra, J-matrix consistent with eps_j).  ``validate=False``
    is an escape hatch for deliberately corrupted triples in diagnostics.
    """

    algebra: AlgebraSpec
    dim_h: int
    rep_blocks: tuple
    d: np.ndarray
    j: AntilinearOp
    gamma: np.ndarray
    signs: KOSigns
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, "rep_blocks", tuple(self.rep_blocks))
        object.__setattr__(self, "d", as_matrix(self.d))
        object.__setattr__(self, "gamma", as_matrix(self.gamma))
        n = self.dim_h
        for name, m in (("d", self.d), ("gamma", self.gamma)):
            if m.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {m.shape}")
        if self.j.dim != n:
            raise ValueError("J dimension does not match dim_h")
        covered = sum(
            rb.left_mult_dim * self.algebra.summands[rb.summand] * rb.right_mult_dim
            for rb in self.rep_blocks
        )
        if covered != n:
            raise ValueError(f"representation blocks tile {covered} of {n} dimensions")
        if validate:
            self._validate()

    def _validate(self, tol: float = 1e-12):
        scale = max(1.0, frob_norm(self.d))
        if frob_norm(self.d - adjoint(self.d)) > tol * scale:
            raise ValueError("D is not self-adjoint")
        if frob_norm(self.gamma @ self.gamma - identity(self.dim_h)) > tol:
            raise ValueError("gamma^2 != 1")
        if frob_norm(self.gamma - adjoint(self.gamma)) > tol:
            raise ValueError("gamma is not self-adjoint")
        if frob_norm(self.gamma @ self.d + self.d @ self.gamma) > tol * scale:
            raise ValueError("gamma does not anticommute with D")
        for a in spanning_set(self.algebra):
            if frob_norm(commutator(self.gamma, represent(self, a))) > tol:
                raise ValueError("gamma does not commute with the represented algebra")
        jj = self.j.square()
        if frob_norm(jj - self.signs.eps_j * identity(self.dim_h)) > tol:
            raise ValueError("J^2 does not match declared eps_j")

    def hat(self, t: np.ndarray) -> np.ndarray:
        """The hat operation T -> J T J^{-1}."""
        return self.j.conjugate(t)


def represent(t: FiniteSpectralTriple, a: AlgebraElement) -> np.ndarray:
    """Assemble pi(a) on H from the representation blocks."""
    if tuple(b.shape[0] for b in a.blocks) != t.algebra.summands:
        raise ValueError("element does not match the triple's algebra")
    out = np.zeros((t.dim_h, t.dim_h), dtype=complex)
    for rb in t.rep_blocks:
        block = _apply_mode(a.blocks[rb.summand], rb.mode)
        tile = np.kron(identity(rb.left_mult_dim), np.kron(block, identity(rb.right_mult_dim)))
        size = tile.shape[0]
        sl = slice(rb.offset, rb.offset + size)
        out[sl, sl] += tile
    return out


def represent_opposite(t: FiniteSpectralTriple, a: AlgebraElement) -> np.ndarray:
    """The right action pi_op(a) = J pi(a)* J^{-1}."""
    return t.j.conjugate(adjoint(represent(t, a)))


@dataclass(frozen=True)
class CheckReport:
    """Worst-case defect of a bilinear axiom over spanning-set pairs."""

    max_defect: float
    worst_pair: tuple

    def passed(self, tol: float = 1e-9) -> bool:
        return self.max_defect <= tol


def check_zeroth_order(t: FiniteSpectralTriple, algebra: AlgebraSpec | None = None) -> CheckReport:
    """
    Max over spanning pairs (a, b) of ||[pi(a), pi_op(b)]||_F.

    ``algebra`` overrides the triple's own algebra (it only has to share the
    ambient summand structure), so the commutant condition can be probed for
    algebras larger than the one attached to the triple.
    """
    spec = algebra if algebra is not None else t.algebra
    elems = spanning_set(spec)
    worst, pair = 0.0, (0, 0)
    rights = [represent_opposite(t, b) for b in elems]
    for i, a in enumerate(elems):
        pa = represent(t, a)
        for k, rb in enumerate(rights):
            defect = frob_norm(commutator(pa, rb))
            if defect > worst:
                worst, pair = defect, (i, k)
    return CheckReport(worst, pair)


def check_first_order(t: FiniteSpectralTriple, sub: AlgebraSpec | None = None) -> CheckReport:
    """
    Max over spanning pairs (a, b) of ||[[D, pi(a)], pi_op(b)]||_F, over the
    triple's algebra or a contained subalgebra ``sub``.
    """
    spec = sub if sub is not None else t.algebra
    elems = spanning_set(spec)
    if sub is not None:
        for e in elems:
            if not t.algebra.contains(e):
                raise ValueError("sub is not contained in the triple's algebra")
    worst, pair = 0.0, (0, 0)
    rights = [represent_opposite(t, b) for b in elems]
    for i, a in enumerate(elems):
        da = commutator(t.d, represent(t, a))
        for k, rb in enumerate(rights):
            defect = frob_norm(commutator(da, rb))
            if defect > worst:
                worst, pair = defect, (i, k)
    return CheckReport(worst, pair)


@dataclass(frozen=True)
class KOReport:
    """Residuals of the three sign relations against the declared KO signs."""

    res_j_squared: float
    res_jd: float
    res_jgamma: float

    def passed(self, tol: float = 1e-12) -> bool:
        return max(self.res_j_squared, self.res_jd, self.res_jgamma) <= tol


def check_ko_signs(t: FiniteSpectralTriple) -> KOReport:
    """Verify J^2 = eps_j, JD = eps_d DJ and J gamma = eps_gamma gamma J."""
    m = t.j.m
    n = t.dim_h
    res_j = frob_norm(t.j.square() - t.signs.eps_j * identity(n))
    # JD and DJ are antilinear; comparing their linear matrix parts:
    res_jd = frob_norm(m @ np.conj(t.d) - t.signs.eps_d * (t.d @ m))
    res_jg = frob_norm(m @ np.conj(t.gamma) - t.signs.eps_gamma * (t.gamma @ m))
    return KOReport(res_j, res_jd, res_jg)


# ---------------------------------------------------------------------------
# Random elements and Lie-algebra bases (seeded; used by tests and the CLI).


def random_element(spec: AlgebraSpec, rng: np.random.Generator) -> AlgebraElement:
    """Random element: complex standard-normal coefficients over a spanning set."""
    out = spec.zero()
    for e in spanning_set(spec):
        c = rng.standard_normal() + 1j * rng.standard_normal()
        out = out + c * e
    return out


def random_hermitian(spec: AlgebraSpec, rng: np.random.Generator) -> AlgebraElement:
    a = random_element(spec, rng)
    return 0.5 * (a + a.star())


def random_unitary(spec: AlgebraSpec, rng: np.random.Generator) -> AlgebraElement:
    """
    exp(i h) for a random hermitian h in the algebra.  For multimatrix
    algebras (every spec shipped here) the exponential stays in the algebra.
    """
    h = random_hermitian(spec, rng)
    return AlgebraElement(tuple(expm(1j * b) for b in h.blocks))


def anti_hermitian_basis(spec: AlgebraSpec) -> list:
    """
    A real basis of the anti-hermitian elements (the Lie algebra of the
    unitary group of the algebra), extracted from a complex spanning set by
    rank reduction over the reals.
    """
    candidates = []
    for e in spanning_set(spec):
        candidates.append(0.5 * (e - e.star()))
        candidates.append(0.5j * (e + e.star()))
    # Select a maximal real-linearly-independent subset by Gram-Schmidt.
    basis, basis_vecs = [], []
    for cand in candidates:
        v = cand.vec()
        w = np.concatenate([v.real, v.imag])
        for u in basis_vecs:
            w = w - np.dot(u, w) * u
        if np.linalg.norm(w) > 1e-10 * max(1.0, float(np.linalg.norm(v))):
            basis_vecs.append(w / np.linalg.norm(w))
            basis.append(cand)
    return basis
