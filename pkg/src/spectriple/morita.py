"""
Fluctuations induced by a finitely generated projective module e A^n.

Everything is phrased on the ambient space C^n (x) C^n (x) H.  The algebra
M_n(A) acts there twice: through the left leg (``pi_big``) and, conjugated by
the real structure, through the right leg (``pi_hat_big``).  A connection is
an n x n matrix of universal one-forms B with e B e = B; its represented
action on a base operator inserts one commutator per universal pair.  The
module twist of D can then be computed in two orders -- left leg first or
right leg first -- and the two agree identically, which is the analogue of
the transitivity of ordinary inner fluctuations.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .matrix_core import AntilinearOp, adjoint, commutator, frob_norm, identity, matrix_unit
from .perturbation import (
    UniversalOneForm,
    one_form_add,
    one_form_cf,
    one_form_lmul,
    one_form_rmul,
    one_form_scale,
    one_form_star,
)
from .spectral_triple import (
    AlgebraElement,
    AlgebraSpec,
    FiniteSpectralTriple,
    random_element,
    represent,
    spanning_set,
)

__all__ = [
    "MoritaData",
    "check_idempotent_identity",
    "compress_connection",
    "corner",
    "corner_projector",
    "d_big",
    "elem_mat_adjoint",
    "elem_mat_mul",
    "elem_mat_unit",
    "hermitize_connection",
    "induced_real_structure",
    "pi_big",
    "pi_hat_big",
    "random_conn_form",
    "random_idempotent",
    "rep_conn_hat",
    "rep_conn_pi",
    "twisted_dirac_left",
    "twisted_dirac_right",
    "zeroth_order_induced",
]


# ---------------------------------------------------------------------------
# Matrices over the algebra


def elem_mat_mul(x, y):
    """Product of two square matrices of algebra elements."""
    n = len(x)
    out = []
    for i in range(n):
        row = []
        for l in range(n):
            acc = x[i][0] * y[0][l]
            for k in range(1, n):
                acc = acc + x[i][k] * y[k][l]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def elem_mat_adjoint(x):
    """(x*)_{ij} = (x_{ji})*."""
    n = len(x)
    return tuple(tuple(x[j][i].star() for j in range(n)) for i in range(n))


def elem_mat_unit(spec: AlgebraSpec, n: int):
    return tuple(
        tuple(spec.unit() if i == j else spec.zero() for j in range(n)) for i in range(n)
    )


def _elem_mat_defect(x, y) -> float:
    return max(
        (a - b).norm() for row_x, row_y in zip(x, y) for a, b in zip(row_x, row_y)
    )


def _elem_mat_scale(x) -> float:
    return max(a.norm() for row in x for a in row)


# ---------------------------------------------------------------------------
# Representations on C^n (x) C^n (x) H


def pi_big(t: FiniteSpectralTriple, n: int, x) -> np.ndarray:
    """M_n(A) acting through the left C^n leg."""
    dim = n * n * t.dim_h
    out = np.zeros((dim, dim), dtype=complex)
    eye = identity(n)
    for i in range(n):
        for k in range(n):
            out += np.kron(matrix_unit(n, i, k), np.kron(eye, represent(t, x[i][k])))
    return out


def pi_hat_big(t: FiniteSpectralTriple, n: int, x) -> np.ndarray:
    """M_n(A) acting through the right C^n leg, with hatted fibre operators."""
    dim = n * n * t.dim_h
    out = np.zeros((dim, dim), dtype=complex)
    eye = identity(n)
    for j in range(n):
        for k in range(n):
            out += np.kron(eye, np.kron(matrix_unit(n, j, k), t.hat(represent(t, x[j][k]))))
    return out


def d_big(t: FiniteSpectralTriple, n: int) -> np.ndarray:
    return np.kron(identity(n * n), t.d)


def rep_conn_pi(t: FiniteSpectralTriple, n: int, conn, base: np.ndarray) -> np.ndarray:
    """
    Left-leg action of a connection on ``base``: for every entry (i,k) and
    universal pair (x, y), add  (E_ik (x) 1 (x) pi(x)) [base, 1 (x) 1 (x) pi(y)].
    """
    out = np.zeros_like(base)
    eye = identity(n)
    eye_nn = identity(n * n)
    for i in range(n):
        for k in range(n):
            for x, y in conn[i][k].pairs:
                lx = np.kron(matrix_unit(n, i, k), np.kron(eye, represent(t, x)))
                ry = np.kron(eye_nn, represent(t, y))
                out += lx @ commutator(base, ry)
    return out


def rep_conn_hat(t: FiniteSpectralTriple, n: int, conn, base: np.ndarray) -> np.ndarray:
    """Right-leg action of a connection: same shape with hatted operators."""
    out = np.zeros_like(base)
    eye = identity(n)
    eye_nn = identity(n * n)
    for j in range(n):
        for k in range(n):
            for x, y in conn[j][k].pairs:
                lx = np.kron(eye, np.kron(matrix_unit(n, j, k), t.hat(represent(t, x))))
                ry = np.kron(eye_nn, t.hat(represent(t, y)))
                out += lx @ commutator(base, ry)
    return out


# ---------------------------------------------------------------------------
# Connections


def hermitize_connection(conn):
    """(B + B*)/2 with (B*)_{jk} = (B_{kj})*."""
    n = len(conn)
    return tuple(
        tuple(
            one_form_add(
                one_form_scale(0.5, conn[j][k]),
                one_form_scale(0.5, one_form_star(conn[k][j])),
            )
            for k in range(n)
        )
        for j in range(n)
    )


def compress_connection(e, conn):
    """(e B e)_{il} = sum_{jk} e_ij . B_jk . e_kl, at the universal level."""
    n = len(conn)
    out = []
    for i in range(n):
        row = []
        for l in range(n):
            acc = None
            for j in range(n):
                for k in range(n):
                    term = one_form_lmul(e[i][j], one_form_rmul(conn[j][k], e[k][l]))
                    acc = term if acc is None else one_form_add(acc, term)
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def random_conn_form(
    t: FiniteSpectralTriple,
    n: int,
    rng: np.random.Generator,
    e,
    n_pairs: int = 1,
    hermitian: bool = True,
):
    """A random connection compressed to the module of ``e``."""
    spec = t.algebra
    raw = tuple(
        tuple(
            UniversalOneForm(
                tuple(
                    (random_element(spec, rng), random_element(spec, rng))
                    for _ in range(n_pairs)
                )
            )
            for _ in range(n)
        )
        for _ in range(n)
    )
    if hermitian:
        raw = hermitize_connection(raw)
    return compress_connection(e, raw)


# ---------------------------------------------------------------------------
# The data bundle and the two twists


@dataclass(frozen=True, eq=False)
class MoritaData:
    """
    An idempotent e in M_n(A) together with an optional compressed connection.

    Validation checks e^2 = e, membership of all entries in the algebra, and
    (when a connection is present) the compression identity e B e = B via the
    faithful universal realization of each entry.
    """

    triple: FiniteSpectralTriple
    size: int
    idem: tuple
    conn: tuple | None = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        n = self.size
        idem = tuple(tuple(row) for row in self.idem)
        if len(idem) != n or any(len(row) != n for row in idem):
            raise ValueError(f"idempotent must be an {n}x{n} matrix of elements")
        object.__setattr__(self, "idem", idem)
        if self.conn is not None:
            conn = tuple(tuple(row) for row in self.conn)
            if len(conn) != n or any(len(row) != n for row in conn):
                raise ValueError(f"connection must be an {n}x{n} matrix of one-forms")
            object.__setattr__(self, "conn", conn)
        if validate:
            self._validate()

    def _validate(self, tol: float = 1e-8):
        spec = self.triple.algebra
        for row in self.idem:
            for entry in row:
                if not spec.contains(entry):
                    raise ValueError("idempotent entry is not in the algebra")
        sq = elem_mat_mul(self.idem, self.idem)
        scale = max(1.0, _elem_mat_scale(self.idem) ** 2)
        if _elem_mat_defect(sq, self.idem) > tol * scale:
            raise ValueError("matrix is not idempotent")
        if self.conn is not None:
            pressed = compress_connection(self.idem, self.conn)
            for row_p, row_c in zip(pressed, self.conn):
                for wp, wc in zip(row_p, row_c):
                    cp = one_form_cf(spec, wp)
                    cc = one_form_cf(spec, wc)
                    if frob_norm(cp - cc) > tol * max(1.0, frob_norm(cc)):
                        raise ValueError("connection is not compressed: e B e != B")


def _one_sided(t, n, e, conn, base, hatted: bool):
    if hatted:
        proj = pi_hat_big(t, n, e)
        twist = rep_conn_hat(t, n, conn, base) if conn is not None else 0.0
    else:
        proj = pi_big(t, n, e)
        twist = rep_conn_pi(t, n, conn, base) if conn is not None else 0.0
    return proj @ base + twist


def twisted_dirac_left(md: MoritaData) -> np.ndarray:
    """Twist through the left leg first, then through the hatted right leg."""
    t, n = md.triple, md.size
    o1 = _one_sided(t, n, md.idem, md.conn, d_big(t, n), hatted=False)
    return _one_sided(t, n, md.idem, md.conn, o1, hatted=True)


def twisted_dirac_right(md: MoritaData) -> np.ndarray:
    """Twist through the hatted right leg first, then through the left leg."""
    t, n = md.triple, md.size
    o2 = _one_sided(t, n, md.idem, md.conn, d_big(t, n), hatted=True)
    return _one_sided(t, n, md.idem, md.conn, o2, hatted=False)


def corner_projector(md: MoritaData) -> np.ndarray:
    """pi(e) pihat(e): cuts out the module copy inside C^n (x) C^n (x) H."""
    t, n = md.triple, md.size
    return pi_big(t, n, md.idem) @ pi_hat_big(t, n, md.idem)


def corner(md: MoritaData, op: np.ndarray | None = None) -> np.ndarray:
    """P op P for the corner projector P (op defaults to the left twist)."""
    p = corner_projector(md)
    if op is None:
        op = twisted_dirac_left(md)
    return p @ op @ p


def check_idempotent_identity(t: FiniteSpectralTriple, n: int, e) -> float:
    """
    Max norm over (i, l) of  sum_{jk} pi(e_ij) [D, pi(e_jk)] pi(e_kl),
    which vanishes identically for idempotent e (it is e de e in disguise).
    """
    reps = [[represent(t, e[j][k]) for k in range(n)] for j in range(n)]
    comms = [[commutator(t.d, reps[j][k]) for k in range(n)] for j in range(n)]
    worst = 0.0
    for i in range(n):
        for l in range(n):
            acc = np.zeros((t.dim_h, t.dim_h), dtype=complex)
            for j in range(n):
                for k in range(n):
                    acc += reps[i][j] @ comms[j][k] @ reps[k][l]
            worst = max(worst, frob_norm(acc))
    return worst


def induced_real_structure(t: FiniteSpectralTriple, n: int) -> AntilinearOp:
    """Real structure on C^n (x) C^n (x) H: swap the two C^n legs, J in the fibre."""
    swap = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            swap += np.kron(matrix_unit(n, i, j), matrix_unit(n, j, i))
    return AntilinearOp(np.kron(swap, t.j.m))


def zeroth_order_induced(t: FiniteSpectralTriple, n: int) -> float:
    """
    Max commutator norm between the left action of M_n(A) and the conjugate
    of its adjoint under the induced real structure.
    """
    jp = induced_real_structure(t, n)
    eye = identity(n)
    lefts = []
    for i in range(n):
        for j in range(n):
            for s in spanning_set(t.algebra):
                lefts.append(
                    np.kron(matrix_unit(n, i, j), np.kron(eye, represent(t, s)))
                )
    rights = [jp.conjugate(adjoint(op)) for op in lefts]
    worst = 0.0
    for left in lefts:
        for right in rights:
            worst = max(worst, frob_norm(commutator(left, right)))
    return worst


# ---------------------------------------------------------------------------
# Random module data


def _assemble_summand(mat, s: int, block_size: int) -> np.ndarray:
    n = len(mat)
    big = np.zeros((n * block_size, n * block_size), dtype=complex)
    for j in range(n):
        for k in range(n):
            big[
                j * block_size : (j + 1) * block_size,
                k * block_size : (k + 1) * block_size,
            ] = mat[j][k].blocks[s]
    return big


def _carve(spec: AlgebraSpec, bigs, n: int):
    out = []
    for j in range(n):
        row = []
        for k in range(n):
            blocks = []
            for s, ns in enumerate(spec.summands):
                blocks.append(bigs[s][j * ns : (j + 1) * ns, k * ns : (k + 1) * ns])
            row.append(AlgebraElement(tuple(blocks)))
        out.append(tuple(row))
    return tuple(out)


def _random_elem_mat(spec: AlgebraSpec, n: int, rng: np.random.Generator):
    return tuple(
        tuple(random_element(spec, rng) for _ in range(n)) for _ in range(n)
    )


def random_idempotent(
    t: FiniteSpectralTriple,
    n: int,
    rng: np.random.Generator,
    self_adjoint: bool = True,
    max_tries: int = 50,
):
    """
    A random idempotent in M_n(A): the positive spectral projection of a
    random hermitian matrix over the algebra (resampled when an eigenvalue
    sits too close to zero), optionally skewed by conjugation with an
    invertible element so that it is no longer self-adjoint.
    """
    spec = t.algebra
    for _ in range(max_tries):
        h = _random_elem_mat(spec, n, rng)
        h_adj = elem_mat_adjoint(h)
        h = tuple(
            tuple(0.5 * (h[j][k] + h_adj[j][k]) for k in range(n)) for j in range(n)
        )
        bigs = []
        ok = True
        for s, ns in enumerate(spec.summands):
            big = _assemble_summand(h, s, ns)
            vals, vecs = np.linalg.eigh(big)
            if np.min(np.abs(vals)) < 1e-6:
                ok = False
                break
            pos = vecs[:, vals > 0]
            bigs.append(pos @ pos.conj().T)
        if not ok:
            continue
        e = _carve(spec, bigs, n)
        if not all(spec.contains(entry, tol=1e-8) for row in e for entry in row):
            continue
        if self_adjoint:
            return e
        g = _random_elem_mat(spec, n, rng)
        unit = elem_mat_unit(spec, n)
        g = tuple(
            tuple(unit[j][k] + 0.3 * g[j][k] for k in range(n)) for j in range(n)
        )
        g_bigs, gi_bigs = [], []
        invertible = True
        for s, ns in enumerate(spec.summands):
            big = _assemble_summand(g, s, ns)
            if np.linalg.cond(big) > 1e6:
                invertible = False
                break
            g_bigs.append(big)
            gi_bigs.append(np.linalg.inv(big))
        if not invertible:
            continue
        e_bigs = [gb @ _assemble_summand(e, s, ns) @ gib
                  for s, (ns, gb, gib) in enumerate(zip(spec.summands, g_bigs, gi_bigs))]
        skewed = _carve(spec, e_bigs, n)
        if all(spec.contains(entry, tol=1e-8) for row in skewed for entry in row):
            return skewed
    raise RuntimeError("could not draw a clean random idempotent")
