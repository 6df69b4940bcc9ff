"""
Module twists: e in M_n(A) with an optional compressed connection twists the
ampliated Dirac operator from both sides; the two orderings must coincide.
"""

import numpy as np
import pytest

from spectriple import MoritaData, twisted_dirac_left, twisted_dirac_right
from spectriple.matrix_core import adjoint, approx_eq, frob_norm, identity, kron, matrix_unit
from spectriple.morita import (
    check_idempotent_identity,
    compress_connection,
    corner,
    corner_projector,
    d_big,
    elem_mat_adjoint,
    elem_mat_mul,
    elem_mat_unit,
    hermitize_connection,
    induced_real_structure,
    pi_big,
    pi_hat_big,
    random_conn_form,
    random_idempotent,
    rep_conn_pi,
    zeroth_order_induced,
)
from spectriple.perturbation import UniversalOneForm
from spectriple.spectral_triple import random_element


def _rel(a, b):
    return frob_norm(a - b) / max(1.0, frob_norm(b))


def test_rank_one_unit_module_gives_back_d(toy):
    md = MoritaData(toy, 1, ((toy.algebra.unit(),),))
    assert np.array_equal(twisted_dirac_left(md), toy.d)
    assert np.array_equal(twisted_dirac_right(md), toy.d)


def test_diagonal_projection_cuts_the_corner(toy):
    # e = diag(1, 0) embeds D into the (0,0) cell of the doubled index grid
    unit, zero = toy.algebra.unit(), toy.algebra.zero()
    e = ((unit, zero), (zero, zero))
    md = MoritaData(toy, 2, e)
    want = np.zeros((32, 32), dtype=complex)
    want[0:8, 0:8] = toy.d
    assert np.array_equal(twisted_dirac_left(md), want)
    assert np.array_equal(twisted_dirac_right(md), want)


def test_unit_module_with_diagonal_connection_reduces_entrywise(toy, rng):
    # e = 1_n with conn = diag(w): the twist acts like the rank-one case in
    # every diagonal cell
    n = 2
    w = UniversalOneForm(((random_element(toy.algebra, rng),) * 2,))
    zero_form = UniversalOneForm(tuple())
    conn = tuple(
        tuple(w if i == k else zero_form for k in range(n)) for i in range(n)
    )
    conn = hermitize_connection(conn)
    md = MoritaData(toy, n, elem_mat_unit(toy.algebra, n), conn)
    big = twisted_dirac_left(md)
    small = MoritaData(toy, 1, ((toy.algebra.unit(),),), ((conn[0][0],),))
    cell = twisted_dirac_left(small)
    for i in range(n):
        sl = slice(i * (n * 8) + i * 8, i * (n * 8) + (i + 1) * 8)
        assert approx_eq(big[sl, sl], cell, 1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("self_adjoint", [True, False])
def test_twist_orderings_agree(toy, n, self_adjoint):
    rng = np.random.default_rng(100 * n + self_adjoint)
    e = random_idempotent(toy, n, rng, self_adjoint=self_adjoint)
    for conn in (None, random_conn_form(toy, n, rng, e)):
        md = MoritaData(toy, n, e, conn)
        left, right = twisted_dirac_left(md), twisted_dirac_right(md)
        assert _rel(left, right) < 1e-12


def test_idempotent_identity_vanishes(toy):
    for n in (1, 2, 3):
        rng = np.random.default_rng(n)
        e = random_idempotent(toy, n, rng, self_adjoint=(n % 2 == 0))
        assert check_idempotent_identity(toy, n, e) < 1e-12
    assert check_idempotent_identity(toy, 2, elem_mat_unit(toy.algebra, 2)) == 0.0


def test_random_idempotents_are_what_they_claim(toy, rng):
    e = random_idempotent(toy, 2, rng, self_adjoint=True)
    sq = elem_mat_mul(e, e)
    star = elem_mat_adjoint(e)
    for j in range(2):
        for k in range(2):
            assert (sq[j][k] - e[j][k]).norm() < 1e-10
            assert (star[j][k] - e[j][k]).norm() < 1e-10
            assert toy.algebra.contains(e[j][k], tol=1e-8)
    skew = random_idempotent(toy, 2, rng, self_adjoint=False)
    gap = max(
        (elem_mat_adjoint(skew)[j][k] - skew[j][k]).norm()
        for j in range(2)
        for k in range(2)
    )
    assert gap > 1e-3  # genuinely not self-adjoint
    assert max(
        (elem_mat_mul(skew, skew)[j][k] - skew[j][k]).norm()
        for j in range(2)
        for k in range(2)
    ) < 1e-8


def test_corner_projector_is_idempotent_and_corner_self_adjoint(toy):
    rng = np.random.default_rng(8)
    e = random_idempotent(toy, 2, rng, self_adjoint=True)
    conn = random_conn_form(toy, 2, rng, e)
    md = MoritaData(toy, 2, e, conn)
    p = corner_projector(md)
    assert approx_eq(p @ p, p, 1e-10)
    c = corner(md)
    assert approx_eq(c, adjoint(c), 1e-10)
    # the corner is the restriction of the full twist
    assert approx_eq(p @ twisted_dirac_left(md) @ p, c, 1e-12)


def test_hermitized_connection_represents_self_adjointly(toy, rng):
    n = 2
    raw = tuple(
        tuple(
            UniversalOneForm(((random_element(toy.algebra, rng),) * 2,))
            for _ in range(n)
        )
        for _ in range(n)
    )
    herm = hermitize_connection(raw)
    op = rep_conn_pi(toy, n, herm, d_big(toy, n))
    assert approx_eq(op, adjoint(op), 1e-12)


def test_compress_connection_is_a_projection(toy, rng):
    e = random_idempotent(toy, 2, rng)
    raw = tuple(
        tuple(
            UniversalOneForm(((random_element(toy.algebra, rng),) * 2,))
            for _ in range(2)
        )
        for _ in range(2)
    )
    once = compress_connection(e, raw)
    twice = compress_connection(e, once)
    MoritaData(toy, 2, e, once)  # construction revalidates e B e = B
    base = d_big(toy, 2)
    assert approx_eq(
        rep_conn_pi(toy, 2, twice, base), rep_conn_pi(toy, 2, once, base), 1e-10
    )


def test_validation_rejects_non_idempotent(toy):
    unit = toy.algebra.unit()
    half = 0.5 * unit
    with pytest.raises(ValueError, match="idempotent"):
        MoritaData(toy, 1, ((half,),))


def test_validation_rejects_uncompressed_connection(toy, rng):
    e = random_idempotent(toy, 2, rng)
    raw = tuple(
        tuple(
            UniversalOneForm(((random_element(toy.algebra, rng),) * 2,))
            for _ in range(2)
        )
        for _ in range(2)
    )
    with pytest.raises(ValueError, match="compressed"):
        MoritaData(toy, 2, e, raw)


def test_induced_real_structure_swaps_legs_and_squares_to_plus_one(toy):
    assert np.array_equal(induced_real_structure(toy, 1).m, toy.j.m)
    for n in (2, 3):
        jp = induced_real_structure(toy, n)
        assert approx_eq(jp.square(), identity(n * n * 8), 1e-12)
        # swap (x) J: check one off-diagonal cell explicitly
        want = kron(
            sum(
                kron(matrix_unit(n, i, j), matrix_unit(n, j, i))
                for i in range(n)
                for j in range(n)
            ),
            toy.j.m,
        )
        assert np.array_equal(jp.m, want)


def test_induced_real_structure_commutes_with_the_twist(toy):
    # KO sign eps_d = +1 carries over to the module operator
    rng = np.random.default_rng(21)
    e = random_idempotent(toy, 2, rng, self_adjoint=True)
    md = MoritaData(toy, 2, e)
    o = twisted_dirac_left(md)
    assert frob_norm(o) > 0.1  # nondegenerate draw
    jp = induced_real_structure(toy, 2)
    assert approx_eq(jp.conjugate(o), o, 1e-12)


def test_induced_zeroth_order(toy):
    assert zeroth_order_induced(toy, 2) < 1e-12


def test_left_and_hatted_actions_commute_on_the_module(toy, rng):
    n = 2
    x = tuple(
        tuple(random_element(toy.algebra, rng) for _ in range(n)) for _ in range(n)
    )
    y = tuple(
        tuple(random_element(toy.algebra, rng) for _ in range(n)) for _ in range(n)
    )
    a, b = pi_big(toy, n, x), pi_hat_big(toy, n, y)
    assert frob_norm(a @ b - b @ a) < 1e-12
