import numpy as np
import pytest

from spectriple import AlgebraElement, build_toy, closed_dirac, extract_fields, fluctuate
from spectriple.matrix_core import adjoint, approx_eq
from spectriple.perturbation import UniversalOneForm, random_one_form
from spectriple.spectral_triple import random_element
from spectriple.toy_model import (
    FieldPoint,
    ToyParams,
    a_ev,
    assemble_dirac,
    full_algebra,
    y_block,
)


def test_dirac_entries():
    kx, ky = 0.7 + 0.2j, -1.1 + 0.4j
    t = build_toy(ToyParams(kx, ky))
    d = t.d
    for i, j in ((0, 2), (1, 3), (6, 4), (7, 5)):
        assert d[i, j] == kx
        assert d[j, i] == np.conj(kx)
    assert d[4, 0] == ky
    assert d[0, 4] == np.conj(ky)
    # nothing else is populated
    mask = np.zeros((8, 8), dtype=bool)
    for i, j in ((0, 2), (1, 3), (6, 4), (7, 5), (4, 0)):
        mask[i, j] = mask[j, i] = True
    assert np.all(d[~mask] == 0)


def test_grading_and_real_structure_matrices():
    t = build_toy()
    assert np.array_equal(np.diag(t.gamma), np.array([1, 1, -1, -1, -1, -1, 1, 1]))
    want = np.zeros((8, 8))
    want[0:4, 4:8] = np.eye(4)
    want[4:8, 0:4] = np.eye(4)
    assert np.array_equal(t.j.m, want)
    assert (t.signs.eps_j, t.signs.eps_d, t.signs.eps_gamma) == (1, 1, -1)


def test_toy_params_coerce_to_complex():
    tp = ToyParams(2, 0)
    assert isinstance(tp.k_x, complex) and tp.k_x == 2.0
    assert tp.k_y == 0.0


def test_assemble_dirac_is_self_adjoint():
    d = assemble_dirac(0.3 - 2j, [[1j, 2], [0, 1]])
    assert np.array_equal(d, adjoint(d))
    with pytest.raises(ValueError, match="2x2"):
        assemble_dirac(1.0, np.eye(3))


def test_y_block_reads_the_cross_coupling():
    y = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(y_block(assemble_dirac(0.0, y)), y)


def test_unfluctuated_point_reproduces_d_exactly():
    tp = ToyParams(0.6 + 0.1j, 1.3)
    t = build_toy(tp)
    assert np.array_equal(closed_dirac(tp, FieldPoint.unfluctuated()), t.d)


def test_closed_dirac_bilinear_y_block():
    tp = ToyParams(1.0, 2.0)
    fp = FieldPoint(0.5, 1 + 1j, 3j)
    # the vector enters bilinearly (v v^T, no conjugation)
    assert np.array_equal(
        y_block(closed_dirac(tp, fp)), 2.0 * np.outer(fp.v, fp.v)
    )
    assert closed_dirac(tp, fp)[0, 2] == 0.5


def test_extract_fields_hand_computed_pair():
    spec = a_ev()
    a = spec.element(np.diag([2.0, 3.0]), [[1, 2], [3, 4]])
    b = spec.element(np.diag([5.0, 7.0]), [[0, 1], [1, 0]])
    fp = extract_fields(UniversalOneForm(((a, b),)))
    # phi = r'(l - r) = 2 (7 - 5) = 4
    assert fp.x == 1.0 + 4.0
    # m' m = [[2, 1], [4, 3]]; sigma_1 = 1*5 - 2, sigma_2 = 3*5 - 4
    assert fp.v1 == 1.0 + 3.0
    assert fp.v2 == 11.0


def test_extract_fields_is_additive_in_the_form(rng):
    w1 = random_one_form(a_ev(), rng)
    w2 = random_one_form(a_ev(), rng)
    f1, f2, f12 = extract_fields(w1), extract_fields(w2), extract_fields(w1 + w2)
    assert f12.x - 1 == pytest.approx(complex(f1.x - 1) + complex(f2.x - 1))
    assert f12.v1 - 1 == pytest.approx(complex(f1.v1 - 1) + complex(f2.v1 - 1))
    assert f12.v2 == pytest.approx(complex(f1.v2) + complex(f2.v2))


def test_extract_fields_rejects_elements_outside_the_even_subalgebra(rng):
    w = UniversalOneForm(((random_element(full_algebra(), rng),) * 2,))
    with pytest.raises(ValueError, match="even subalgebra"):
        extract_fields(w)


def test_fluctuation_closes_on_the_two_fields(rng):
    tp = ToyParams(1.2 - 0.3j, 0.8 + 0.5j)
    t = build_toy(tp)
    for _ in range(10):
        w = random_one_form(a_ev(), rng)
        d_new = fluctuate(t, w)
        d_closed = closed_dirac(tp, extract_fields(w))
        assert approx_eq(d_new, d_closed, 1e-12)


def test_fluctuation_closes_without_the_cross_coupling(rng):
    tp = ToyParams(1.0, 0.0)
    t = build_toy(tp)
    w = random_one_form(a_ev(), rng)
    assert approx_eq(fluctuate(t, w), closed_dirac(tp, extract_fields(w)), 1e-12)


def test_fluctuated_y_block_has_rank_one(toy, rng):
    for _ in range(10):
        w = random_one_form(a_ev(), rng)
        svals = np.linalg.svd(y_block(fluctuate(toy, w)), compute_uv=False)
        assert svals[1] <= 1e-12 * svals[0]


def test_field_point_vector_view():
    fp = FieldPoint(0, 1j, 2)
    assert np.array_equal(fp.v, np.array([1j, 2.0 + 0j]))


def test_even_subalgebra_excludes_offdiagonal_first_summand():
    z = np.zeros((2, 2), dtype=complex)
    off = AlgebraElement((np.array([[0, 1], [0, 0]], dtype=complex), z))
    assert not a_ev().contains(off)
