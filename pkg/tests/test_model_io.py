import numpy as np
import pytest

from spectriple import build_toy, canonical_form, random_pert
from spectriple.model_io import (
    RunConfig,
    complex_from_json,
    complex_to_json,
    element_from_json,
    element_to_json,
    load_config,
    load_json,
    matrix_from_json,
    matrix_to_json,
    one_form_from_dict,
    one_form_to_dict,
    pert_from_dict,
    pert_to_dict,
    save_json,
    triple_from_dict,
    triple_to_dict,
)
from spectriple.perturbation import one_form_cf, random_one_form
from spectriple.spectral_triple import random_element
from spectriple.toy_model import ToyParams, a_ev


def test_complex_codec():
    assert complex_to_json(1.5 - 2j) == [1.5, -2.0]
    assert complex_from_json([1.5, -2.0]) == 1.5 - 2j
    assert complex_from_json(3) == 3.0 + 0j
    assert complex_from_json(0.25) == 0.25 + 0j
    with pytest.raises(ValueError):
        complex_from_json("nope")
    with pytest.raises(ValueError):
        complex_from_json([1.0])


def test_matrix_codec_is_bit_exact(rng):
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m[0, 0] = 1.0 / 3.0 + 0.1j  # non-dyadic values survive repr round-trips
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    with pytest.raises(ValueError):
        matrix_from_json("garbage")
    with pytest.raises(ValueError):
        matrix_from_json([])


def test_element_codec(rng):
    e = random_element(a_ev(), rng)
    back = element_from_json(element_to_json(e))
    assert np.array_equal(e.vec(), back.vec())


def test_triple_round_trip_through_a_file(tmp_path):
    t = build_toy(ToyParams(k_x=0.1 + 0.3j, k_y=1.0 / 3.0))
    path = tmp_path / "model.json"
    save_json(str(path), triple_to_dict(t))
    t2 = triple_from_dict(load_json(str(path)))
    assert np.array_equal(t.d, t2.d)
    assert np.array_equal(t.gamma, t2.gamma)
    assert np.array_equal(t.j.m, t2.j.m)
    assert t.rep_blocks == t2.rep_blocks
    assert t.signs == t2.signs
    assert t2.algebra.summands == (2, 2)
    assert len(t2.algebra.basis) == 6
    # a second dump of the reloaded triple is byte-identical
    path2 = tmp_path / "model2.json"
    save_json(str(path2), triple_to_dict(t2))
    assert path.read_bytes() == path2.read_bytes()


def test_triple_from_dict_revalidates(tmp_path):
    payload = triple_to_dict(build_toy())
    payload["d"][0][0] = [5.0, 0.0]  # diagonal entry breaks gamma-D anticommutation
    with pytest.raises(ValueError):
        triple_from_dict(payload)
    t = triple_from_dict(payload, validate=False)
    assert t.d[0, 0] == 5.0


def test_pert_round_trip(rng):
    spec = a_ev()
    p = random_pert(spec, rng)
    back = pert_from_dict(spec, pert_to_dict(p))
    assert np.array_equal(canonical_form(back), canonical_form(p))


def test_pert_from_dict_validates(rng):
    spec = a_ev()
    bad = {"pairs": [[element_to_json(spec.unit()), element_to_json(2.0 * spec.unit())]]}
    with pytest.raises(ValueError, match="normalized"):
        pert_from_dict(spec, bad)
    p = pert_from_dict(spec, bad, validate=False)
    assert len(p.pairs) == 1


def test_one_form_round_trip(rng):
    spec = a_ev()
    w = random_one_form(spec, rng)
    back = one_form_from_dict(one_form_to_dict(w))
    assert np.array_equal(one_form_cf(spec, back), one_form_cf(spec, w))


def test_save_json_appends_newline(tmp_path):
    path = tmp_path / "x.json"
    save_json(str(path), {"a": 1})
    text = path.read_text()
    assert text.endswith("\n")
    assert load_json(str(path)) == {"a": 1}


# ---------------------------------------------------------------------------
# Run configuration


def test_config_defaults():
    cfg = load_config(None)
    assert cfg == RunConfig()
    assert cfg.toy_params() == ToyParams(1.0, 1.0)
    ap = cfg.action_params()
    assert (ap.f2, ap.f0, ap.lam) == (1.0, 1.0, 1.0)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "cfg.json"
    save_json(
        str(path),
        {
            "k_x": [0.5, -0.25],
            "k_y": 2,
            "f2": 0.75,
            "seed": 9,
            "n_starts": 4,
            "grid_n": 11,
            "point": [0.0, 0.2, 0.0],
        },
    )
    cfg = load_config(str(path))
    assert cfg.k_x == 0.5 - 0.25j
    assert cfg.k_y == 2.0 + 0j
    assert cfg.f2 == 0.75
    assert cfg.f0 == 1.0  # untouched default
    assert cfg.seed == 9
    assert cfg.n_starts == 4
    assert cfg.grid_n == 11
    assert cfg.point == (0.0, 0.2, 0.0)


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    save_json(str(path), {"k_q": 1.0})
    with pytest.raises(ValueError, match="unknown config key"):
        load_config(str(path))


def test_config_rejects_bad_point(tmp_path):
    path = tmp_path / "cfg.json"
    save_json(str(path), {"point": [1.0, 2.0]})
    with pytest.raises(ValueError, match="three"):
        load_config(str(path))


def test_config_missing_file():
    with pytest.raises(FileNotFoundError):
        load_config("/nonexistent/config.json")


def test_config_must_be_an_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2, 3]\n")
    with pytest.raises(ValueError, match="object"):
        load_config(str(path))
