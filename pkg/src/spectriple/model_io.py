"""
JSON codecs for triples, perturbations and run configuration.

Complex numbers are stored as [re, im] pairs and matrices as nested lists of
those, so a dump/load cycle is bit-exact (json round-trips Python floats
through repr).  Model files carry the full triple: algebra summands, an
optional constraint basis, representation tiling, D, the J matrix, gamma and
the declared KO signs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .matrix_core import AntilinearOp, as_matrix
from .perturbation import PertElement, UniversalOneForm
from .spectral_triple import (
    AlgebraElement,
    AlgebraSpec,
    FiniteSpectralTriple,
    KOSigns,
    RepBlock,
)
from .toy_model import ToyParams
from .action import ActionParams

__all__ = [
    "RunConfig",
    "complex_from_json",
    "complex_to_json",
    "element_from_json",
    "element_to_json",
    "load_config",
    "load_json",
    "matrix_from_json",
    "matrix_to_json",
    "one_form_from_dict",
    "one_form_to_dict",
    "pert_from_dict",
    "pert_to_dict",
    "save_json",
    "triple_from_dict",
    "triple_to_dict",
]


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(float(obj), 0.0)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise ValueError(f"cannot read complex number from {obj!r}")


def matrix_to_json(m) -> list:
    m = as_matrix(m)
    return [[complex_to_json(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not isinstance(obj[0], list):
        raise ValueError("matrix payload must be a nested list")
    rows = []
    for row in obj:
        rows.append([complex_from_json(entry) for entry in row])
    return np.array(rows, dtype=complex)


def element_to_json(e: AlgebraElement) -> list:
    return [matrix_to_json(b) for b in e.blocks]


def element_from_json(obj) -> AlgebraElement:
    return AlgebraElement(tuple(matrix_from_json(b) for b in obj))


def triple_to_dict(t: FiniteSpectralTriple) -> dict:
    basis = None
    if t.algebra.basis is not None:
        basis = [element_to_json(e) for e in t.algebra.basis]
    return {
        "summands": list(t.algebra.summands),
        "basis": basis,
        "dim_h": t.dim_h,
        "rep_blocks": [
            {
                "summand": rb.summand,
                "left": rb.left_mult_dim,
                "right": rb.right_mult_dim,
                "mode": rb.mode,
                "offset": rb.offset,
            }
            for rb in t.rep_blocks
        ],
        "d": matrix_to_json(t.d),
        "j_m": matrix_to_json(t.j.m),
        "gamma": matrix_to_json(t.gamma),
        "signs": {
            "eps_j": t.signs.eps_j,
            "eps_d": t.signs.eps_d,
            "eps_gamma": t.signs.eps_gamma,
        },
    }


def triple_from_dict(payload: dict, validate: bool = True) -> FiniteSpectralTriple:
    summands = tuple(int(n) for n in payload["summands"])
    basis = payload.get("basis")
    if basis is not None:
        basis = tuple(element_from_json(e) for e in basis)
    spec = AlgebraSpec(summands, basis=basis)
    blocks = tuple(
        RepBlock(
            summand=int(rb["summand"]),
            left_mult_dim=int(rb["left"]),
            right_mult_dim=int(rb["right"]),
            mode=rb.get("mode", "plain"),
            offset=int(rb.get("offset", 0)),
        )
        for rb in payload["rep_blocks"]
    )
    signs = payload["signs"]
    return FiniteSpectralTriple(
        algebra=spec,
        dim_h=int(payload["dim_h"]),
        rep_blocks=blocks,
        d=matrix_from_json(payload["d"]),
        j=AntilinearOp(matrix_from_json(payload["j_m"])),
        gamma=matrix_from_json(payload["gamma"]),
        signs=KOSigns(int(signs["eps_j"]), int(signs["eps_d"]), int(signs["eps_gamma"])),
        validate=validate,
    )


def pert_to_dict(p: PertElement) -> dict:
    return {
        "pairs": [[element_to_json(a), element_to_json(b)] for a, b in p.pairs]
    }


def pert_from_dict(spec: AlgebraSpec, payload: dict, validate: bool = True) -> PertElement:
    pairs = tuple(
        (element_from_json(a), element_from_json(b)) for a, b in payload["pairs"]
    )
    return PertElement(spec, pairs, validate=validate)


def one_form_to_dict(w: UniversalOneForm) -> dict:
    return {
        "pairs": [[element_to_json(a), element_to_json(b)] for a, b in w.pairs]
    }


def one_form_from_dict(payload: dict) -> UniversalOneForm:
    return UniversalOneForm(
        tuple((element_from_json(a), element_from_json(b)) for a, b in payload["pairs"])
    )


def save_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Run configuration


_CONFIG_KEYS = {
    "k_x", "k_y", "f2", "f0", "lam", "seed", "tol", "n_starts", "grid_n", "point",
}


@dataclass
class RunConfig:
    """Knobs shared by the command-line tools, with sane defaults."""

    k_x: complex = 1.0 + 0.0j
    k_y: complex = 1.0 + 0.0j
    f2: float = 1.0
    f0: float = 1.0
    lam: float = 1.0
    seed: int = 0
    tol: float = 1e-9
    n_starts: int = 32
    grid_n: int = 201
    point: tuple | None = None

    def toy_params(self) -> ToyParams:
        return ToyParams(k_x=self.k_x, k_y=self.k_y)

    def action_params(self) -> ActionParams:
        return ActionParams(f2=self.f2, f0=self.f0, lam=self.lam)


def load_config(path: str | None) -> RunConfig:
    """Read a config file; missing path means defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    payload = load_json(path)
    if not isinstance(payload, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in payload.items():
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key}")
        if key in ("k_x", "k_y"):
            setattr(cfg, key, complex_from_json(value))
        elif key == "seed":
            cfg.seed = int(value)
        elif key == "n_starts":
            cfg.n_starts = int(value)
        elif key == "grid_n":
            cfg.grid_n = int(value)
        elif key == "point":
            if value is not None:
                pt = [float(x) for x in value]
                if len(pt) != 3:
                    raise ValueError("config point must have three coordinates")
                cfg.point = tuple(pt)
        else:
            setattr(cfg, key, float(value))
    return cfg
