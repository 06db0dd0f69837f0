"""JSON (de)serialization of models and operators.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists throughout; no binary formats.  See ``docs/formats.md`` for the
schemas.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .diagonal import DiagonalModel
from .errors import InputError
from .fock import FockOperator, FockVector
from .seqspec import parse, to_string
from .symplectic import Generator, SymplecticMap

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "generator_to_json",
    "generator_from_json",
    "symplectic_to_json",
    "symplectic_from_json",
    "diagonal_to_json",
    "diagonal_from_json",
    "fock_operator_to_json",
    "fock_vector_to_json",
    "load_model",
    "read_json",
]


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m: np.ndarray) -> list:
    return [[_pair(z) for z in row] for row in np.atleast_2d(m)]


def matrix_from_json(rows, name: str = "matrix") -> np.ndarray:
    try:
        arr = np.array([[complex(p[0], p[1]) for p in row] for row in rows])
    except (TypeError, IndexError) as exc:
        raise InputError(f"{name} must be nested [re, im] pairs: {exc}") from exc
    return arr


def generator_to_json(gen: Generator) -> dict:
    return {"dim": gen.dim, "h": matrix_to_json(gen.h), "v": matrix_to_json(gen.v)}


def generator_from_json(obj: dict) -> Generator:
    for key in ("dim", "h", "v"):
        if key not in obj:
            raise InputError(f"generator file is missing the {key!r} field")
    h = matrix_from_json(obj["h"], "h")
    v = matrix_from_json(obj["v"], "v")
    if h.shape != (obj["dim"], obj["dim"]):
        raise InputError(f"h has shape {h.shape}, expected ({obj['dim']}, {obj['dim']})")
    return Generator(h, v)


def symplectic_to_json(S: SymplecticMap) -> dict:
    return {
        "dim": S.dim,
        "P": matrix_to_json(S.P),
        "Q": matrix_to_json(S.Q),
        "t": S.time,
    }


def symplectic_from_json(obj: dict) -> SymplecticMap:
    return SymplecticMap(
        matrix_from_json(obj["P"], "P"),
        matrix_from_json(obj["Q"], "Q"),
        time=float(obj.get("t", 0.0)),
    )


def diagonal_to_json(model: DiagonalModel) -> dict:
    return {
        "h_expr": to_string(model.h),
        "v_re_expr": to_string(model.v_re),
        "v_im_expr": to_string(model.v_im),
        "overrides": [
            {"n": n, "h": h, "v": _pair(v)} for n, (h, v) in sorted(model.overrides.items())
        ],
    }


def diagonal_from_json(obj: dict) -> DiagonalModel:
    if "h_expr" not in obj:
        raise InputError("diagonal model file is missing the 'h_expr' field")
    overrides = {}
    for entry in obj.get("overrides", []):
        overrides[int(entry["n"])] = (
            float(entry["h"]),
            complex(entry["v"][0], entry["v"][1]),
        )
    return DiagonalModel(
        parse(obj["h_expr"]),
        parse(obj.get("v_re_expr", "0")),
        parse(obj.get("v_im_expr", "0")),
        overrides,
    )


def fock_operator_to_json(op: FockOperator) -> dict:
    return {
        "modes": op.space.modes,
        "cutoff": op.space.cutoff,
        "ordering": "total-then-lex",
        "grading": sorted(op.grading),
        "matrix": matrix_to_json(op.matrix),
    }


def fock_vector_to_json(vec: FockVector) -> dict:
    return {
        "modes": vec.space.modes,
        "cutoff": vec.space.cutoff,
        "ordering": "total-then-lex",
        "max_occupied_total": vec.max_occupied_total(),
        "amplitudes": [_pair(z) for z in vec.amplitudes],
    }


def read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} at position {exc.pos}") from exc


def load_model(path):
    """Load a model file, dispatching on its keys.

    Returns a :class:`Generator` for finite generator files and a
    :class:`DiagonalModel` for diagonal model files.
    """
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top-level JSON value must be an object")
    if "h_expr" in obj:
        return diagonal_from_json(obj)
    if "dim" in obj:
        return generator_from_json(obj)
    raise InputError(f"{path}: neither a generator file ('dim') nor a diagonal model ('h_expr')")
