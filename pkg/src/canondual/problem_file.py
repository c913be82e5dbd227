"""JSON problem files and run reports.

Problem file layout::

    {"n": 1, "A": [[1.0]], "c": [1.0],
     "f_term": null,
     "inequalities": [],
     "equalities": [{"V": {"kind": "shifted_quadratic", "a": 1, "d": 6, "e": -15},
                     "Lambda": {"Q": [[1.0]], "b": [0.0], "alpha": 0.0}}]}

Unknown keys are rejected, as is any asymmetry in ``A`` or ``Q``.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .model import CATALOG, CanonicalTerm, Exponential, Problem, QuadraticOperator, ShiftedQuadratic

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}

_V_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "shifted_quadratic"}, "a": _NUM, "d": _NUM, "e": _NUM},
            "required": ["kind", "a", "d", "e"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"kind": {"const": "exponential"}},
            "required": ["kind"],
            "additionalProperties": False,
        },
    ]
}

_TERM_SCHEMA = {
    "type": "object",
    "properties": {
        "V": _V_SCHEMA,
        "Lambda": {
            "type": "object",
            "properties": {"Q": _MAT, "b": _VEC, "alpha": _NUM},
            "required": ["Q", "b", "alpha"],
            "additionalProperties": False,
        },
    },
    "required": ["V", "Lambda"],
    "additionalProperties": False,
}

PROBLEM_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "A": _MAT,
        "c": _VEC,
        "f_term": {"oneOf": [{"type": "null"}, _TERM_SCHEMA]},
        "inequalities": {"type": "array", "items": _TERM_SCHEMA},
        "equalities": {"type": "array", "items": _TERM_SCHEMA},
    },
    "required": ["n", "A", "c"],
    "additionalProperties": False,
}


class ProblemFileError(ValueError):
    """Schema or consistency violation in a problem file."""


def _square(rows, n, what):
    M = np.asarray(rows, dtype=float)
    if M.shape != (n, n):
        raise ProblemFileError(f"{what} must be {n}x{n}, got shape {M.shape}")
    asym = float(np.max(np.abs(M - M.T)))
    if asym > 0:
        raise ProblemFileError(f"{what} is not symmetric (max asymmetry {asym:g})")
    return M


def _term(doc, n, where) -> CanonicalTerm:
    vdoc = doc["V"]
    if vdoc["kind"] == "shifted_quadratic":
        if not vdoc["a"] > 0:
            raise ProblemFileError(f"{where}: shifted_quadratic needs a > 0")
        v = ShiftedQuadratic(vdoc["a"], vdoc["d"], vdoc["e"])
    else:
        v = Exponential()
    lam = doc["Lambda"]
    Q = _square(lam["Q"], n, f"{where}.Lambda.Q")
    if len(lam["b"]) != n:
        raise ProblemFileError(f"{where}.Lambda.b must have length {n}")
    return CanonicalTerm(v, QuadraticOperator(Q, lam["b"], lam["alpha"]))


def problem_from_dict(doc: dict) -> Problem:
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(k) for k in exc.absolute_path) or "<root>"
        raise ProblemFileError(f"schema violation at {path}: {exc.message}") from None
    n = doc["n"]
    A = _square(doc["A"], n, "A")
    if len(doc["c"]) != n:
        raise ProblemFileError(f"c must have length {n}")
    f_doc = doc.get("f_term")
    f_term = None if f_doc is None else _term(f_doc, n, "f_term")
    g = [_term(t, n, f"inequalities[{i}]") for i, t in enumerate(doc.get("inequalities", []))]
    h = [_term(t, n, f"equalities[{j}]") for j, t in enumerate(doc.get("equalities", []))]
    return Problem(A, doc["c"], f_term, g, h)


def _term_to_dict(t: CanonicalTerm) -> dict:
    if t.v.kind not in CATALOG:
        raise ValueError(f"canonical function {t.v!r} has no file representation")
    op = t.lambda_op
    return {
        "V": {"kind": t.v.kind, **t.v.params()},
        "Lambda": {"Q": op.Q.tolist(), "b": op.b.tolist(), "alpha": op.alpha},
    }


def problem_to_dict(p: Problem) -> dict:
    return {
        "n": p.n,
        "A": p.A.tolist(),
        "c": p.c.tolist(),
        "f_term": None if p.f_term is None else _term_to_dict(p.f_term),
        "inequalities": [_term_to_dict(t) for t in p.g_terms],
        "equalities": [_term_to_dict(t) for t in p.h_terms],
    }


def load_problem(path) -> Problem:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON ({exc})") from None
    return problem_from_dict(doc)


def dump_problem(p: Problem, path=None) -> str:
    text = json.dumps(problem_to_dict(p), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
