"""JSON algebra documents: parsing with diagnostics, canonical emission and hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _linalg as la
from .algebra import LieAlgebra, check_jacobi
from .metric import Metric

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """Malformed document; ``where`` names the offending field (or line for syntax errors)."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


class JacobiError(ValueError):
    def __init__(self, triple, residual):
        i, j, k = (t + 1 for t in triple)
        super().__init__(f"Jacobi identity fails for basis triple ({i}, {j}, {k}), residual {residual:.3e}")
        self.triple = triple
        self.residual = residual


# ---------------------------------------------------------------------------
# literals


def parse_literal(v, where: str):
    """Exact Fraction for ints and "p/q" strings, float for JSON reals."""
    if isinstance(v, bool):
        raise SchemaError(where, "boolean is not a number")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not np.isfinite(v):
            raise SchemaError(where, "non-finite number")
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise SchemaError(where, f"not a rational literal: {v!r}") from None
    raise SchemaError(where, f"expected a number or rational string, got {type(v).__name__}")


def literal(v):
    """JSON form of a scalar: "p/q" (or "p") for exact values, a number for floats."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    f = float(v)
    return 0.0 if f == 0 else f


def to_jsonable(x):
    """Recursively convert arrays, Fractions and numpy scalars for JSON output."""
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()] if x.ndim else to_jsonable(x[()])
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, Fraction):
        return literal(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        if not np.isfinite(f):
            return str(f)
        return 0.0 if f == 0 else f
    return x


def _matrix(rows, n, where):
    if not isinstance(rows, list) or len(rows) != n:
        raise SchemaError(where, f"expected a list of {n} rows")
    vals = []
    for a, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{where}[{a}]", f"expected a row of length {n}")
        vals.append([parse_literal(v, f"{where}[{a}][{b}]") for b, v in enumerate(row)])
    return _array(vals)


def _array(vals):
    flat = [v for row in vals for v in row] if vals and isinstance(vals[0], list) else vals
    if all(isinstance(v, Fraction) for v in flat):
        return la.exact_array(vals)
    return np.array([[float(v) for v in row] for row in vals]) if vals and isinstance(vals[0], list) \
        else np.array([float(v) for v in vals])


def parse_matrix(text_or_obj, n: int | None = None, key: str = "theta"):
    """A square matrix from JSON text or object: either a bare list of rows or ``{key: rows}``."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if isinstance(obj, dict):
        if key not in obj:
            raise SchemaError(key, "missing field")
        obj = obj[key]
    if not isinstance(obj, list):
        raise SchemaError(key, "expected a list of rows")
    return _matrix(obj, n if n is not None else len(obj), key)


# ---------------------------------------------------------------------------
# documents


@dataclass(frozen=True, eq=False)
class AlgebraDocument:
    algebra: LieAlgebra
    metric: Metric
    provenance: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def hash(self) -> str:
        return document_hash(self.raw)


def _require(obj, key, kind, where=""):
    if key not in obj:
        raise SchemaError(f"{where}{key}", "missing field")
    v = obj[key]
    if not isinstance(v, kind) or isinstance(v, bool):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SchemaError(f"{where}{key}", f"expected {names}")
    return v


def load_document(text: str, validate: bool = True) -> AlgebraDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return document_from_obj(obj, validate)


def document_from_obj(obj, validate: bool = True) -> AlgebraDocument:
    if not isinstance(obj, dict):
        raise SchemaError("document", "expected a JSON object")
    version = _require(obj, "schema_version", str)
    if version != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION!r})")
    n = _require(obj, "dim", int)
    if n < 1:
        raise SchemaError("dim", "must be positive")
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise SchemaError("name", "expected str")
    basis = obj.get("basis") or [f"e{k + 1}" for k in range(n)]
    if not isinstance(basis, list) or len(basis) != n or not all(isinstance(b, str) for b in basis):
        raise SchemaError("basis", f"expected {n} string labels")
    if len(set(basis)) != n:
        raise SchemaError("basis", "labels must be distinct")

    entries = _require(obj, "brackets", list)
    seen = set()
    brackets = {}
    for e, entry in enumerate(entries):
        where = f"brackets[{e}]."
        if not isinstance(entry, dict):
            raise SchemaError(f"brackets[{e}]", "expected an object")
        i = _require(entry, "i", int, where)
        j = _require(entry, "j", int, where)
        if not (1 <= i <= n and 1 <= j <= n):
            raise SchemaError(f"{where}i", f"indices must lie in 1..{n}")
        if i >= j:
            raise SchemaError(f"{where}i", f"requires i < j, got i={i}, j={j}")
        if (i, j) in seen:
            raise SchemaError(f"brackets[{e}]", f"duplicate pair ({i}, {j})")
        seen.add((i, j))
        coeffs = _require(entry, "coeffs", dict, where)
        parsed = {}
        for k, v in coeffs.items():
            try:
                kk = int(k)
            except ValueError:
                raise SchemaError(f"{where}coeffs.{k}", "key must be an integer index") from None
            if not 1 <= kk <= n:
                raise SchemaError(f"{where}coeffs.{k}", f"index must lie in 1..{n}")
            parsed[kk - 1] = parse_literal(v, f"{where}coeffs.{k}")
        brackets[(i - 1, j - 1)] = parsed

    values = [v for c in brackets.values() for v in c.values()]
    exact = all(isinstance(v, Fraction) for v in values)
    L = LieAlgebra.from_brackets(n, brackets, tuple(basis), name, exact=exact)
    if "metric" not in obj:
        raise SchemaError("metric", "missing field")
    g = _matrix(obj["metric"], n, "metric")
    try:
        m = Metric(g)
    except ValueError as exc:
        raise SchemaError("metric", str(exc)) from None
    if validate:
        rep = check_jacobi(L)
        if not rep.ok:
            raise JacobiError(rep.worst_triple, rep.max_residual)
    prov = obj.get("provenance") or {}
    if not isinstance(prov, dict):
        raise SchemaError("provenance", "expected an object")
    return AlgebraDocument(L, m, prov, obj)


def parse_algebra(text: str, validate: bool = True):
    """(LieAlgebra, Metric) from document text; rational literals are captured exactly."""
    doc = load_document(text, validate)
    return doc.algebra, doc.metric


def document_dict(L: LieAlgebra, m: Metric, provenance: dict | None = None) -> dict:
    brackets = []
    for (i, j), coeffs in sorted(L.brackets().items()):
        brackets.append({"i": i + 1, "j": j + 1,
                         "coeffs": {str(k + 1): literal(v) for k, v in sorted(coeffs.items())}})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": L.name,
        "dim": L.dim,
        "basis": list(L.basis_labels),
        "brackets": brackets,
        "metric": to_jsonable(m.form),
    }
    if doc["name"] is None:
        del doc["name"]
    if provenance:
        doc["provenance"] = to_jsonable(provenance)
    return doc


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def document_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("ascii")).hexdigest()


def emit_algebra(L: LieAlgebra, m: Metric, provenance: dict | None = None) -> str:
    """Pretty, key-sorted document text (the hash is taken over the canonical compact form)."""
    return json.dumps(document_dict(L, m, provenance), sort_keys=True, indent=2) + "\n"


def algebra_hash(L: LieAlgebra, m: Metric, provenance: dict | None = None) -> str:
    return document_hash(document_dict(L, m, provenance))
