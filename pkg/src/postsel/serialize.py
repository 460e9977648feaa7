"""JSON encoding of operators, instances, measurements and construction parameters.

Complex scalars are ``[re, im]`` pairs and matrices are row-major lists of rows.
Python's float repr is the shortest round-trip decimal, so ``decode(encode(x))``
reproduces every matrix entry bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import fields

import numpy as np

from . import construction as cons
from .errors import ValidationError
from .linalg import HermitianOperator, hermitize
from .states import (
    DensityOperator,
    ProblemInstance,
    ThreeOutcomeMeasurement,
    Tolerances,
    make_instance,
    validate_measurement,
)

PARAM_TYPES = {cls.__name__: cls for cls in cons.EQUAL_PARAMS + cons.UNEQUAL_PARAMS}
_MATRIX_FIELDS = {"psi_max", "psi_min", "psi_rho", "psi_sigma", "residual_rho", "residual_sigma"}


# scalars and matrices


def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def encode_matrix(m) -> list:
    a = np.asarray(getattr(m, "matrix", m), dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _scalar(v, where: str) -> complex:
    if isinstance(v, bool):
        raise ValidationError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ValidationError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def decode_matrix(data, where: str = "matrix", dim: int | None = None) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ValidationError(f"{where}: expected a non-empty list of rows")
    n = len(data)
    if any(len(r) != n for r in data):
        raise ValidationError(f"{where}: matrix must be square, got {n} rows of lengths {[len(r) for r in data]}")
    if dim is not None and n != dim:
        raise ValidationError(f"{where}: expected dim {dim}, got {n}")
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            z = _scalar(v, f"{where}[{i}][{j}]")
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValidationError(f"{where}[{i}][{j}]: non-finite entry")
            out[i, j] = z
    return out


def _obj(data, where: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: expected a JSON object")
    missing = required - set(data)
    if missing:
        raise ValidationError(f"{where}: missing keys {sorted(missing)}")
    extra = set(data) - required - set(optional)
    if extra:
        raise ValidationError(f"{where}: unknown keys {sorted(extra)}")
    return data


# instances and measurements


def encode_instance(inst: ProblemInstance) -> dict:
    return {
        "dim": inst.dim,
        "rho": encode_matrix(inst.rho),
        "sigma": encode_matrix(inst.sigma),
        "p_rho": inst.p_rho,
        "tolerances": inst.tolerances.to_dict(),
    }


def decode_instance(data, overrides: dict | None = None) -> ProblemInstance:
    d = _obj(data, "instance", {"rho", "sigma", "p_rho"}, {"dim", "tolerances"})
    dim = d.get("dim")
    if dim is not None and (isinstance(dim, bool) or not isinstance(dim, int) or dim < 1):
        raise ValidationError(f"instance.dim: expected a positive integer, got {dim!r}")
    tol_data = dict(d.get("tolerances") or {})
    if not isinstance(d.get("tolerances", {}), (dict, type(None))):
        raise ValidationError("instance.tolerances: expected an object")
    tol_data.update(overrides or {})
    tol = Tolerances.from_dict(tol_data)
    rho = decode_matrix(d["rho"], "instance.rho", dim)
    sigma = decode_matrix(d["sigma"], "instance.sigma", dim if dim is not None else rho.shape[0])
    p = d["p_rho"]
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise ValidationError(f"instance.p_rho: expected a number, got {p!r}")
    return make_instance(rho, sigma, float(p), tol)


def encode_measurement(m: ThreeOutcomeMeasurement) -> dict:
    return {"lambda_rho": encode_matrix(m.lambda_rho), "lambda_sigma": encode_matrix(m.lambda_sigma)}


def decode_measurement(data, tolerances: Tolerances | None = None, dim: int | None = None) -> ThreeOutcomeMeasurement:
    d = _obj(data, "measurement", {"lambda_rho", "lambda_sigma"})
    lr = decode_matrix(d["lambda_rho"], "measurement.lambda_rho", dim)
    ls = decode_matrix(d["lambda_sigma"], "measurement.lambda_sigma", lr.shape[0])
    return validate_measurement(lr, ls, tolerances)


def encode_density(d: DensityOperator) -> list:
    return encode_matrix(d)


def decode_operator(data, where: str = "operator", tol: float = 1e-8) -> HermitianOperator:
    return hermitize(decode_matrix(data, where), tol)


# construction parameters


def encode_params(params) -> dict:
    out = {"type": type(params).__name__}
    for f in fields(params):
        v = getattr(params, f.name)
        if f.name in _MATRIX_FIELDS:
            out[f.name] = None if v is None else encode_matrix(v)
        else:
            out[f.name] = None if v is None else float(v)
    return out


def decode_params(data, dim: int | None = None):
    if not isinstance(data, dict) or "type" not in data:
        raise ValidationError("params: expected an object with a 'type' key")
    kind = data["type"]
    cls = PARAM_TYPES.get(kind)
    if cls is None:
        raise ValidationError(f"params.type: unknown variant {kind!r}; expected one of {sorted(PARAM_TYPES)}")
    names = {f.name for f in fields(cls)}
    required = {n for n in names if n.startswith("psi_") or n == "c_r"}
    d = _obj(data, "params", required | {"type"}, names)
    kwargs = {}
    for name in names & set(d):
        v = d[name]
        where = f"params.{name}"
        if v is None:
            kwargs[name] = None
        elif name in _MATRIX_FIELDS:
            kwargs[name] = decode_matrix(v, where, dim)
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{where}: expected a number, got {v!r}")
        else:
            kwargs[name] = float(v)
    missing = [n for n in required if kwargs.get(n) is None]
    if missing:
        raise ValidationError(f"params: {sorted(missing)} must not be null")
    return cls(**kwargs)


# text


def loads(text: str, source: str = "<input>"):
    """json.loads with location-bearing ValidationError on malformed input."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(obj, pretty: bool = False) -> str:
    """Deterministic JSON; floats use the shortest round-trip repr."""
    return json.dumps(
        _plain(obj),
        indent=2 if pretty else None,
        separators=None if pretty else (",", ":"),
        allow_nan=False,
    )


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _num(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else None)
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x
