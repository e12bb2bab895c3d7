"""JSON files for states and channels; complex entries are ``[re, im]`` pairs.

State:   {"dim": d, "matrix": [[[re, im], ...], ...]}
Channel: {"kind": "kraus" | "measurement", "ops": [matrix, ...]}
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .ldp import KRAUS, MEASUREMENT, Channel
from .linalg import DensityMatrix


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ParseError(f"{where}[{i}]: expected a row list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{where}[{i}]: row has {len(row)} entries, expected {width}")
        vals = []
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)):
                raise ParseError(f"{where}[{i}][{j}]: expected [re, im] numbers, got {z!r}")
            if not all(math.isfinite(x) for x in z):
                raise ParseError(f"{where}[{i}][{j}]: non-finite entry")
            vals.append(complex(z[0], z[1]))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    return data


def parse_state(data: dict, source: str = "<state>") -> DensityMatrix:
    if "matrix" not in data:
        raise ParseError(f"{source}: missing field 'matrix'")
    m = decode_matrix(data["matrix"], f"{source}: matrix")
    if m.shape[0] != m.shape[1]:
        raise ParseError(f"{source}: matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    dim = data.get("dim", m.shape[0])
    if not isinstance(dim, int) or dim != m.shape[0]:
        raise ParseError(f"{source}: field 'dim' = {dim!r} does not match matrix size {m.shape[0]}")
    return DensityMatrix(m)


def load_state(path) -> DensityMatrix:
    """Read and validate a state file; invariant failures raise ValidationError."""
    return parse_state(_read_json(path), str(path))


def state_to_dict(rho) -> dict:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return {"dim": int(m.shape[0]), "matrix": encode_matrix(m)}


def save_state(rho, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho)))


def parse_channel(data: dict, source: str = "<channel>") -> Channel:
    kind = data.get("kind")
    if kind not in (KRAUS, MEASUREMENT):
        raise ParseError(f"{source}: field 'kind' must be 'kraus' or 'measurement', got {kind!r}")
    ops = data.get("ops")
    if not isinstance(ops, list) or not ops:
        raise ParseError(f"{source}: field 'ops' must be a non-empty list of matrices")
    mats = [decode_matrix(op, f"{source}: ops[{i}]") for i, op in enumerate(ops)]
    return Channel(kind, tuple(mats))


def load_channel(path) -> Channel:
    return parse_channel(_read_json(path), str(path))


def channel_to_dict(ch: Channel) -> dict:
    return {"kind": ch.kind, "ops": [encode_matrix(op) for op in ch.ops]}


def save_channel(ch: Channel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(ch)))


def jsonable(x):
    """Recursively replace non-finite floats with strings and numpy scalars with Python ones."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    return x
