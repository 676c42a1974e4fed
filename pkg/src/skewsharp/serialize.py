"""JSON I/O: complex matrices as [re, im] pairs, floats at 17 significant digits.

The dumper is deterministic (insertion order, fixed float formatting) so that
identical inputs produce byte-identical files; 17 significant digits round-trip
doubles exactly.  Infinities follow Python's json convention (Infinity), which
``json.loads`` accepts back.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .linalg import DensityMatrix, SkewsharpError
from .skew import ObservableSet


class FormatError(SkewsharpError):
    pass


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text with fixed float formatting."""

    def render(node, depth):
        pad = " " * (indent * depth)
        inner = " " * (indent * (depth + 1))
        if node is None:
            return "null"
        if isinstance(node, bool):
            return "true" if node else "false"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            return fmt_float(float(node))
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, dict):
            if not node:
                return "{}"
            items = ",\n".join(
                f"{inner}{json.dumps(str(k))}: {render(v, depth + 1)}" for k, v in node.items()
            )
            return "{\n" + items + "\n" + pad + "}"
        if isinstance(node, (list, tuple)):
            if len(node) == 0:
                return "[]"
            flat = all(isinstance(v, (int, float, np.integer, np.floating)) for v in node)
            if flat:
                return "[" + ", ".join(render(v, depth + 1) for v in node) + "]"
            items = ",\n".join(f"{inner}{render(v, depth + 1)}" for v in node)
            return "[\n" + items + "\n" + pad + "]"
        raise FormatError(f"cannot serialize {type(node).__name__}")

    return render(obj, 0) + "\n"


def matrix_to_pairs(A: np.ndarray) -> list:
    A = np.asarray(A, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in A]


def pairs_to_matrix(data, what: str = "matrix") -> np.ndarray:
    try:
        A = np.asarray(
            [[complex(cell[0], cell[1]) for cell in row] for row in data], dtype=complex
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise FormatError(f"{what}: entries must be [re, im] pairs") from exc
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise FormatError(f"{what}: expected a square matrix, got shape {A.shape}")
    return A


def real_matrix_to_lists(A: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(A, dtype=float)]


def state_to_dict(rho: DensityMatrix, label: str | None = None) -> dict:
    out = {"dim": rho.dim, "matrix": matrix_to_pairs(rho.matrix)}
    if label is not None:
        out["label"] = label
    return out


def parse_state(data: dict, what: str = "state") -> DensityMatrix:
    if not isinstance(data, dict) or "matrix" not in data:
        raise FormatError(f"{what}: expected an object with a 'matrix' field")
    A = pairs_to_matrix(data["matrix"], what)
    dim = data.get("dim")
    if dim is not None and int(dim) != A.shape[0]:
        raise FormatError(f"{what}: declared dim {dim} != matrix dim {A.shape[0]}")
    return DensityMatrix.from_matrix(A)


def observables_to_dict(X: ObservableSet, labels: list[str] | None = None) -> dict:
    out = {"dim": X.dim, "observables": [matrix_to_pairs(M) for M in X.observables]}
    if labels is not None:
        out["labels"] = list(labels)
    return out


def parse_observables(data: dict, what: str = "observables") -> ObservableSet:
    if not isinstance(data, dict) or "observables" not in data:
        raise FormatError(f"{what}: expected an object with an 'observables' field")
    mats = [pairs_to_matrix(m, f"{what}[{k}]") for k, m in enumerate(data["observables"])]
    dim = data.get("dim")
    if dim is not None and any(int(dim) != m.shape[0] for m in mats):
        raise FormatError(f"{what}: declared dim {dim} does not match every matrix")
    return ObservableSet.from_matrices(mats)


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def sha256_of_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()
