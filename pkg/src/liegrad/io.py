"""File formats: operators, state specs, and the JSON result document."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, ParseError
from .pauli import PauliLabel, PauliSum, parse_pauli_sum
from .sim import StateSpec, check_density, is_hermitian, pauli_sum_matrix

SCHEMA_VERSION = 1

_BITS_RE = re.compile(r"^[01]+$")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_complex(token: str, lineno: int) -> complex:
    parts = token.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 're,im' entry, got {token!r}", line=lineno)
    try:
        val = complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ParseError(f"bad number in {token!r}", line=lineno) from None
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise ParseError(f"non-finite entry {token!r}", line=lineno)
    return val


def parse_dense(text: str) -> np.ndarray:
    """``dense <dim>`` header, then ``dim`` rows of ``re,im`` entries.

    ``vector <dim>`` is accepted for state vectors (one row of entries).
    """
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty matrix file")
    lineno, header = lines[0]
    head = header.split()
    if len(head) != 2 or head[0] not in ("dense", "vector"):
        raise ParseError("expected 'dense <dim>' or 'vector <dim>' header", line=lineno)
    try:
        dim = int(head[1])
    except ValueError:
        raise ParseError(f"bad dimension {head[1]!r}", line=lineno) from None
    if dim < 1 or dim & (dim - 1):
        raise ParseError(f"dimension {dim} is not a power of two", line=lineno)
    rows = lines[1:]
    n_rows = 1 if head[0] == "vector" else dim
    if len(rows) != n_rows:
        raise ParseError(f"expected {n_rows} rows, found {len(rows)}", line=lineno)
    out = np.empty((n_rows, dim), dtype=complex)
    for i, (ln, row) in enumerate(rows):
        tokens = row.split()
        if len(tokens) != dim:
            raise ParseError(f"expected {dim} entries, found {len(tokens)}", line=ln)
        out[i] = [_parse_complex(t, ln) for t in tokens]
    return out[0] if head[0] == "vector" else out


def format_dense(m: np.ndarray) -> str:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        lines = [f"vector {m.shape[0]}", " ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in m)]
    else:
        lines = [f"dense {m.shape[0]}"]
        lines += [" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in m]
    return "\n".join(lines) + "\n"


def _is_dense(text: str) -> bool:
    for _, line in _content_lines(text):
        return line.split()[0] in ("dense", "vector")
    return False


def parse_operator(text: str, n_qubits=None):
    """A PauliSum, or a dense matrix when the text has a ``dense`` header."""
    if _is_dense(text):
        return parse_dense(text)
    return parse_pauli_sum(text, n_qubits)


def read_operator(path, n_qubits=None):
    return parse_operator(Path(path).read_text(), n_qubits)


def read_observable(path, n_qubits=None) -> np.ndarray:
    op = read_operator(path, n_qubits)
    if isinstance(op, PauliSum):
        return pauli_sum_matrix(op)
    if op.ndim != 2:
        raise ParseError("observable file must hold a matrix")
    if not is_hermitian(op):
        raise ContractError(f"observable in {path} is not Hermitian")
    return op


def parse_state(spec: str, n_qubits: int) -> StateSpec:
    """``0101`` basis state, ``mixed``, or a path to a state file.

    State files hold a dense matrix, a ``vector``, or a PauliSum for rho.
    """
    spec = spec.strip()
    if _BITS_RE.match(spec):
        if len(spec) != n_qubits:
            raise ParseError(f"state {spec!r} has {len(spec)} qubits, expected {n_qubits}")
        return StateSpec("basis", spec)
    if spec == "mixed":
        return StateSpec("mixed", n_qubits)
    path = Path(spec)
    if not path.is_file():
        raise ParseError(f"state spec {spec!r} is neither a bitstring, 'mixed', nor a file")
    op = read_operator(path, n_qubits)
    if isinstance(op, PauliSum):
        op = pauli_sum_matrix(op)
    if op.ndim == 1:
        return StateSpec("vector", op)
    check_density(op)
    return StateSpec("density", op)


@dataclass
class ResultDocument:
    """Serialized outcome of one CLI command."""

    command: str
    config: dict
    report: dict = None
    analysis: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.config = _plain(self.config)
        self.report = _plain(self.report)
        self.analysis = _plain(self.analysis)
        self.timing = _plain(self.timing)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "report": self.report,
            "analysis": self.analysis,
            "timing": self.timing,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"result document is not valid JSON: {exc.msg}",
                             line=exc.lineno, position=exc.colno) from None
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema version {data.get('schema_version')!r}")
        return cls(
            command=data["command"],
            config=data["config"],
            report=data.get("report"),
            analysis=data.get("analysis", {}),
            timing=data.get("timing", {}),
            schema_version=data["schema_version"],
        )


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, PauliLabel):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return obj
