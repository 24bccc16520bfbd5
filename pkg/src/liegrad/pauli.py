"""Pauli strings in the binary symplectic encoding.

A d-qubit Pauli word is a tuple of symbols in {0, 1, 2, 3} (I, X, Y, Z).
Internally each label also carries two bitmasks ``x`` and ``z`` (the usual
stabilizer-tableau convention, qubit 0 in the most significant bit) which
make every group operation a handful of integer instructions.

The symplectic encoding exposed to users is the pair ``(sym0 | sym1)`` with
the per-qubit assignment

    I -> (0|0),  X -> (0|1),  Y -> (1|0),  Z -> (1|1)

so that ``sym0 = z`` and ``sym1 = x XOR z``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import DimensionMismatch, ParseError

CHARS = "IXYZ"
_CHAR_TO_SYMBOL = {c: i for i, c in enumerate(CHARS)}

# Drop threshold applied after every PauliSum arithmetic operation.
ZERO_TOL = 1e-14


@dataclass(frozen=True)
class PauliLabel:
    """A Pauli word ``sigma^s`` with ``s`` in {0,1,2,3}^d."""

    word: tuple
    x: int = field(init=False, repr=False, compare=False)
    z: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        word = tuple(int(c) for c in self.word)
        x = z = 0
        for c in word:
            if c not in (0, 1, 2, 3):
                raise ValueError(f"Pauli symbol must be in 0..3, got {c}")
            x = (x << 1) | (c in (1, 2))
            z = (z << 1) | (c in (2, 3))
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_masks(cls, x: int, z: int, n_qubits: int) -> "PauliLabel":
        word = []
        for j in range(n_qubits):
            bit = n_qubits - 1 - j
            xb, zb = (x >> bit) & 1, (z >> bit) & 1
            word.append((0, 3, 1, 2)[xb * 2 + zb])
        return cls(tuple(word))

    @classmethod
    def from_symplectic(cls, sym0: Iterable[int], sym1: Iterable[int]) -> "PauliLabel":
        sym0, sym1 = tuple(sym0), tuple(sym1)
        if len(sym0) != len(sym1):
            raise DimensionMismatch("sym0 and sym1 must have equal length")
        table = {(0, 0): 0, (0, 1): 1, (1, 0): 2, (1, 1): 3}
        return cls(tuple(table[(int(a), int(b))] for a, b in zip(sym0, sym1)))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliLabel":
        return cls((0,) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.word)

    @property
    def sym0(self) -> tuple:
        return tuple(int(c in (2, 3)) for c in self.word)

    @property
    def sym1(self) -> tuple:
        return tuple(int(c in (1, 3)) for c in self.word)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> tuple:
        return tuple(j for j, c in enumerate(self.word) if c)

    def sort_key(self) -> tuple:
        """Canonical order: lexicographic on (sym0, sym1)."""
        return (self.sym0, self.sym1)

    def __str__(self) -> str:
        return "".join(CHARS[c] for c in self.word)

    def __len__(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class PhasedPauli:
    """``i**phase_exp * sigma^label``."""

    phase_exp: int
    label: PauliLabel

    def __post_init__(self):
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_exp]


def encode(text: str) -> PauliLabel:
    """Parse an I/X/Y/Z word, e.g. ``encode("XYX").word == (1, 2, 1)``."""
    symbols = []
    for pos, ch in enumerate(text):
        try:
            symbols.append(_CHAR_TO_SYMBOL[ch])
        except KeyError:
            raise ParseError(f"unknown Pauli character {ch!r} in {text!r}", position=pos) from None
    return PauliLabel(tuple(symbols))


def decode(label: PauliLabel) -> str:
    return str(label)


def as_label(obj) -> PauliLabel:
    if isinstance(obj, PauliLabel):
        return obj
    if isinstance(obj, str):
        return encode(obj)
    return PauliLabel(tuple(obj))


def _check(s: PauliLabel, r: PauliLabel) -> None:
    if len(s.word) != len(r.word):
        raise DimensionMismatch(f"Pauli labels act on {len(s.word)} and {len(r.word)} qubits")


def odot(s: PauliLabel, r: PauliLabel) -> int:
    """Symplectic inner product mod 2; 1 iff the words anticommute."""
    _check(s, r)
    return ((s.z & r.x) ^ (s.x & r.z)).bit_count() & 1


def symplectic_form(s: PauliLabel, r: PauliLabel) -> int:
    """Integer-valued symplectic form before reduction mod 2."""
    _check(s, r)
    return (s.z & r.x).bit_count() + (s.x & r.z).bit_count()


def commutes(s: PauliLabel, r: PauliLabel) -> bool:
    return odot(s, r) == 0


def circ(s: PauliLabel, r: PauliLabel) -> PauliLabel:
    """Klein-group product label (XOR of encodings)."""
    _check(s, r)
    return PauliLabel.from_masks(s.x ^ r.x, s.z ^ r.z, len(s.word))


def _product_phase(sx: int, sz: int, rx: int, rz: int) -> int:
    # sigma(x, z) = i^{|x&z|} X^x Z^z and Z^z X^x = (-1)^{|z&x|} X^x Z^z
    tx, tz = sx ^ rx, sz ^ rz
    return ((sx & sz).bit_count() + (rx & rz).bit_count()
            + 2 * (sz & rx).bit_count() - (tx & tz).bit_count()) % 4


def pauli_product(s: PauliLabel, r: PauliLabel) -> PhasedPauli:
    """``sigma^s sigma^r = i**k sigma^(s o r)`` with the exact phase ``k``."""
    _check(s, r)
    k = _product_phase(s.x, s.z, r.x, r.z)
    return PhasedPauli(k, circ(s, r))


def circledast(s: PauliLabel, r: PauliLabel) -> int:
    """Signed product in {-1, 0, 1}: ``[sigma^s, sigma^r] = 2i (s (*) r) sigma^(s o r)``.

    Single-site values follow the cyclic order X -> Y -> Z, i.e. the sign is
    -1 exactly on (Y,X), (Z,Y), (X,Z).  For several anticommuting sites the
    sign is read off the total phase of the product, not the product of
    per-site signs.
    """
    _check(s, r)
    if odot(s, r) == 0:
        return 0
    k = _product_phase(s.x, s.z, r.x, r.z)
    return 1 if k == 1 else -1


def commutator_label(s: PauliLabel, r: PauliLabel):
    """``[sigma^s, sigma^r] = i * c * sigma^t``; returns ``(c, t)`` or ``None``."""
    sign = circledast(s, r)
    if sign == 0:
        return None
    return 2.0 * sign, circ(s, r)


class PauliSum:
    """Sparse linear combination of Pauli words.

    Coefficients are real for Hamiltonians and observables; complex values are
    tolerated so that ``pauli_decompose`` can represent arbitrary matrices.
    Instances are treated as immutable.
    """

    __slots__ = ("_terms", "n_qubits")

    def __init__(self, terms=None, n_qubits=None):
        clean = {}
        for key, coeff in (terms or {}).items():
            label = as_label(key)
            if n_qubits is None:
                n_qubits = label.n_qubits
            elif label.n_qubits != n_qubits:
                raise DimensionMismatch(
                    f"label {label} has {label.n_qubits} qubits, expected {n_qubits}")
            if abs(coeff) >= ZERO_TOL:
                clean[label] = clean.get(label, 0.0) + coeff
        if n_qubits is None:
            raise ValueError("n_qubits is required for an empty PauliSum")
        self._terms = {k: v for k, v in clean.items() if abs(v) >= ZERO_TOL}
        self.n_qubits = int(n_qubits)

    @classmethod
    def from_label(cls, label, coeff=1.0) -> "PauliSum":
        label = as_label(label)
        return cls({label: coeff}, label.n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls({}, n_qubits)

    @classmethod
    def from_text(cls, text: str, n_qubits=None) -> "PauliSum":
        return parse_pauli_sum(text, n_qubits)

    @property
    def terms(self) -> Mapping[PauliLabel, float]:
        return MappingProxyType(self._terms)

    @property
    def labels(self) -> list:
        return list(self._terms)

    @property
    def is_real(self) -> bool:
        return all(not isinstance(v, complex) or v.imag == 0 for v in self._terms.values())

    def coefficient(self, label) -> float:
        return self._terms.get(as_label(label), 0.0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator:
        return iter(self._terms.items())

    def __contains__(self, label):
        return as_label(label) in self._terms

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self):
        inner = ", ".join(f"{v!r}*{k}" for k, v in self._terms.items())
        return f"PauliSum({inner or '0'}; n_qubits={self.n_qubits})"

    def _combine(self, other, sign):
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatch(f"PauliSums on {self.n_qubits} and {other.n_qubits} qubits")
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0.0) + sign * v
        return PauliSum(out, self.n_qubits)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        return PauliSum({k: scalar * v for k, v in self._terms.items()}, self.n_qubits)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def dot(self, other: "PauliSum") -> float:
        """Coefficient inner product, equal to tr(A^dag B) / 2^d."""
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatch("dot of PauliSums on different qubit counts")
        if len(other) < len(self):
            return other.dot(self).conjugate()
        total = 0.0
        for k, v in self._terms.items():
            w = other._terms.get(k)
            if w is not None:
                total += v.conjugate() * w
        return total

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._terms.values()))

    def to_matrix(self):
        from .sim import pauli_sum_matrix

        return pauli_sum_matrix(self)

    def to_text(self) -> str:
        return format_pauli_sum(self)


def apply_ad(a: PauliSum, b: PauliSum) -> PauliSum:
    """Real-coefficient adjoint action: returns ``C`` with ``[A, B] = i C``.

    Built term by term from the Pauli commutator, so the number of terms is at
    most ``len(a) * len(b)``.
    """
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatch(f"PauliSums on {a.n_qubits} and {b.n_qubits} qubits")
    d = a.n_qubits
    out: dict = {}
    for s, cs in a._terms.items():
        sx, sz = s.x, s.z
        for r, cr in b._terms.items():
            rx, rz = r.x, r.z
            if ((sz & rx) ^ (sx & rz)).bit_count() & 1 == 0:
                continue
            k = _product_phase(sx, sz, rx, rz)
            key = (sx ^ rx, sz ^ rz)
            val = 2.0 * cs * cr * (1 if k == 1 else -1)
            out[key] = out.get(key, 0.0) + val
    return PauliSum({PauliLabel.from_masks(x, z, d): v for (x, z), v in out.items()}, d)


_TERM_RE = re.compile(r"^\s*(\S+)\s+(\S+)\s*$")


def parse_pauli_sum(text: str, n_qubits=None) -> PauliSum:
    """Parse ``<coefficient> <word>`` lines; ``#`` starts a comment.

    Term order is preserved, so iteration follows file order.
    """
    labels, coeffs = parse_parameters(text, n_qubits)
    return PauliSum(dict(zip(labels, coeffs)), labels[0].n_qubits)


def parse_parameters(text: str, n_qubits=None):
    """Parse a Hamiltonian file into ordered ``(labels, coefficients)``.

    Unlike ``parse_pauli_sum`` this keeps zero-coefficient terms: a parameter
    whose current value is 0 is still a parameter.
    """
    labels, coeffs = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _TERM_RE.match(line)
        if m is None:
            raise ParseError(f"expected '<coefficient> <word>', got {raw.strip()!r}", line=lineno)
        coeff_text, word = m.groups()
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise ParseError(f"bad coefficient {coeff_text!r}", line=lineno) from None
        if not math.isfinite(coeff):
            raise ParseError(f"non-finite coefficient {coeff_text!r}", line=lineno)
        try:
            label = encode(word)
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if n_qubits is None:
            n_qubits = label.n_qubits
        elif label.n_qubits != n_qubits:
            raise ParseError(
                f"word {word!r} has {label.n_qubits} qubits, expected {n_qubits}", line=lineno)
        if label in labels:
            raise ParseError(f"duplicate term {word!r}", line=lineno)
        labels.append(label)
        coeffs.append(coeff)
    if not labels:
        raise ParseError("no terms found")
    return labels, coeffs


def format_pauli_sum(ps: PauliSum) -> str:
    lines = []
    for label, coeff in ps:
        if isinstance(coeff, complex):
            if coeff.imag != 0:
                raise ValueError("text format holds real coefficients only")
            coeff = coeff.real
        lines.append(f"{coeff!r} {label}")
    return "\n".join(lines) + "\n"
