"""Clifford group elements as stabilizer tableaux.

Row ``k`` of ``table`` is the image of the generator ``X_k`` (``k < d``) or
``Z_{k-d}`` (``k >= d``) under conjugation ``P -> C P C^dag``; its first ``d``
columns are x-bits, the last ``d`` z-bits.  ``phases[k] = 1`` flips the sign
of that image.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .pauli import PauliLabel, PhasedPauli, _product_phase
from .sim import _guard, pauli_matrix


def symplectic_gram(d: int) -> np.ndarray:
    omega = np.zeros((2 * d, 2 * d), dtype=np.uint8)
    omega[:d, d:] = np.eye(d, dtype=np.uint8)
    omega[d:, :d] = np.eye(d, dtype=np.uint8)
    return omega


def is_symplectic(table: np.ndarray) -> bool:
    d = table.shape[0] // 2
    m = table.astype(np.int64)
    return np.array_equal((m @ symplectic_gram(d) @ m.T) % 2, symplectic_gram(d))


@dataclass(frozen=True, eq=False)
class CliffordElement:
    n_qubits: int
    table: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        d = self.n_qubits
        table = np.asarray(self.table, dtype=np.uint8) % 2
        phases = np.asarray(self.phases, dtype=np.uint8) % 2
        if table.shape != (2 * d, 2 * d) or phases.shape != (2 * d,):
            raise ValueError("tableau has the wrong shape")
        if not is_symplectic(table):
            raise ValueError("tableau is not symplectic")
        table.setflags(write=False)
        phases.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def identity(cls, d: int) -> "CliffordElement":
        return cls(d, np.eye(2 * d, dtype=np.uint8), np.zeros(2 * d, dtype=np.uint8))

    def key(self) -> tuple:
        return (self.table.tobytes(), self.phases.tobytes())

    def __eq__(self, other):
        return isinstance(other, CliffordElement) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def _row_masks(self, k: int):
        d = self.n_qubits
        row = self.table[k]
        x = z = 0
        for j in range(d):
            x = (x << 1) | int(row[j])
            z = (z << 1) | int(row[d + j])
        return x, z

    def image(self, k: int) -> PhasedPauli:
        x, z = self._row_masks(k)
        return PhasedPauli(2 * int(self.phases[k]), PauliLabel.from_masks(x, z, self.n_qubits))

    def conjugate(self, label: PauliLabel) -> PhasedPauli:
        """``C sigma^label C^dag`` as a phased Pauli word (phase +-1)."""
        d = self.n_qubits
        if label.n_qubits != d:
            raise ValueError("label size does not match the Clifford")
        # sigma(x, z) = i^{|x&z|} prod_j X_j^{x_j} prod_j Z_j^{z_j}
        phase = (label.x & label.z).bit_count()
        cx = cz = 0
        factors = [j for j in range(d) if (label.x >> (d - 1 - j)) & 1]
        factors += [d + j for j in range(d) if (label.z >> (d - 1 - j)) & 1]
        for k in factors:
            gx, gz = self._row_masks(k)
            phase += 2 * int(self.phases[k]) + _product_phase(cx, cz, gx, gz)
            cx, cz = cx ^ gx, cz ^ gz
        return PhasedPauli(phase, PauliLabel.from_masks(cx, cz, d))

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.n_qubits <= 3:
            return _cached_matrix(self.n_qubits, self.key())
        return clifford_matrix(self)

    def to_hex(self) -> str:
        bits = "".join(str(int(b)) for b in self.table.ravel())
        pbits = "".join(str(int(b)) for b in self.phases)
        return f"{int(bits, 2):x} {int(pbits, 2):x}"

    @classmethod
    def from_hex(cls, d: int, table_hex: str, phase_hex: str) -> "CliffordElement":
        bits = format(int(table_hex, 16), f"0{4 * d * d}b")
        pbits = format(int(phase_hex, 16), f"0{2 * d}b")
        table = np.array([int(b) for b in bits], dtype=np.uint8).reshape(2 * d, 2 * d)
        phases = np.array([int(b) for b in pbits], dtype=np.uint8)
        return cls(d, table, phases)


def _form(u: int, v: int, d: int) -> int:
    """Symplectic form of two 2d-bit vectors laid out as (x bits | z bits)."""
    full = (1 << d) - 1
    return ((((u >> d) & v) ^ ((v >> d) & u)) & full).bit_count() & 1


def _combine(coeffs: int, vectors: list) -> int:
    out = 0
    for i, v in enumerate(vectors):
        if (coeffs >> i) & 1:
            out ^= v
    return out


def _symplectic_basis(vectors: list, d: int) -> list:
    """Deterministic symplectic Gram-Schmidt of a spanning list."""
    vectors = [v for v in vectors if v]
    pairs = []
    while vectors:
        f = vectors.pop(0)
        for idx, g in enumerate(vectors):
            if _form(f, g, d):
                vectors.pop(idx)
                break
        else:
            continue
        pairs.append((f, g))
        rest = []
        for u in vectors:
            if _form(u, g, d):
                u ^= f
            if _form(u, f, d):
                u ^= g
            if u:
                rest.append(u)
        vectors = rest
    return pairs


def random_symplectic(d: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly uniform element of Sp(2d, GF(2)).

    Picks the image pair of (X_1, Z_1) uniformly among symplectic pairs, then
    recurses inside their symplectic complement.  Each stage's basis of the
    complement is a deterministic function of the chosen pair, which makes the
    map from choices to matrices a bijection.
    """
    pairs = [(1 << (2 * d - 1 - j), 1 << (d - 1 - j)) for j in range(d)]
    rows_x, rows_z = [], []
    while pairs:
        flat = [v for pair in pairs for v in pair]
        n = 1 << len(flat)
        v = _combine(int(rng.integers(1, n)), flat)
        while True:
            w = _combine(int(rng.integers(0, n)), flat)
            if _form(v, w, d):
                break
        rows_x.append(v)
        rows_z.append(w)
        projected = []
        for u in flat:
            # project onto the complement of span(v, w)
            u ^= (v if _form(u, w, d) else 0) ^ (w if _form(u, v, d) else 0)
            projected.append(u)
        pairs = _symplectic_basis(projected, d)
    bits = "".join(format(r, f"0{2 * d}b") for r in rows_x + rows_z)
    return np.frombuffer(bits.encode(), dtype=np.uint8).reshape(2 * d, 2 * d) - ord("0")


def sample_clifford(d: int, rng: np.random.Generator) -> CliffordElement:
    """Uniformly random Clifford (modulo global phase)."""
    table = random_symplectic(d, rng)
    phases = rng.integers(0, 2, size=2 * d).astype(np.uint8)
    return CliffordElement(d, table, phases)


def enumerate_cliffords(d: int):
    """All Clifford classes on ``d`` qubits (feasible for d <= 2)."""
    if d > 2:
        raise ValueError("enumeration is only supported for d <= 2")
    n = 2 * d
    for bits in itertools.product((0, 1), repeat=n * n):
        table = np.array(bits, dtype=np.uint8).reshape(n, n)
        if not is_symplectic(table):
            continue
        for pbits in itertools.product((0, 1), repeat=n):
            yield CliffordElement(d, table, np.array(pbits, dtype=np.uint8))


def clifford_group_order(d: int) -> int:
    """Number of Clifford classes modulo phase: 2^(d^2 + 2d) prod (4^j - 1)."""
    out = 2 ** (d * d + 2 * d)
    for j in range(1, d + 1):
        out *= 4 ** j - 1
    return out


def _signed_image(c: CliffordElement, k: int) -> np.ndarray:
    img = c.image(k)
    return img.phase * pauli_matrix(img.label)


def clifford_matrix(c: CliffordElement, max_qubits=None) -> np.ndarray:
    """A unitary realising the tableau (global phase arbitrary).

    Column 0 is the +1 common eigenvector of the images of ``Z_j``; column
    ``b`` is obtained from it by the images of ``X^b``.
    """
    d = c.n_qubits
    _guard(d, max_qubits)
    dim = 2 ** d
    proj = np.eye(dim, dtype=complex)
    for j in range(d):
        proj = proj @ (np.eye(dim) + _signed_image(c, d + j)) / 2
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    psi0 = proj[:, col] / np.linalg.norm(proj[:, col])
    u = np.zeros((dim, dim), dtype=complex)
    u[:, 0] = psi0
    filled = 1
    for j in reversed(range(d)):
        # qubit j is bit d-1-j of the basis index
        gx = _signed_image(c, j)
        u[:, filled:2 * filled] = gx @ u[:, :filled]
        filled *= 2
    return u


@lru_cache(maxsize=1 << 15)
def _cached_matrix(d: int, key: tuple) -> np.ndarray:
    table = np.frombuffer(key[0], dtype=np.uint8).reshape(2 * d, 2 * d)
    phases = np.frombuffer(key[1], dtype=np.uint8)
    u = clifford_matrix(CliffordElement(d, table, phases))
    u.setflags(write=False)
    return u
