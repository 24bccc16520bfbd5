"""Dense 2^d x 2^d simulator used as the exact oracle.

Operators are plain complex ``numpy`` arrays indexed by computational basis
states; qubit 0 is the most significant bit of the basis index, matching the
Kronecker order ``sigma^{s_0} (x) sigma^{s_1} (x) ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ContractError, DimensionMismatch, NumericalError, ResourceError
from .pauli import PauliLabel, PauliSum, as_label

MAX_QUBITS = 8

HERMITIAN_TOL = 1e-10

_SINGLE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _guard(n_qubits: int, max_qubits=None) -> None:
    limit = MAX_QUBITS if max_qubits is None else max_qubits
    if n_qubits > limit:
        raise ResourceError(
            f"dense simulation of {n_qubits} qubits exceeds the limit of {limit}")


@lru_cache(maxsize=4096)
def _pauli_matrix_cached(word: tuple) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for c in word:
        m = np.kron(m, _SINGLE[c])
    m.setflags(write=False)
    return m


def pauli_matrix(label, max_qubits=None) -> np.ndarray:
    """Dense matrix of a Pauli word (read-only, cached)."""
    label = as_label(label)
    _guard(label.n_qubits, max_qubits)
    return _pauli_matrix_cached(label.word)


def pauli_sum_matrix(ps: PauliSum, max_qubits=None) -> np.ndarray:
    _guard(ps.n_qubits, max_qubits)
    dim = 2 ** ps.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for label, coeff in ps:
        out += coeff * _pauli_matrix_cached(label.word)
    return out


def as_matrix(op) -> np.ndarray:
    if isinstance(op, PauliSum):
        return pauli_sum_matrix(op)
    return np.asarray(op, dtype=complex)


def n_qubits_of(m: np.ndarray) -> int:
    dim = m.shape[0]
    d = dim.bit_length() - 1
    if m.ndim != 2 or m.shape[0] != m.shape[1] or 2 ** d != dim:
        raise DimensionMismatch(f"expected a square 2^d matrix, got shape {m.shape}")
    return d


def is_hermitian(m: np.ndarray, tol=HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_unitary(m: np.ndarray, tol=1e-12) -> bool:
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])), initial=0.0) <= tol)


def check_density(rho: np.ndarray, tol=1e-10) -> None:
    n_qubits_of(rho)
    if not is_hermitian(rho, tol):
        raise ContractError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ContractError(f"state has trace {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ContractError("state is not positive semidefinite")


def _require_hermitian(o: np.ndarray, what="observable") -> None:
    if not is_hermitian(o):
        raise ContractError(f"{what} is not Hermitian")


@dataclass(frozen=True)
class StateSpec:
    """Input state description.

    ``kind`` is one of ``basis`` (payload: bitstring), ``mixed`` (payload:
    number of qubits), ``vector`` (payload: amplitudes) or ``density``
    (payload: matrix).
    """

    kind: str
    payload: object

    def density(self) -> np.ndarray:
        if self.kind == "basis":
            bits = str(self.payload)
            d = len(bits)
            _guard(d)
            rho = np.zeros((2 ** d, 2 ** d), dtype=complex)
            idx = int(bits, 2) if bits else 0
            rho[idx, idx] = 1.0
            return rho
        if self.kind == "mixed":
            d = int(self.payload)
            _guard(d)
            return np.eye(2 ** d, dtype=complex) / 2 ** d
        if self.kind == "vector":
            psi = np.asarray(self.payload, dtype=complex).ravel()
            if abs(np.linalg.norm(psi) - 1) > 1e-12:
                raise ContractError("state vector is not unit-norm")
            return np.outer(psi, psi.conj())
        if self.kind == "density":
            rho = np.asarray(self.payload, dtype=complex)
            check_density(rho)
            return rho
        raise ValueError(f"unknown state kind {self.kind!r}")


def basis_state(bits: str) -> np.ndarray:
    return StateSpec("basis", bits).density()


def unitary(a, max_qubits=None) -> np.ndarray:
    """``exp(iA)`` for Hermitian ``A`` via eigendecomposition."""
    a = as_matrix(a)
    _guard(n_qubits_of(a), max_qubits)
    _require_hermitian(a, "generator")
    w, v = np.linalg.eigh(a)
    return (v * np.exp(1j * w)) @ v.conj().T


def evolve(a, rho: np.ndarray) -> np.ndarray:
    """Output state ``exp(iA) rho exp(iA)^dag``."""
    rho = np.asarray(rho, dtype=complex)
    check_density(rho)
    u = unitary(a)
    if u.shape != rho.shape:
        raise DimensionMismatch(f"generator shape {u.shape} vs state shape {rho.shape}")
    return u @ rho @ u.conj().T


def loss(o, rho_out: np.ndarray) -> float:
    o = as_matrix(o)
    _require_hermitian(o)
    val = np.trace(o @ rho_out)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise NumericalError(f"loss has imaginary part {val.imag:.3g}")
    return float(val.real)


def _pauli_trace(label: PauliLabel, m: np.ndarray) -> complex:
    # tr(sigma m) without forming products
    return np.sum(pauli_matrix(label) * m.T)


def exact_D(o, s, rho_out: np.ndarray) -> float:
    """Hadamard-test value ``i tr(O [sigma^s, rho_out])``."""
    s = as_label(s)
    o = as_matrix(o)
    if o.shape != rho_out.shape or o.shape[0] != 2 ** s.n_qubits:
        raise DimensionMismatch("observable, state and label sizes disagree")
    if s.is_identity:
        return 0.0
    # i tr(O[s, rho]) = tr(s * i[rho, O])
    c = 1j * (rho_out @ o - o @ rho_out)
    return float(_pauli_trace(s, c).real)


def hadamard_values(o, rho_out: np.ndarray, labels: Sequence) -> dict:
    """``exact_D`` for many labels, sharing the commutator."""
    o = as_matrix(o)
    if o.shape != rho_out.shape:
        raise DimensionMismatch("observable and state sizes disagree")
    c = 1j * (rho_out @ o - o @ rho_out)
    out = {}
    for s in labels:
        s = as_label(s)
        out[s] = 0.0 if s.is_identity else float(_pauli_trace(s, c).real)
    return out


def rotation(s, theta: float) -> np.ndarray:
    """``R_s(theta) = exp(-i theta/2 sigma^s)``."""
    p = pauli_matrix(s)
    return np.cos(theta / 2) * np.eye(p.shape[0]) - 1j * np.sin(theta / 2) * p


def observable_Hs(o, s) -> np.ndarray:
    """Observable whose expectation on any state equals the Hadamard test D_s.

    ``H_s = R_-^dag O R_- - R_+^dag O R_+`` with ``R_pm = R_s(pm pi/2)``; this
    ordering is the one for which ``tr(H_s rho) = i tr(O [sigma^s, rho])``.
    """
    o = as_matrix(o)
    _require_hermitian(o)
    s = as_label(s)
    rp, rm = rotation(s, np.pi / 2), rotation(s, -np.pi / 2)
    h = rm.conj().T @ o @ rm - rp.conj().T @ o @ rp
    return (h + h.conj().T) / 2


def sample_observable(m, state: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Born-rule samples of the eigenvalues of ``m`` on ``state``.

    ``state`` may be a density matrix or a pure-state vector.
    """
    m = as_matrix(m)
    _require_hermitian(m)
    w, v = np.linalg.eigh(m)
    if state.ndim == 1:
        amps = v.conj().T @ state
        probs = np.abs(amps) ** 2
    else:
        probs = np.real(np.einsum("ij,jk,ki->i", v.conj().T, state, v))
    if abs(probs.sum() - 1) > 1e-9:
        raise NumericalError(f"outcome probabilities sum to {probs.sum():.12g}")
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return rng.choice(w, size=shots, p=probs)


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0."""
    a = a.copy()
    h = 1
    n = a.shape[0]
    while h < n:
        a = a.reshape(n // (2 * h), 2, h, *a.shape[1:])
        top, bot = a[:, 0].copy(), a[:, 1].copy()
        a[:, 0], a[:, 1] = top + bot, top - bot
        a = a.reshape(n, *a.shape[3:])
        h *= 2
    return a


def pauli_decompose(m, tol=1e-14) -> PauliSum:
    """Coefficients ``tr(M sigma^s) / 2^d`` for all words, as a PauliSum.

    Computed with one Walsh-Hadamard transform per X-pattern, O(d 4^d).
    Hermitian input gives real coefficients.
    """
    m = np.asarray(m, dtype=complex)
    d = n_qubits_of(m)
    _guard(d)
    dim = 2 ** d
    idx = np.arange(dim)
    hermitian = is_hermitian(m)
    terms = {}
    for x in range(dim):
        # tr(M X^x Z^z) = sum_j (-1)^{z.j} M[j, j ^ x]
        v = m[idx, idx ^ x]
        tz = _fwht(v)
        for z in range(dim):
            val = tz[z] * (1j ** ((x & z).bit_count())) / dim
            if abs(val) < tol:
                continue
            if hermitian:
                val = float(val.real)
            terms[PauliLabel.from_masks(x, z, d)] = val
    return PauliSum(terms, d)


def finite_difference_gradient(o, rho: np.ndarray, labels: Sequence, a: Sequence[float],
                               h: float = 1e-5) -> np.ndarray:
    """Central differences of the exact loss with respect to each coefficient."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("step h must lie in [1e-7, 1e-3]")
    labels = [as_label(s) for s in labels]
    a = np.asarray(a, dtype=float)
    o = as_matrix(o)
    d = labels[0].n_qubits
    mats = [pauli_matrix(s) for s in labels]
    base = sum((c * m for c, m in zip(a, mats)), np.zeros((2 ** d, 2 ** d), dtype=complex))
    grad = np.empty(len(labels))
    for r, m in enumerate(mats):
        up = loss(o, evolve(base + h * m, rho))
        down = loss(o, evolve(base - h * m, rho))
        grad[r] = (up - down) / (2 * h)
    return grad


def random_observable(n_qubits: int, rng: np.random.Generator, traceless=False) -> np.ndarray:
    """Hermitian matrix with i.i.d. Gaussian Pauli coefficients and tr(O^2) = 1."""
    _guard(n_qubits)
    dim = 2 ** n_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    o = (g + g.conj().T) / 2
    if traceless:
        o -= np.trace(o) / dim * np.eye(dim)
    return o / np.sqrt(np.trace(o @ o).real)


def random_density(n_qubits: int, rng: np.random.Generator, rank=None) -> np.ndarray:
    dim = 2 ** n_qubits
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    dim = 2 ** n_qubits
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)
