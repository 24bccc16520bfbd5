"""Gradient estimators for ``U(a) = exp(iA(a))`` built from Hadamard-test values.

Every estimator consumes values ``D_t = i tr(O [sigma^t, rho_out])`` through
either a mapping or a callable ``label -> float``.  The common convention is
the real adjoint ``C(B) = (1/i)[A, B]`` (``pauli.apply_ad``); with it

    dL/da_r = sum_k (-1)^k / (k+1)! * sum_t [C^k(sigma^r)]_t D_t.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.linalg import expm

from .errors import ContractError, MissingHadamardValue, NumericalError
from .groups import SubgroupBasis
from .pauli import PauliLabel, PauliSum, apply_ad, as_label, circ, circledast

DProvider = Union[Mapping, Callable[[PauliLabel], float]]


@dataclass
class GradientReport:
    method: str
    labels: list
    gradient: np.ndarray
    d_values: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gradient = np.asarray(self.gradient, dtype=float)
        if self.gradient.shape != (len(self.labels),):
            raise ValueError("gradient length must equal the number of parameters")
        if not np.all(np.isfinite(self.gradient)):
            raise NumericalError(f"{self.method} produced non-finite gradient entries")

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "labels": [str(s) for s in self.labels],
            "gradient": [float(g) for g in self.gradient],
            "d_values": {str(k): float(v) for k, v in self.d_values.items()},
            "diagnostics": dict(self.diagnostics),
        }


class _CachedD:
    """Wraps a D provider; records every value requested."""

    def __init__(self, provider: DProvider):
        self._provider = provider
        self.values: dict = {}

    def __call__(self, label: PauliLabel) -> float:
        if label.is_identity:
            return 0.0
        try:
            return self.values[label]
        except KeyError:
            pass
        if callable(self._provider):
            val = float(self._provider(label))
        else:
            try:
                val = float(self._provider[label])
            except KeyError:
                raise MissingHadamardValue(f"no Hadamard-test value for {label}") from None
        self.values[label] = val
        return val


@dataclass(frozen=True)
class VMatrix:
    basis: SubgroupBasis
    entries: np.ndarray


def build_V(basis: SubgroupBasis, a: Mapping) -> VMatrix:
    """Adjoint action of ``A = sum_s a_s sigma^s`` in the subgroup basis.

    Column ``i`` holds ``2 sum_s a_s (s (*) s_i) e_(s o s_i)``.
    """
    coeffs = {as_label(k): float(v) for k, v in a.items()}
    for s, v in coeffs.items():
        if s not in basis.index:
            raise ContractError(f"parameter label {s} is outside the subgroup")
        if not math.isfinite(v):
            raise ContractError(f"non-finite coefficient for {s}")
    q = basis.size
    v_mat = np.zeros((q, q))
    support = [(s, c) for s, c in coeffs.items() if c != 0.0]
    for i, si in enumerate(basis.elements):
        for s, c in support:
            sign = circledast(s, si)
            if sign:
                v_mat[basis.index[circ(s, si)], i] = 2.0 * c * sign
    if not np.array_equal(v_mat, -v_mat.T):
        raise NumericalError("V matrix is not antisymmetric")
    return VMatrix(basis, v_mat)


def phi1(m: np.ndarray) -> np.ndarray:
    """``phi_1(M) = sum_k M^k / (k+1)!`` from one augmented exponential.

    ``expm([[M, I], [0, 0]])`` has ``phi_1(M)`` as its top-right block.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NumericalError("phi1 of a matrix with non-finite entries")
    q = m.shape[0]
    aug = np.zeros((2 * q, 2 * q))
    aug[:q, :q] = m
    aug[:q, q:] = np.eye(q)
    return expm(aug)[:q, q:]


def b_matrix(v) -> np.ndarray:
    """The matrix ``B`` with ``grad = B @ D`` (rows: parameters, columns: D labels).

    Derivative ``i`` has coefficient vector ``phi_1(-V) e_i`` in the D basis,
    so ``B = phi_1(-V)^T`` (equal to ``phi_1(V)`` since V is antisymmetric).
    """
    entries = v.entries if isinstance(v, VMatrix) else np.asarray(v, dtype=float)
    return phi1(-entries).T


def _d_vector(basis: SubgroupBasis, D: DProvider) -> tuple:
    get = _CachedD(D)
    return np.array([get(s) for s in basis.elements]), get.values


def subgroup_gradient(basis: SubgroupBasis, a: Mapping, D: DProvider,
                      parameters: Sequence = None) -> GradientReport:
    """Matrix method: full gradient ``B @ D`` over the subgroup, restricted to ``parameters``.

    ``parameters`` defaults to the keys of ``a`` in their given order.
    """
    t0 = time.perf_counter()
    params = [as_label(s) for s in (parameters if parameters is not None else a.keys())]
    for s in params:
        if s not in basis.index:
            raise ContractError(f"parameter {s} is outside the subgroup")
    v = build_V(basis, a)
    b = b_matrix(v)
    dvec, used = _d_vector(basis, D)
    full = b @ dvec
    grad = np.array([full[basis.index[s]] for s in params])
    return GradientReport(
        method="subgroup",
        labels=params,
        gradient=grad,
        d_values=used,
        diagnostics={
            "subgroup_size": basis.size,
            "subgroup_rank": basis.rank,
            "hadamard_tests": basis.size,
            "wall_time": time.perf_counter() - t0,
        },
    )


def series_terms(A: PauliSum, r, K: int, D: DProvider) -> np.ndarray:
    """Individual terms ``k = 0..K`` of the expansion of ``dL/da_r``.

    The k-th nested adjoint is propagated as a sparse PauliSum, so only labels
    that actually appear are requested from ``D``.
    """
    if K < 0:
        raise ValueError("K must be non-negative")
    get = D if isinstance(D, _CachedD) else _CachedD(D)
    w = PauliSum.from_label(as_label(r))
    coeff = 1.0
    terms = np.zeros(K + 1)
    for k in range(K + 1):
        if k:
            coeff *= -1.0 / (k + 1)
            w = apply_ad(A, w)
        if not len(w):
            break
        terms[k] = coeff * sum(c * get(t) for t, c in w)
    return terms


def series_partial(A: PauliSum, r, K: int, D: DProvider) -> float:
    """Partial sum ``k <= K`` of the Hadamard-test expansion of ``dL/da_r``."""
    return float(series_terms(A, r, K, D).sum())


def truncation_bound(K: int, p: int, o_norm: float) -> float:
    """``exp(-K log(K / (e pi p ||O||)))``; infinite where the log argument is <= 1."""
    if K < 1:
        return math.inf
    ratio = K / (math.e * math.pi * p * o_norm)
    if ratio <= 1:
        return math.inf
    return math.exp(-K * math.log(ratio))


def truncated_gradient(A: PauliSum, r, K: int, D: DProvider, p: int = None,
                       o_norm: float = 1.0):
    """``(value, bound)``: the K-term truncation and its stated error bound."""
    if K < 1:
        raise ValueError("K must be at least 1")
    p = len(A) if p is None else p
    return series_partial(A, r, K, D), truncation_bound(K, p, o_norm)


class _XCache:
    """``X(k)`` values of the randomized series, computed on demand."""

    def __init__(self, A: PauliSum, r: PauliLabel, D: _CachedD):
        self.A = A
        self.D = D
        self._w = PauliSum.from_label(r)
        self._values = []

    def __call__(self, k: int) -> float:
        while len(self._values) <= k:
            j = len(self._values)
            if j:
                self._w = apply_ad(self.A, self._w) * 0.5
            s = sum(c * self.D(t) for t, c in self._w)
            self._values.append(0.5 * (-1) ** j * s)
        return self._values[k]


def poisson_gradient(A: PauliSum, r, D: DProvider, samples: int,
                     rng: np.random.Generator):
    """Unbiased randomized estimate of ``dL/da_r`` with ``K ~ Poisson(2)``.

    Each draw contributes ``e^2 * 2/(K+1) * X(K)`` where
    ``X(k) = (-1)^k / 2 * 2^-k * sum_t [C^k(sigma^r)]_t D_t``; the factor
    ``2/(K+1)`` makes the expectation equal the full series.
    Returns ``(estimate, standard_error)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    get = D if isinstance(D, _CachedD) else _CachedD(D)
    x = _XCache(A, as_label(r), get)
    ks = rng.poisson(2.0, size=samples)
    per_k = {int(k): math.e ** 2 * 2.0 / (k + 1) * x(int(k)) for k in np.unique(ks)}
    vals = np.array([per_k[int(k)] for k in ks])
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return float(vals.mean()), stderr


def short_term_threshold(p: int, epsilon: float) -> float:
    """Largest ``max |a_s|`` for which ``dL/da_s ~ D_s`` within ``epsilon``."""
    return epsilon / (p * (1 + 2 * epsilon))


def short_term_gradient(D: DProvider, labels: Sequence, a: Mapping = None,
                        epsilon: float = 1e-3) -> GradientReport:
    """Zeroth-order approximation ``dL/da_s ~ D_s``.

    The smallness condition is not enforced; it is recorded in the report.
    """
    get = _CachedD(D)
    labels = [as_label(s) for s in labels]
    grad = np.array([get(s) for s in labels])
    p = len(labels)
    diag = {"epsilon": epsilon, "threshold": short_term_threshold(p, epsilon)}
    if a is not None:
        max_abs = max((abs(float(v)) for v in a.values()), default=0.0)
        diag["max_abs_coefficient"] = max_abs
        diag["condition_held"] = max_abs <= diag["threshold"]
    return GradientReport("short-term", labels, grad, get.values, diag)


def series_gradient(A: PauliSum, labels: Sequence, K: int, D: DProvider,
                    method="series", o_norm: float = 1.0) -> GradientReport:
    """``series_partial`` for each parameter, bundled as a report."""
    get = _CachedD(D)
    labels = [as_label(s) for s in labels]
    grad = np.array([series_partial(A, s, K, get) for s in labels])
    diag = {"K": K}
    if method == "truncated":
        diag["epsilon_K"] = truncation_bound(K, len(labels), o_norm)
        diag["o_norm"] = o_norm
    return GradientReport(method, labels, grad, get.values, diag)
