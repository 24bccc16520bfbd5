"""Dynamical Lie algebra of a set of generators and the DLA gradient method."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, DLABlowup, DimensionMismatch, NumericalError
from .gradients import GradientReport, phi1
from .pauli import PauliSum, apply_ad
from .sim import as_matrix, check_density, evolve

RANK_TOL = 1e-9
DEFAULT_MAX_DIM = 512


class _Coords:
    """Dense coefficient matrix of an orthonormal family of PauliSums."""

    def __init__(self, elements: Sequence[PauliSum]):
        self.index: dict = {}
        for e in elements:
            for label, _ in e:
                self.index.setdefault(label, len(self.index))
        self.q = np.zeros((len(self.index), len(elements)))
        for j, e in enumerate(elements):
            for label, c in e:
                self.q[self.index[label], j] = c

    def coordinates(self, ps: PauliSum):
        """Coordinates of ``ps`` and the norm of its component outside the span."""
        outside = 0.0
        vec = np.zeros(self.q.shape[0])
        for label, c in ps:
            row = self.index.get(label)
            if row is None:
                outside += abs(c) ** 2
            else:
                vec[row] = c
        coords = self.q.T @ vec
        resid = vec - self.q @ coords
        return coords, float(np.sqrt(outside + resid @ resid))


@dataclass
class LieBasis:
    """Orthonormal basis (coefficient inner product) of a dynamical Lie algebra.

    ``growth`` records the dimension after each round of commutators.
    """

    n_qubits: int
    elements: list
    growth: list = field(default_factory=list)

    def __post_init__(self):
        self._coords = _Coords(self.elements)

    @property
    def dim(self) -> int:
        return len(self.elements)

    def coordinates(self, ps: PauliSum, tol=RANK_TOL) -> np.ndarray:
        if ps.n_qubits != self.n_qubits:
            raise DimensionMismatch("element acts on a different number of qubits")
        coords, resid = self._coords.coordinates(ps)
        if resid > tol * max(1.0, ps.norm()):
            raise ContractError(f"element lies outside the DLA span (residual {resid:.3g})")
        return coords

    def gram(self) -> np.ndarray:
        return self._coords.q.T @ self._coords.q


def _orthogonalize(v: PauliSum, basis: list) -> PauliSum:
    # two passes of modified Gram-Schmidt
    for _ in range(2):
        for e in basis:
            overlap = e.dot(v)
            if overlap != 0.0:
                v = v - e * overlap
    return v


def build_dla(generators: Sequence[PauliSum], max_dim: int = DEFAULT_MAX_DIM,
              tol: float = RANK_TOL) -> LieBasis:
    """Lie closure of ``generators`` by repeated commutation with the generators."""
    generators = list(generators)
    if not generators:
        raise ValueError("at least one generator is required")
    d = generators[0].n_qubits
    for g in generators:
        if g.n_qubits != d:
            raise DimensionMismatch("generators act on different numbers of qubits")
        if not g.is_real:
            raise ContractError("generators must have real Pauli coefficients")
        if not len(g):
            raise ContractError("zero generator")

    basis: list = []

    def _add(v: PauliSum) -> bool:
        v = _orthogonalize(v, basis)
        n = v.norm()
        if n <= tol:
            return False
        basis.append(v / n)
        if len(basis) > max_dim:
            raise DLABlowup(len(basis), max_dim)
        return True

    frontier = []
    for g in generators:
        if _add(g):
            frontier.append(basis[-1])
    growth = [len(basis)]
    while frontier:
        new = []
        for e in frontier:
            for g in generators:
                if _add(apply_ad(g, e)):
                    new.append(basis[-1])
        frontier = new
        if new:
            growth.append(len(basis))
    return LieBasis(d, basis, growth)


@dataclass(frozen=True)
class AdjointMatrix:
    basis: LieBasis
    entries: np.ndarray


def adjoint_matrix(A: PauliSum, basis: LieBasis, tol: float = RANK_TOL) -> AdjointMatrix:
    """Matrix of the real adjoint ``(1/i) ad_A`` in the DLA basis (column j: image of E_j)."""
    basis.coordinates(A, tol)
    t = np.zeros((basis.dim, basis.dim))
    for j, e in enumerate(basis.elements):
        t[:, j] = basis.coordinates(apply_ad(A, e), tol)
    if np.max(np.abs(t + t.T), initial=0.0) > 1e-10 * max(1.0, np.abs(t).max(initial=0.0)):
        raise NumericalError("adjoint matrix is not antisymmetric")
    return AdjointMatrix(basis, t)


def exact_R(o, E: PauliSum, rho_out: np.ndarray) -> float:
    """``i tr(O [E, rho_out])``; equals the Hadamard test when E is one Pauli word."""
    o = as_matrix(o)
    e = as_matrix(E)
    if o.shape != rho_out.shape or e.shape != o.shape:
        raise DimensionMismatch("observable, element and state sizes disagree")
    val = 1j * np.trace(o @ (e @ rho_out - rho_out @ e))
    return float(val.real)


def dla_gradient(o, rho: np.ndarray, generators: Sequence[PauliSum], a: Sequence[float],
                 basis: LieBasis = None, R: Sequence[float] = None) -> GradientReport:
    """Gradient with respect to the generator coefficients via the DLA matrix method.

    ``R`` overrides the exactly simulated values ``R_l = i tr(O [E_l, rho_out])``
    (e.g. with sampled estimates).
    """
    t0 = time.perf_counter()
    generators = list(generators)
    a = np.asarray(a, dtype=float)
    if len(a) != len(generators):
        raise DimensionMismatch("one coefficient per generator is required")
    if basis is None:
        basis = build_dla(generators)
    A = PauliSum.zero(basis.n_qubits)
    for c, g in zip(a, generators):
        A = A + g * c
    t = adjoint_matrix(A, basis).entries
    if R is None:
        check_density(np.asarray(rho))
        rho_out = evolve(A, rho)
        R = np.array([exact_R(o, e, rho_out) for e in basis.elements])
    else:
        R = np.asarray(R, dtype=float)
    bg = phi1(-t).T
    g_coords = np.array([basis.coordinates(g) for g in generators])
    grad = g_coords @ (bg @ R)
    return GradientReport(
        method="dla",
        labels=[_generator_name(g) for g in generators],
        gradient=grad,
        d_values={f"E{l}": float(v) for l, v in enumerate(R)},
        diagnostics={
            "dla_dim": basis.dim,
            "growth": list(basis.growth),
            "wall_time": time.perf_counter() - t0,
        },
    )


def _generator_name(g: PauliSum) -> str:
    if len(g) == 1:
        label, c = next(iter(g))
        return str(label) if c == 1.0 else f"{c!r}*{label}"
    return " + ".join(f"{c!r}*{label}" for label, c in g)
