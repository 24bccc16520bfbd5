"""Subgroup structure of parameter sets S inside K4^d.

The Klein product of labels is XOR on the 2d-bit encodings, so the generated
subgroup is a GF(2) span and everything here is bit arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimensionMismatch, StructuralError, SubgroupBlowup
from .pauli import PauliLabel, as_label, commutes

DEFAULT_MAX_SIZE = 4096


def _labels(S: Iterable) -> list:
    labels = [as_label(s) for s in S]
    if not labels:
        raise ValueError("parameter set must be nonempty")
    d = labels[0].n_qubits
    for s in labels:
        if s.n_qubits != d:
            raise DimensionMismatch(f"mixed label lengths: {labels[0]} and {s}")
    return labels


def _vec(s: PauliLabel) -> int:
    return (s.x << s.n_qubits) | s.z


def _from_vec(v: int, d: int) -> PauliLabel:
    return PauliLabel.from_masks(v >> d, v & ((1 << d) - 1), d)


def canonical_order(S: Iterable) -> list:
    return sorted(set(as_label(s) for s in S), key=PauliLabel.sort_key)


def is_subgroup(S: Iterable) -> bool:
    """True iff ``S`` together with the identity is closed under the Klein product."""
    labels = _labels(S)
    vecs = {_vec(s) for s in labels} | {0}
    return all((u ^ v) in vecs for u in vecs for v in vecs)


def gf2_basis(vectors: Iterable[int]) -> list:
    """Row-reduced basis (pivot on highest bit) of the span of integer bit-vectors."""
    pivots: dict = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
    # full reduction so the basis is canonical
    for top in sorted(pivots):
        for other in list(pivots):
            if other != top and (pivots[other] >> top) & 1:
                pivots[other] ^= pivots[top]
    return [pivots[k] for k in sorted(pivots, reverse=True)]


@dataclass(frozen=True)
class SubgroupBasis:
    """Non-identity elements of a subgroup of K4^d in canonical order.

    ``index`` maps each element to its row/column in the V matrix.
    """

    n_qubits: int
    generators: tuple
    elements: tuple
    index: dict = field(repr=False, compare=False)

    def __post_init__(self):
        members = {_vec(e) for e in self.elements}
        if len(members) != len(self.elements) or 0 in members:
            raise StructuralError("subgroup elements must be distinct and non-identity")
        if len(self.elements) != 2 ** len(self.generators) - 1:
            raise StructuralError("element count does not match 2^rank - 1")
        members.add(0)
        for e in self.elements:
            for g in self.generators:
                if _vec(e) ^ _vec(g) not in members:
                    raise StructuralError(f"subgroup not closed: {e} o {g}")

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, label):
        return as_label(label) in self.index


def generated_subgroup(S: Iterable, max_size: int = DEFAULT_MAX_SIZE) -> SubgroupBasis:
    """The smallest subgroup containing ``S`` (identity excluded from the listing)."""
    labels = _labels(S)
    d = labels[0].n_qubits
    basis = gf2_basis(_vec(s) for s in labels)
    rank = len(basis)
    if 2 ** rank - 1 > max_size:
        raise SubgroupBlowup(rank, max_size)
    span = [0]
    for b in basis:
        span += [v ^ b for v in span]
    elements = sorted((_from_vec(v, d) for v in span if v), key=PauliLabel.sort_key)
    return SubgroupBasis(
        n_qubits=d,
        generators=tuple(_from_vec(b, d) for b in basis),
        elements=tuple(elements),
        index={e: i for i, e in enumerate(elements)},
    )


def index_complexity(S: Iterable):
    """Index complexity ``kappa`` and the set of well-behaved qubit positions.

    Position ``j`` is well behaved when at most one distinct non-identity
    symbol occurs there across ``S``.  Positions are 0-based.
    """
    labels = _labels(S)
    d = labels[0].n_qubits
    well_behaved = set()
    for j in range(d):
        symbols = {s.word[j] for s in labels} - {0}
        if len(symbols) <= 1:
            well_behaved.add(j)
    return d - len(well_behaved), well_behaved


@dataclass(frozen=True)
class CompatibilityPartition:
    groups: tuple

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)


def compatibility_groups(S: Sequence) -> CompatibilityPartition:
    """Greedy first-fit partition into pairwise-commuting groups.

    Labels are visited in canonical order, so the result is deterministic.
    """
    groups: list = []
    for s in canonical_order(_labels(S)):
        for g in groups:
            if all(commutes(s, t) for t in g):
                g.append(s)
                break
        else:
            groups.append([s])
    return CompatibilityPartition(tuple(tuple(g) for g in groups))
