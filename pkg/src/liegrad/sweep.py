"""Truncation-error sweep: series gradient error against K on TFIM-style chains."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gradients import _CachedD, series_terms, subgroup_gradient
from .groups import generated_subgroup
from .pauli import PauliLabel, PauliSum
from .sim import StateSpec, evolve, hadamard_values, random_observable

CSV_HEADER = ("d", "K", "mean_error", "std_error", "trials")


def tfim_labels(d: int) -> list:
    """Open chain: ``Z_i Z_{i+1}`` for ``i < d-1`` followed by ``X_i``."""
    labels = []
    for i in range(d - 1):
        word = [0] * d
        word[i] = word[i + 1] = 3
        labels.append(PauliLabel(tuple(word)))
    for i in range(d):
        word = [0] * d
        word[i] = 1
        labels.append(PauliLabel(tuple(word)))
    return labels


@dataclass(frozen=True)
class SweepRow:
    d: int
    K: int
    mean_error: float
    std_error: float
    trials: int

    def as_tuple(self) -> tuple:
        return (self.d, self.K, self.mean_error, self.std_error, self.trials)


def trial_errors(d: int, K_max: int, rng: np.random.Generator, state: str = None) -> dict:
    """Gradient error norm for ``K = 0..K_max`` on one random instance.

    The reference is the subgroup matrix method on the generated subgroup,
    which is exact for any coefficients.
    """
    labels = tfim_labels(d)
    a = rng.uniform(-1.0, 1.0, size=len(labels))
    o = random_observable(d, rng)
    rho = StateSpec("basis", state or "0" * d).density()
    A = PauliSum(dict(zip(labels, a)), d)
    rho_out = evolve(A, rho)
    basis = generated_subgroup(labels)
    D = hadamard_values(o, rho_out, basis.elements)
    full_a = {s: 0.0 for s in basis.elements}
    full_a.update(zip(labels, a))
    exact = subgroup_gradient(basis, full_a, D, parameters=labels).gradient
    get = _CachedD(D)
    partial = np.array([np.cumsum(series_terms(A, s, K_max, get)) for s in labels])
    errors = np.linalg.norm(partial - exact[:, None], axis=0)
    return {"errors": errors, "l1": float(np.abs(a).sum())}


def truncation_sweep(ds: Sequence[int], K_values: Sequence[int], trials: int,
                     seed: int) -> tuple:
    """Rows of mean/std error per ``(d, K)`` plus the largest ``sum |a|`` per d.

    Each ``(d, trial)`` pair has its own stream derived from ``seed`` so the
    rows for one d do not depend on which other d values are requested.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    K_values = sorted(set(int(k) for k in K_values))
    if not K_values or K_values[0] < 0:
        raise ValueError("K values must be non-negative")
    rows, l1 = [], {}
    for d in ds:
        errs, norms = [], []
        for t in range(trials):
            out = trial_errors(d, K_values[-1], np.random.default_rng([seed, d, t]))
            errs.append(out["errors"][K_values])
            norms.append(out["l1"])
        errs = np.array(errs)
        l1[d] = max(norms)
        for j, K in enumerate(K_values):
            rows.append(SweepRow(d, K, float(errs[:, j].mean()),
                                 float(errs[:, j].std()), trials))
    return rows, l1


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.d, r.K, repr(r.mean_error), repr(r.std_error), r.trials])
    return buf.getvalue()


def parse_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    return [SweepRow(int(d), int(k), float(m), float(s), int(t)) for d, k, m, s, t in reader]
