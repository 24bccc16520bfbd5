"""Command-line front end: ``liegrad grad|analyze|sweep``.

Exit codes: 0 success, 2 parse error, 3 structural error (subgroup or DLA
blow-up), 4 numerical or contract error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import sweep as sweep_mod
from .dla import build_dla, dla_gradient
from .errors import LiegradError, ParseError, StructuralError
from .gradients import (GradientReport, _CachedD, poisson_gradient, series_gradient,
                        short_term_gradient, subgroup_gradient)
from .groups import (compatibility_groups, generated_subgroup, index_complexity,
                     is_subgroup)
from .io import ResultDocument, parse_state, read_observable
from .pauli import PauliSum, parse_parameters
from .shadows import shadow_gradient
from .sim import evolve, exact_D, hadamard_values, random_observable

METHODS = ("subgroup", "dla", "truncated", "poisson", "shadow", "short-term", "series")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def _nonneg(text: str) -> int:
    val = int(text)
    if val < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return val


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liegrad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_obs=True):
        p.add_argument("--hamiltonian", required=True, help="PauliSum file, one parameter per line")
        if need_obs:
            obs = p.add_mutually_exclusive_group(required=True)
            obs.add_argument("--observable", help="PauliSum or dense matrix file")
            obs.add_argument("--random-obs", type=int, metavar="SEED",
                             help="random Hermitian observable with tr(O^2) = 1")
            p.add_argument("--state", default=None,
                           help="bitstring, 'mixed', or state file (default all zeros)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=_positive, default=1)
        p.add_argument("-o", "--output", default=None, help="write the document here")
        p.add_argument("--no-timing", action="store_true",
                       help="omit wall-clock fields so reruns are byte-identical")

    g = sub.add_parser("grad", help="estimate the gradient")
    common(g)
    g.add_argument("--method", choices=METHODS, default="subgroup")
    g.add_argument("--K", type=_nonneg, default=None, help="series truncation order")
    g.add_argument("--samples", type=_positive, default=10000, help="Poisson samples")
    g.add_argument("--shadow-n", type=_positive, default=200, help="shadows per group")
    g.add_argument("--shadow-groups", type=_positive, default=9, help="median-of-means groups")
    g.add_argument("--shadow-shots", type=_positive, default=None,
                   help="second-stage shots per record (default: exact)")
    g.add_argument("--epsilon", type=float, default=1e-3, help="short-term tolerance")
    g.add_argument("--max-subgroup", type=_positive, default=4096)

    a = sub.add_parser("analyze", help="structural analysis of the parameter set")
    common(a, need_obs=False)
    a.add_argument("--max-subgroup", type=_positive, default=4096)
    a.add_argument("--max-dla", type=_positive, default=512)

    s = sub.add_parser("sweep", help="truncation error against K (CSV)")
    s.add_argument("--d", type=_int_list, default=[3, 4, 5])
    s.add_argument("--K-min", type=_nonneg, default=0)
    s.add_argument("--K-max", type=_nonneg, default=40)
    s.add_argument("--trials", type=_positive, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", default=None)
    return parser


def _read_hamiltonian(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_parameters(text)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("output", "no_timing")}


def _subgroup_basis(labels, coeffs, max_size):
    a = dict(zip(labels, coeffs))
    if is_subgroup(labels):
        return generated_subgroup(labels, max_size), a, False
    _warn("parameter set is not a subgroup; using the generated subgroup")
    basis = generated_subgroup(labels, max_size)
    full = {s: 0.0 for s in basis.elements}
    full.update(a)
    return basis, full, True


def cmd_grad(args) -> ResultDocument:
    t0 = time.perf_counter()
    labels, coeffs = _read_hamiltonian(args.hamiltonian)
    d = labels[0].n_qubits
    if args.observable is not None:
        o = read_observable(args.observable, d)
    else:
        o = random_observable(d, np.random.default_rng(args.random_obs))
    if o.shape != (2 ** d, 2 ** d):
        raise ParseError(f"observable acts on the wrong number of qubits for d={d}")
    rho = parse_state(args.state or "0" * d, d).density()
    A = PauliSum(dict(zip(labels, coeffs)), d)
    rng = np.random.default_rng(args.seed)
    method = args.method
    analysis = {}
    rho_out = evolve(A, rho)

    def lazy_D(s):
        return exact_D(o, s, rho_out)

    if method == "subgroup":
        basis, a, expanded = _subgroup_basis(labels, coeffs, args.max_subgroup)
        D = hadamard_values(o, rho_out, basis.elements)
        report = subgroup_gradient(basis, a, D, parameters=labels)
        analysis["subgroup_fallback"] = expanded
    elif method == "dla":
        gens = [PauliSum.from_label(s) for s in labels]
        report = dla_gradient(o, rho, gens, coeffs)
        report.labels = labels
    elif method in ("truncated", "series"):
        K = 20 if args.K is None else args.K
        o_norm = float(np.linalg.norm(o, 2))
        report = series_gradient(A, labels, K, lazy_D, method=method, o_norm=o_norm)
    elif method == "poisson":
        get = _CachedD(lazy_D)
        vals, errs = [], []
        for s in labels:
            v, e = poisson_gradient(A, s, get, args.samples, rng)
            vals.append(v)
            errs.append(e)
        report = GradientReport("poisson", labels, vals, get.values,
                                {"samples": args.samples, "stderr": errs})
    elif method == "short-term":
        report = short_term_gradient(lazy_D, labels, dict(zip(labels, coeffs)), args.epsilon)
    elif method == "shadow":
        basis, a, expanded = _subgroup_basis(labels, coeffs, args.max_subgroup)
        report = shadow_gradient(o, rho, basis, a, args.shadow_n, args.shadow_groups, rng,
                                 shots=args.shadow_shots, workers=args.workers,
                                 parameters=labels)
        analysis["subgroup_fallback"] = expanded
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(method)

    report_dict = report.as_dict()
    wall = report_dict["diagnostics"].pop("wall_time", None)
    timing = {} if args.no_timing else {
        "method_seconds": wall, "total_seconds": time.perf_counter() - t0}
    return ResultDocument("grad", _config(args), report_dict, analysis, timing)


def analyze(labels, max_subgroup=4096, max_dla=512) -> dict:
    out = {"n_parameters": len(labels), "n_qubits": labels[0].n_qubits,
           "is_subgroup": is_subgroup(labels)}
    try:
        basis = generated_subgroup(labels, max_subgroup)
        out["subgroup"] = {"size": basis.size, "rank": basis.rank}
    except StructuralError as exc:
        out["subgroup"] = {"blowup": str(exc)}
    kappa, well = index_complexity(labels)
    out["kappa"] = kappa
    out["well_behaved"] = sorted(well)
    try:
        dla = build_dla([PauliSum.from_label(s) for s in labels], max_dim=max_dla)
        out["dla"] = {"dim": dla.dim, "generators": len(labels), "growth": dla.growth}
    except StructuralError as exc:
        out["dla"] = {"blowup": str(exc)}
    groups = compatibility_groups(labels)
    out["compatibility"] = {"m": len(groups), "groups": [[str(s) for s in g] for g in groups]}
    return out


def cmd_analyze(args) -> ResultDocument:
    t0 = time.perf_counter()
    labels, _ = _read_hamiltonian(args.hamiltonian)
    analysis = analyze(labels, args.max_subgroup, args.max_dla)
    timing = {} if args.no_timing else {"total_seconds": time.perf_counter() - t0}
    return ResultDocument("analyze", _config(args), None, analysis, timing)


def cmd_sweep(args) -> str:
    if args.K_max < args.K_min:
        raise ParseError("--K-max must be >= --K-min")
    rows, _ = sweep_mod.truncation_sweep(args.d, range(args.K_min, args.K_max + 1),
                                         args.trials, args.seed)
    return sweep_mod.rows_to_csv(rows)


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "grad":
            _emit(cmd_grad(args).to_json() + "\n", args.output)
        elif args.command == "analyze":
            _emit(cmd_analyze(args).to_json() + "\n", args.output)
        else:
            _emit(cmd_sweep(args), args.output)
    except LiegradError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
