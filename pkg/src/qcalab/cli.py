"""
Command-line front end.

Exit codes: 0 success, 2 parse or validation error, 3 resource cap exceeded,
4 internal anomaly (a structural expectation failed numerically).
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

import numpy as np

from . import classify, heisenberg, qca
from .config import SCATTERING, load_config
from .errors import AnomalyError, ConfigError, ProblemTooLarge, SupportCapExceeded

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_ANOMALY = 4

MAX_STATE_DIM = 1 << 22
OBSERVABLES = {
    "occupancy": qca.cell_occupancy,
    "population": qca.cell_population,
}


def _emit(doc: dict, as_json: bool, lines: list, out):
    if as_json:
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        out.write("\n".join(lines) + "\n")


def _fmt_set(values) -> str:
    return "{" + ", ".join(f"{v:+d}" if v else "0" for v in values) + "}"


def cmd_neighborhood(args, out) -> int:
    config = load_config(args.config)
    circuit = config.circuit(args.cells)
    nb = heisenberg.minimal_neighborhood(circuit, cap=args.cap, tol=args.tol)
    within = heisenberg.supports_within(circuit, nb.forward, cap=args.cap, tol=args.tol)
    doc = {
        "n_cells": circuit.lattice.n_cells,
        "forward": nb.sorted_forward(),
        "backward": nb.sorted_backward(),
        "structurally_reversible": nb.reversible and within,
    }
    lines = [
        f"lattice cells: {doc['n_cells']}",
        f"forward neighborhood:  {_fmt_set(doc['forward'])}",
        f"backward neighborhood: {_fmt_set(doc['backward'])}",
        f"structural reversibility: {'ok' if doc['structurally_reversible'] else 'FAILED'}",
    ]
    _emit(doc, args.json, lines, out)
    if not doc["structurally_reversible"]:
        raise AnomalyError("backward neighborhood is not the reflection of the forward one")
    return EXIT_OK


def _classify_row(r: dict) -> str:
    dims = "-" if r["d_dims"] is None else "{" + ", ".join(f"{k}: {v}" for k, v in r["d_dims"].items()) + "}"
    span = "-" if r["product_span_dim"] is None else str(r["product_span_dim"])
    shift = "(" + ",".join(f"{c:+d}" if c else "0" for c in r["shift"]) + ")"
    return (
        f"{shift:<10} {r['m']:>2}  {_fmt_set(r['neighborhood']):<22} {r['cell_dim']:>5}"
        f"  {'yes' if r['factorization_pretest'] else 'no':<7} {dims:<28} {span:>5} / {r['cell_alg_dim']:<6} {r['verdict']}"
    )


def cmd_classify(args, out) -> int:
    config = load_config(args.config)
    circuit = config.circuit()
    result = classify.scan_constructions(
        circuit, max_m=args.max_m, tol=args.tol, cap=args.cap, extra=config.constructions
    )
    rows = [r.to_dict() for r in result.reports]
    doc = {
        "max_m": args.max_m,
        "any_qlga": result.any_qlga,
        "summary": result.summary,
        "constructions": rows,
    }
    header = f"{'shift':<10} {'m':>2}  {'neighborhood':<22} {'cell':>5}  {'pretest':<7} {'dims D':<28} {'span / full':>14} verdict"
    lines = [header] + [_classify_row(r) for r in rows]
    for label, msg in result.anomalies:
        lines.append(f"anomaly [{label}]: {msg}")
    lines.append(result.summary)
    _emit(doc, args.json, lines, out)
    return EXIT_ANOMALY if result.anomalies else EXIT_OK


def _initial_state(initial: str, lattice) -> qca.StateVector:
    if initial == "single-excitation":
        return qca.StateVector.single_excitation(lattice)
    digits = re.sub(r"[\s|,_]", "", initial)
    if not digits.isdigit():
        raise ConfigError(f"initial state must be digits or 'single-excitation', got {initial!r}", field="--initial")
    try:
        return qca.StateVector.basis(lattice, digits)
    except ValueError as exc:
        raise ConfigError(str(exc), field="--initial") from None


def cmd_simulate(args, out) -> int:
    if args.steps < 0:
        raise ConfigError("must be >= 0", field="--steps")
    config = load_config(args.config)
    circuit = config.circuit(args.cells)
    lattice = circuit.lattice
    if lattice.dim > MAX_STATE_DIM:
        raise ProblemTooLarge(f"state dimension {lattice.dim} exceeds the cap {MAX_STATE_DIM}")
    observable = OBSERVABLES[args.observable]
    state = _initial_state(args.initial, lattice)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["step"] + [f"cell_{x}" for x in range(lattice.n_cells)])
    for step in range(args.steps + 1):
        if step:
            state = qca.apply_circuit(state, circuit)
        writer.writerow([step] + [f"{v:.12g}" for v in np.clip(observable(state), 0.0, None)])
    return EXIT_OK


def _bipartition(dims):
    if len(dims) == 1:
        raise ConfigError("a single-subcell cell has no bipartition", field="subcell_dims")
    first = dims[0]
    rest = int(np.prod(dims[1:]))
    return first, rest


def cmd_property(args, out) -> int:
    config = load_config(args.config)
    matrices = config.scattering_matrices()
    if not matrices:
        raise ConfigError("no scattering layer to check", field="layers")
    dims = _bipartition(config.subcell_dims)
    docs, lines = [], []
    layer_index = [i for i, layer in enumerate(config.layers) if layer.kind == SCATTERING]
    for i, s in zip(layer_index, matrices):
        rep = classify.product_property_check(s, trials=args.trials, seed=args.seed, dims=dims, tol=args.tol)
        d = {"layer": i, "dims": list(dims), **rep.to_dict()}
        docs.append(d)
        lines += [
            f"layer {i}: scattering on {dims[0]} x {dims[1]}",
            f"  trials {d['trials']} seed {d['seed']}: rank-1 hits {d['rank1_hits']}",
            f"  rank histogram, I (x) A: {rep.histogram_right}",
            f"  rank histogram, A (x) I: {rep.histogram_left}",
            f"  A = I: rank {d['identity_rank']}",
            f"  A = diag(1, 0,...): rank {d['projector_rank_right']} (I (x) A), {d['projector_rank_left']} (A (x) I)",
        ]
    _emit({"layers": docs}, args.json, lines, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcalab", description="One-dimensional QCA toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="circuit definition file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--tol", type=float, default=classify.DEFAULT_TOL)
        p.add_argument("--cap", type=int, default=heisenberg.DEFAULT_SITE_CAP, help="support cap in sites")

    p = sub.add_parser("neighborhood", help="minimal neighborhood and structural reversibility")
    common(p)
    p.add_argument("--cells", type=int, default=None, help="lattice cells (default from the file)")
    p.set_defaults(func=cmd_neighborhood)

    p = sub.add_parser("classify", help="scan cell constructions with the QLGA criterion")
    common(p)
    p.add_argument("--max-m", type=int, default=2, help="largest cell grouping")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="per-cell observable profile over time, as CSV")
    p.add_argument("config", help="circuit definition file")
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--initial", default="single-excitation", help="site digits in canonical order, or 'single-excitation'")
    p.add_argument("--observable", choices=sorted(OBSERVABLES), default="occupancy")
    p.add_argument("--cells", type=int, default=None, help="lattice cells (default from the file)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("property", help="product-preservation check of the scattering matrices")
    common(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_property)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args, out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ProblemTooLarge, SupportCapExceeded) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except AnomalyError as exc:
        print(f"anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY


if __name__ == "__main__":
    sys.exit(main())
