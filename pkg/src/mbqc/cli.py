"""Command-line entry point.

Subcommands: graph-state, run-pattern, branches, compile, partition,
slice, percolation.  Exit codes: 0 success, 2 validation error (including
usage), 3 capacity exceeded, 4 verification failure.

``--json-out`` writes a deterministic report (same argv + same seed give
byte-identical files; wall time appears only on stdout).  ``--cap``
overrides the statevector qubit cap, defaulting to the ``MBQC_CAP``
environment variable when set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

from .errors import (CapacityError, ContradictionError, MbqcError,
                     ValidationError, VerificationError)
from . import __version__
from .graphs import Graph, LatticeSpec, build_lattice, spanning_probability
from .engine import MeasurementPattern, enumerate_branches, run_pattern, validate_pattern
from .statevector import DEFAULT_CAP
from .tableau import Tableau, graph_state_tableau

SCHEMA_VERSION = 1

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_CAPACITY = 3
_EXIT_VERIFICATION = 4


class _CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".mbqc-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_forced(text: str | None) -> dict[int, int]:
    forced: dict[int, int] = {}
    if not text:
        return forced
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            site, bit = item.split("=")
            forced[int(site)] = int(bit) & 1
        except ValueError as exc:
            raise ValidationError(
                f"bad --force-outcomes entry {item!r} (want site=bit)") from exc
    return forced


def _report(args, result: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION,
            "command": args._argv,
            "seed": getattr(args, "seed", None),
            "backend": getattr(args, "backend", None),
            "result": result}


def _emit(args, result: dict, wall_ms: float) -> None:
    report = _report(args, result)
    if args.json_out:
        _atomic_write(args.json_out,
                      json.dumps(report, sort_keys=True, indent=2) + "\n")
    print(json.dumps({**report, "wall_time_ms": round(wall_ms, 3)},
                     sort_keys=True, indent=2))


def _resolve_cap(args) -> int:
    if args.cap is not None:
        return args.cap
    env = os.environ.get("MBQC_CAP")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValidationError(f"MBQC_CAP={env!r} is not an integer") from exc
    return DEFAULT_CAP


def _backend_name(short: str) -> str:
    return {"sv": "statevector", "stab": "stabilizer"}[short]


# -- subcommand bodies --------------------------------------------------------

def _cmd_graph_state(args) -> dict:
    if args.lattice:
        spec = LatticeSpec.from_json_dict(_load_json(args.lattice))
        graph = build_lattice(spec)
    elif args.graph:
        graph = Graph.from_json_dict(_load_json(args.graph))
    else:
        raise ValidationError("graph-state needs --lattice or --graph")
    t = graph_state_tableau(graph)
    return {"graph": graph.to_json_dict(),
            "stabilizers": t.dump().split("\n") if graph.n_vertices else []}


def _cmd_run_pattern(args) -> dict:
    pattern = MeasurementPattern.from_json_dict(_load_json(args.pattern))
    issues = validate_pattern(pattern)
    if issues:
        raise ValidationError("; ".join(issues))
    rec = run_pattern(pattern, backend=_backend_name(args.backend),
                      randomness=args.seed, forced=_parse_forced(args.force_outcomes),
                      cap=_resolve_cap(args))
    out_state = rec.output_state
    state_repr = (out_state.dump().split("\n") if isinstance(out_state, Tableau)
                  else {"n": out_state.n})
    return {"outcomes": {str(k): v for k, v in sorted(rec.outcomes.items())},
            "frame": rec.frame.to_json_dict(),
            "probability": rec.probability,
            "output_sites": list(rec.output_sites),
            "output_state": state_repr}


def _cmd_branches(args) -> dict:
    pattern = MeasurementPattern.from_json_dict(_load_json(args.pattern))
    issues = validate_pattern(pattern)
    if issues:
        raise ValidationError("; ".join(issues))
    # for this subcommand --cap means the branch cap (the statevector cap
    # still comes from MBQC_CAP); --branch-cap is the explicit spelling
    branch_cap = args.branch_cap
    if branch_cap is None:
        branch_cap = args.cap if args.cap is not None else 1 << 16
    sv_cap = DEFAULT_CAP
    env = os.environ.get("MBQC_CAP")
    if env:
        sv_cap = int(env)
    branches = enumerate_branches(pattern, backend=_backend_name(args.backend),
                                  branch_cap=branch_cap, cap=sv_cap)
    psum = sum(b.probability for b in branches)
    return {"n_branches": len(branches),
            "probability_sum": psum,
            "branches": [{"outcomes": {str(k): v for k, v in sorted(b.outcomes.items())},
                          "probability": b.probability,
                          "frame": b.frame.to_json_dict()}
                         for b in branches]}


def _cmd_compile(args) -> dict:
    from .compiler import Circuit, compile_circuit
    circuit = Circuit.from_json_dict(_load_json(args.circuit))
    prog = compile_circuit(circuit)
    issues = validate_pattern(prog.pattern)
    if issues:
        raise VerificationError("compiled pattern invalid: " + "; ".join(issues))
    if args.out:
        _atomic_write(args.out, prog.pattern.to_json() + "\n")
    return {"n_sites": prog.pattern.resource.n_vertices,
            "grid": [prog.n_rows, prog.n_cols],
            "n_measured": len(prog.pattern.commands),
            "output_map": {str(k): v for k, v in sorted(prog.output_map.items())},
            "pattern_file": args.out}


def _cmd_partition(args) -> dict:
    import math
    from .statmech import (SpinModel, log_partition_function_bruteforce,
                           partition_function_overlap)
    model = SpinModel.from_json_dict(_load_json(args.model))
    if args.method == "brute":
        log_z = log_partition_function_bruteforce(model)
        z = math.exp(log_z)
    else:
        z = partition_function_overlap(model, cap=_resolve_cap(args))
        log_z = math.log(z)
    return {"method": args.method, "Z": z, "log_Z": log_z,
            "n_spins": model.graph.n_vertices,
            "n_interactions": model.graph.n_edges}


def _cmd_slice(args) -> dict:
    from .surface import (HoleSpec, SliceLayout, carve_holes, imposed_rank,
                          logical_operators, project_syndrome_layer,
                          verify_projection)
    layout = SliceLayout.from_json_dict(_load_json(args.layout))
    holes = (HoleSpec.from_json_dict(_load_json(args.holes))
             if args.holes else HoleSpec())
    plan = carve_holes(layout, holes)
    result = project_syndrome_layer(layout, randomness=args.seed, plan=plan,
                                    forced=_parse_forced(args.force_outcomes))
    out: dict = {"layout": layout.to_json_dict(),
                 "holes": holes.to_json_dict(),
                 "n_cluster_qubits": layout.n_cluster,
                 "n_code_qubits": layout.n_code,
                 "outcomes": {str(k): v for k, v in sorted(result.outcomes.items())},
                 "imposed_rank": imposed_rank(layout, plan)}
    if holes.electric:
        zb, xb = logical_operators(layout, holes, "electric")
        out["electric_logicals"] = {"Z": zb.to_text(), "X": xb.to_text()}
    if holes.magnetic:
        zb, xb = logical_operators(layout, holes, "magnetic")
        out["magnetic_logicals"] = {"Z": zb.to_text(), "X": xb.to_text()}
    if args.verify:
        report = verify_projection(result)
        out["verification"] = report
        if not report["passed"]:
            raise VerificationError(
                f"{len(report['failures'])} stabilizer checks failed")
    return out


def _cmd_percolation(args) -> dict:
    if not (0.0 <= args.rate <= 1.0):
        raise ValidationError("defect rate must lie in [0, 1]")
    spec = LatticeSpec("grid2d", [args.rows, args.cols])
    seeds = [args.seed + k for k in range(args.n_seeds)]
    frac = spanning_probability(spec, args.rate, seeds, axis=args.axis)
    return {"rows": args.rows, "cols": args.cols, "defect_rate": args.rate,
            "axis": args.axis, "n_seeds": args.n_seeds,
            "spanning_probability": frac}


# -- wiring --------------------------------------------------------------------

def _build_parser() -> _CliParser:
    parser = _CliParser(prog="mbqc",
                        description="measurement-based quantum computation simulator")
    parser.add_argument("--version", action="version", version=f"mbqc {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, backend=True):
        p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
        p.add_argument("--json-out", default=None, metavar="PATH",
                       help="write a deterministic JSON report here")
        p.add_argument("--cap", type=int, default=None,
                       help="statevector qubit cap (default: MBQC_CAP or 22)")
        if backend:
            p.add_argument("--backend", choices=("sv", "stab"), default="sv")

    p = sub.add_parser("graph-state", help="build a graph state and dump stabilizers")
    p.add_argument("--lattice", help="LatticeSpec JSON file")
    p.add_argument("--graph", help="Graph JSON file")
    common(p)
    p.set_defaults(func=_cmd_graph_state)

    p = sub.add_parser("run-pattern", help="execute one branch of a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--force-outcomes", default=None, metavar="SITE=BIT,...")
    common(p)
    p.set_defaults(func=_cmd_run_pattern)

    p = sub.add_parser("branches", help="enumerate every branch of a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--branch-cap", dest="branch_cap", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_branches)

    p = sub.add_parser("compile", help="compile a circuit to a pattern")
    p.add_argument("--circuit", required=True)
    p.add_argument("--out", default=None, help="write the pattern JSON here")
    common(p, backend=False)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("partition", help="spin-model partition function")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("overlap", "brute"), default="overlap")
    common(p, backend=False)
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("slice", help="project a cluster slice into a surface code")
    p.add_argument("--layout", required=True)
    p.add_argument("--holes", default=None)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--force-outcomes", default=None, metavar="SITE=BIT,...")
    common(p, backend=False)
    p.set_defaults(func=_cmd_slice)

    p = sub.add_parser("percolation", help="site-defect spanning statistics")
    p.add_argument("--rows", type=int, default=50)
    p.add_argument("--cols", type=int, default=50)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--n-seeds", type=int, default=200)
    p.add_argument("--axis", choices=("row", "column"), default="column")
    common(p, backend=False)
    p.set_defaults(func=_cmd_percolation)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = argv
        t0 = time.perf_counter()
        result = args.func(args)
        _emit(args, result, 1000.0 * (time.perf_counter() - t0))
        return _EXIT_OK
    except (ValidationError, ContradictionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return _EXIT_CAPACITY
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return _EXIT_VERIFICATION
    except MbqcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
