"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input or format error,
3 solver did not converge. Errors are printed to stderr as one JSON line.

Reports go to stdout when the main artifact is written with ``-o``, and to
stderr when the artifact itself is streamed to stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import apply_circuit, circuit_unitary, count_gates, export_qasm
from .compress import (
    best_prune_node,
    partner_amplitudes,
    prune,
    pruned_state,
    schmidt_2q,
    single_flip_amplitudes,
    solve_generalized_schmidt,
)
from .errors import ConvergenceFailure, PsiTreeError
from .io import read_circuit, read_statevector
from .qft import dft_matrix, qft_circuit
from .state import fidelity, normalize
from .synth import is_separable, synth_pyramidal, synth_subtree
from .tree import build_tree, format_bloch_table

DEFAULT_TOLERANCE = 1e-9


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind, self.message = code, kind, message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(2, "UsageError", message)


def _dumps(obj) -> str:
    # json uses repr for floats, which round-trips every double exactly
    return json.dumps(obj)


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {text}")
    return v


def _node(text: str) -> tuple:
    try:
        level, pos = text.split(":")
        return int(level), int(pos)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LEVEL:POS, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psitree", description="State preparation through nested-entanglement trees.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="compile a statevector into a circuit")
    s.add_argument("input")
    s.add_argument("--backend", choices=("pyramidal", "subtree"), default="pyramidal")
    s.add_argument("--format", choices=("qasm", "json"), default=None)
    s.add_argument("-o", "--output")
    s.add_argument("--tolerance", type=_positive, default=DEFAULT_TOLERANCE)
    s.add_argument("--sparse", action="store_true", help="pyramidal: skip zero rotations and idle levels")
    s.add_argument("--literal-x", action="store_true", help="subtree: write up-controls as X sandwiches")

    v = sub.add_parser("verify", help="simulate a circuit against a statevector")
    v.add_argument("circuit")
    v.add_argument("state")
    v.add_argument("--tolerance", type=_positive, default=DEFAULT_TOLERANCE)

    sp = sub.add_parser("separability", help="product-state test")
    sp.add_argument("input")

    q = sub.add_parser("qft", help="emit the quantum Fourier transform circuit")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--format", choices=("qasm", "json"), default="qasm")
    q.add_argument("-o", "--output")
    q.add_argument("--check", action="store_true", help="report the max deviation from the DFT matrix")

    pr = sub.add_parser("prune", help="merge a node's nearly parallel child subtrees")
    pr.add_argument("input")
    pr.add_argument("--node", type=_node, help="LEVEL:POS (default: the node with the largest child overlap)")
    pr.add_argument("--tolerance", type=_positive, default=DEFAULT_TOLERANCE, help="bound on 1 - |kappa|")
    pr.add_argument("-o", "--output", help="write the pruned tree JSON here")

    sc = sub.add_parser("schmidt", help="generalized Schmidt form of a small state")
    sc.add_argument("input")
    sc.add_argument("--tolerance", type=_positive, default=1e-8, help="residual bound")
    sc.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("tree", help="build the tree of a statevector")
    t.add_argument("input")
    t.add_argument("--dump", action="store_true", help="print the per-node Bloch table")
    t.add_argument("-o", "--output")
    return p


def _emit(args, artifact: str, report: dict, out, err) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(artifact)
        out.write(_dumps(report) + "\n")
    else:
        out.write(artifact)
        err.write(_dumps(report) + "\n")


def _load_state(path):
    return normalize(read_statevector(path))


def _cmd_synth(args, out, err) -> int:
    fmt = args.format or ("json" if args.backend == "subtree" else "qasm")
    if args.backend == "subtree" and fmt == "qasm":
        raise CliError(2, "UsageError", "the subtree back-end emits multi-controlled gates; use --format json")
    state = _load_state(args.input)
    tree = build_tree(state)
    if args.backend == "pyramidal":
        circ = synth_pyramidal(tree, sparse=args.sparse)
    else:
        circ = synth_subtree(tree, literal_x=args.literal_x)
    fid = fidelity(apply_circuit(circ), state).fidelity
    counts = count_gates(circ)
    report = {
        "backend": args.backend,
        "n": state.n,
        "fidelity": fid,
        "cnot": counts.cnot,
        "controlled": counts.controlled_total,
        "single_qubit": counts.single_qubit,
        "gates": len(circ),
    }
    if fid < 1 - args.tolerance:
        raise CliError(1, "VerificationFailed", f"fidelity {fid!r} below 1 - {args.tolerance!r}")
    artifact = export_qasm(circ) if fmt == "qasm" else circ.to_json() + "\n"
    _emit(args, artifact, report, out, err)
    return 0


def _cmd_verify(args, out, err) -> int:
    circ = read_circuit(args.circuit)
    state = read_statevector(args.state)
    rep = fidelity(apply_circuit(circ), state)
    out.write(
        _dumps(
            {
                "overlap": [rep.overlap.real, rep.overlap.imag],
                "fidelity": rep.fidelity,
                "global_phase": rep.global_phase,
            }
        )
        + "\n"
    )
    if rep.fidelity < 1 - args.tolerance:
        raise CliError(1, "VerificationFailed", f"fidelity {rep.fidelity!r} below 1 - {args.tolerance!r}")
    return 0


def _cmd_separability(args, out, err) -> int:
    verdict = is_separable(build_tree(_load_state(args.input)))
    out.write(_dumps(verdict.to_dict()) + "\n")
    return 0


def _cmd_qft(args, out, err) -> int:
    circ = qft_circuit(args.n)
    artifact = export_qasm(circ) if args.format == "qasm" else circ.to_json() + "\n"
    report = {"n": args.n, "gates": len(circ)}
    if args.check:
        dev = float(np.abs(circuit_unitary(circ) - dft_matrix(args.n)).max())
        report["max_deviation"] = dev
    _emit(args, artifact, report, out, err)
    return 0


def _cmd_prune(args, out, err) -> int:
    state = _load_state(args.input)
    tree = build_tree(state)
    node = args.node or best_prune_node(tree)
    if node is None:
        raise CliError(2, "NoCandidate", "no live node with two live children")
    pruned, analysis = prune(tree, node, args.tolerance)
    report = analysis.to_dict()
    report["measured_fidelity"] = fidelity(pruned_state(pruned, analysis), state).fidelity
    report["rotation"] = json.loads(analysis.rotation.to_json())
    if args.output:
        Path(args.output).write_text(pruned.to_json() + "\n")
    else:
        report["tree"] = pruned.to_dict()
    out.write(_dumps(report) + "\n")
    return 0


def _cmd_schmidt(args, out, err) -> int:
    state = _load_state(args.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        transform, hat = solve_generalized_schmidt(state, residual_tol=args.tolerance, seed=args.seed)
    flips = single_flip_amplitudes(hat.amplitudes)
    # for two qubits the partners are the single flips themselves; |11> is fixed instead
    partners = hat.amplitudes[[3]] if state.n == 2 else partner_amplitudes(hat.amplitudes)
    report = {
        "m": state.n,
        "transform": transform.to_dict(),
        "residual": float(np.linalg.norm(flips)),
        "single_flip_max": float(np.abs(flips).max()),
        "reference_phase": float(np.angle(hat.amplitudes[0])),
        "partner_phases": [float(a) for a in np.angle(partners)],
        "warnings": [str(w.message) for w in caught],
    }
    if state.n == 2:
        theta, local, _ = schmidt_2q(state)
        report["two_qubit"] = {"theta": theta, "transform": local.to_dict()}
    out.write(_dumps(report) + "\n")
    return 0


def _cmd_tree(args, out, err) -> int:
    tree = build_tree(_load_state(args.input))
    artifact = format_bloch_table(tree) if args.dump else tree.to_json() + "\n"
    if args.output:
        Path(args.output).write_text(artifact)
    else:
        out.write(artifact)
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "verify": _cmd_verify,
    "separability": _cmd_separability,
    "qft": _cmd_qft,
    "prune": _cmd_prune,
    "schmidt": _cmd_schmidt,
    "tree": _cmd_tree,
}


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, out, err)
    except CliError as exc:
        code, kind, msg = exc.code, exc.kind, exc.message
    except ConvergenceFailure as exc:
        code, kind, msg = 3, "ConvergenceFailure", f"{exc} (best residual {exc.best_residual!r})"
    except (PsiTreeError, OSError, ValueError) as exc:
        code, kind, msg = 2, type(exc).__name__, str(exc)
    err.write(_dumps({"error": kind, "message": msg, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))
