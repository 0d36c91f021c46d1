"""Command-line front end: closed-form analysis and Monte Carlo experiment runs.

Subcommands
    analyze    print the closed-form operating point and cheat tables
    run        one honest execution on a 3-colorable graph, with transcripts
    soundness  cheating-prover acceptance rate vs the formula prediction
    hiding     curious-verifier identification rate vs the formula prediction

Every command accepts --json for a single machine-readable document on
stdout.  Exit codes: 0 success/accept, 2 input error, 3 precondition
violation (e.g. wrong colorability for the chosen experiment), 1 internal
error or a rejected honest run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Sequence

from . import analysis
from .graph import DimacsError, Graph, brute_force_3color, parse_dimacs
from .optics import ApparatusParams
from .protocol import (
    CheatingProver,
    HonestVerifier,
    ProtocolConfig,
    RejectReason,
    cheating_prover,
    curious_verifier,
    honest_prover,
    run_batch,
    run_protocol,
)
from .qbc import VerificationPolicy

__all__ = ["main"]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

_DEFAULT_TABLE_M = (1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 50, 100, 200)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {value}")
    return value


def _add_params_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("apparatus")
    group.add_argument("--phi", type=float, default=math.pi / 6.7, help="signal base angle (rad)")
    group.add_argument("--theta", type=float, default=math.pi / 10, help="signal spacing (rad)")
    group.add_argument("--mean-photons", type=float, default=20.0, help="signal energy")
    group.add_argument("--efficiency", type=float, default=1.0, help="detector efficiency")
    group.add_argument("--dark-rate", type=float, default=0.0, help="mean dark counts per detector per shot")


def _params_from(args: argparse.Namespace) -> ApparatusParams:
    return ApparatusParams(
        phi=args.phi,
        theta=args.theta,
        mean_photon=args.mean_photons,
        efficiency=args.efficiency,
        dark_rate=args.dark_rate,
    )


def _params_echo(params: ApparatusParams) -> dict:
    return {
        "phi": params.phi,
        "theta": params.theta,
        "mean_photon": params.mean_photon,
        "branch_weights": list(params.branch_weights),
        "efficiency": params.efficiency,
        "dark_rate": params.dark_rate,
    }


def _load_graph(path: str) -> Graph:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DimacsError(f"cannot read {path}: {exc}") from exc
    return parse_dimacs(text)


def _emit(report: dict, as_json: bool, lines: Sequence[str]) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    else:
        for line in lines:
            print(line)


def _stderr_of(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


# --------------------------------------------------------------------------
# analyze


def _cmd_analyze(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    params = _params_from(args)
    p_escape = args.escape
    m_values = [args.m] if args.m is not None else list(_DEFAULT_TABLE_M)

    p_identify = analysis.identification_probability(params)
    escape_matrix = [
        [analysis.lie_escape_probability(sent, claimed, params) for claimed in range(3)]
        for sent in range(3)
    ]
    cheat_reports = []
    for targets in ((0, 1), (0, 2), (1, 2)):
        report = analysis.optimal_cheat_state(targets, params)
        cheat_reports.append(
            {
                "targets": list(report.targets),
                "angle": report.angle,
                "objective": report.objective,
                "objective_kind": report.objective_kind,
                "escape_probs": list(report.escape_probs),
            }
        )
    table = []
    for m in m_values:
        rounds = m * m
        table.append(
            {
                "m": m,
                "round_survival": float(analysis.round_cheat_probability(m, p_escape)),
                "rounds": rounds,
                "total_survival": analysis.total_cheat_probability(m, p_escape, rounds),
                "exp_approx": math.exp(-(1.0 - p_escape) * m),
            }
        )

    report = {
        "command": "analyze",
        "config": {**_params_echo(params), "escape": p_escape, "m_values": m_values},
        "identification_probability": p_identify,
        "escape_matrix": escape_matrix,
        "cheat_reports": cheat_reports,
        "cheat_table": table,
        "duration_seconds": time.perf_counter() - start,
    }

    lines = [
        f"unaided identification probability: {p_identify:.5f}",
        "",
        "lie escape matrix (row = sent, column = claimed):",
    ]
    for sent in range(3):
        cells = "  ".join(f"{escape_matrix[sent][claimed]:.5f}" for claimed in range(3))
        lines.append(f"  sent {sent}:  {cells}")
    lines.append("")
    lines.append("best cheat states (energy-constrained):")
    for entry in cheat_reports:
        lines.append(
            f"  targets {tuple(entry['targets'])}: angle {entry['angle']:.6f} rad, "
            f"mean escape {entry['objective']:.5f}"
        )
    lines.append("")
    lines.append(f"cheat survival table (per-lie escape {p_escape}):")
    lines.append("      m    round     rounds        total    exp approx")
    for row in table:
        lines.append(
            f"  {row['m']:5d}  {row['round_survival']:.5f}  {row['rounds']:9d}"
            f"  {row['total_survival']:.5e}  {row['exp_approx']:.5e}"
        )
    _emit(report, args.json, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# run


def _cmd_run(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    params = _params_from(args)
    try:
        graph = _load_graph(args.graph)
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    coloring = brute_force_3color(graph)
    if coloring is None:
        print(
            "error: graph is not 3-colorable; use the soundness command instead",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION

    policy = (
        VerificationPolicy.STRICT_HORIZONTAL
        if args.policy == "strict"
        else VerificationPolicy.IMPOSSIBILITY_ONLY
    )
    config = ProtocolConfig(rounds=args.rounds, seed=args.seed, policy=policy, params=params)
    result = run_protocol(graph, honest_prover(graph, coloring), HonestVerifier(), config)

    reasons = {reason.value: 0 for reason in RejectReason}
    for transcript in result.transcripts:
        if not transcript.verdict.accepted:
            reasons[transcript.verdict.reason.value] += 1
    rejected = sum(reasons.values())

    report = {
        "command": "run",
        "config": {
            **_params_echo(params),
            "graph": args.graph,
            "seed": args.seed,
            "rounds": len(result.transcripts),
            "policy": policy.value,
        },
        "graph": {"n": graph.n, "m": graph.m, "connected": graph.is_connected},
        "coloring": list(coloring),
        "accepted": result.accepted,
        "rejected_rounds": rejected,
        "reject_reasons": reasons,
        "duration_seconds": time.perf_counter() - start,
    }
    lines = [
        f"graph: n={graph.n}, m={graph.m} ({args.graph})",
        f"coloring: {list(coloring)}",
        f"rounds: {len(result.transcripts)}",
        f"accepted: {result.accepted}" + (f" ({rejected} rounds rejected)" if rejected else ""),
    ]
    _emit(report, args.json, lines)
    return EXIT_OK if result.accepted else EXIT_INTERNAL


# --------------------------------------------------------------------------
# soundness


def _cmd_soundness(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    params = _params_from(args)
    try:
        graph = _load_graph(args.graph)
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if params.dark_rate > 0:
        print("error: acceptance predictions assume dark_rate = 0", file=sys.stderr)
        return EXIT_INPUT
    if brute_force_3color(graph) is not None:
        print("error: graph is 3-colorable; a cheating prover needs a bad edge", file=sys.stderr)
        return EXIT_PRECONDITION

    prover: CheatingProver = cheating_prover(graph)
    synthetic = args.mode == "synthetic"
    lie_escape = args.escape if synthetic else analysis.lie_escape_probability(0, 1, params)
    config = ProtocolConfig(
        rounds=args.rounds,
        seed=args.seed,
        params=params,
        synthetic_escape=args.escape if synthetic else None,
    )
    rounds = config.resolve_rounds(graph)
    batch = run_batch(graph, prover, HonestVerifier(), config, args.trials, workers=args.workers)

    bad = prover.bad_edge_count
    per_round = 1.0 - bad * (1.0 - lie_escape) / graph.m
    predicted = per_round**rounds
    empirical = batch.acceptance_rate
    stderr = _stderr_of(predicted, args.trials)
    z_score = (empirical - predicted) / stderr if stderr > 0 else 0.0

    report = {
        "command": "soundness",
        "config": {
            **_params_echo(params),
            "graph": args.graph,
            "seed": args.seed,
            "trials": args.trials,
            "rounds": rounds,
            "mode": args.mode,
            "escape": args.escape if synthetic else None,
        },
        "graph": {"n": graph.n, "m": graph.m, "connected": graph.is_connected},
        "bad_edges": bad,
        "lie_escape": lie_escape,
        "per_round_survival": per_round,
        "predicted_acceptance": predicted,
        "accepted_runs": batch.accepted_count,
        "empirical_acceptance": empirical,
        "std_error": stderr,
        "z_score": z_score,
        "duration_seconds": time.perf_counter() - start,
    }
    lines = [
        f"graph: n={graph.n}, m={graph.m}, bad edges {bad} ({args.graph})",
        f"mode: {args.mode} (lie escape {lie_escape:.5f}), rounds {rounds}, trials {args.trials}",
        f"predicted acceptance: {predicted:.5f}",
        f"empirical acceptance: {empirical:.5f} +- {stderr:.5f} (z = {z_score:+.2f})",
    ]
    _emit(report, args.json, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# hiding


def _cmd_hiding(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    params = _params_from(args)
    try:
        graph = _load_graph(args.graph)
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if params.dark_rate > 0:
        print("error: identification predictions assume dark_rate = 0", file=sys.stderr)
        return EXIT_INPUT
    coloring = brute_force_3color(graph)
    if coloring is None:
        print("error: graph is not 3-colorable; an honest prover needs a coloring", file=sys.stderr)
        return EXIT_PRECONDITION

    config = ProtocolConfig(rounds=args.rounds, seed=args.seed, params=params)
    rounds = config.resolve_rounds(graph)
    batch = run_batch(
        graph,
        honest_prover(graph, coloring),
        curious_verifier(),
        config,
        args.trials,
        workers=args.workers,
    )

    p_identify = args.pb_override if args.pb_override is not None else (
        analysis.identification_probability(params)
    )
    per_attempt = p_identify**graph.n
    formula = analysis.hiding_probability(graph.n, p_identify, rounds)
    exact = analysis.execution_identification_probability(coloring, params, rounds)
    empirical = batch.curious_success_rate
    se_formula = _stderr_of(formula, args.trials)
    se_exact = _stderr_of(exact, args.trials)

    report = {
        "command": "hiding",
        "config": {
            **_params_echo(params),
            "graph": args.graph,
            "seed": args.seed,
            "trials": args.trials,
            "rounds": rounds,
            "pb_override": args.pb_override,
        },
        "graph": {"n": graph.n, "m": graph.m, "connected": graph.is_connected},
        "coloring": list(coloring),
        "identification_probability": p_identify,
        "per_attempt_identification": per_attempt,
        "formula_prediction": formula,
        "exact_prediction": exact,
        "successful_runs": batch.curious_success_count,
        "empirical_success": empirical,
        "z_vs_formula": (empirical - formula) / se_formula if se_formula > 0 else 0.0,
        "z_vs_exact": (empirical - exact) / se_exact if se_exact > 0 else 0.0,
        "duration_seconds": time.perf_counter() - start,
    }
    lines = [
        f"graph: n={graph.n}, m={graph.m} ({args.graph})",
        f"rounds {rounds}, trials {args.trials}, per-vertex identification {p_identify:.5f}",
        f"per-attempt (independence formula): {per_attempt:.6f}",
        f"formula prediction over rounds:     {formula:.5f} (z = {report['z_vs_formula']:+.2f})",
        f"exact prediction (shared permutation): {exact:.5f} (z = {report['z_vs_exact']:+.2f})",
        f"empirical success: {empirical:.5f}",
    ]
    _emit(report, args.json, lines)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zk3color",
        description="Simulate and analyze the coherent-state 3-coloring proof.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_analyze = sub.add_parser("analyze", help="closed-form operating point and cheat tables")
    _add_params_flags(p_analyze)
    p_analyze.add_argument("--escape", type=_probability, default=0.4, help="per-lie escape for the tables")
    p_analyze.add_argument("--m", type=_positive_int, default=None, help="single edge count for the table")
    p_analyze.add_argument("--json", action="store_true")
    p_analyze.set_defaults(func=_cmd_analyze)

    p_run = sub.add_parser("run", help="one honest execution with transcripts")
    _add_params_flags(p_run)
    p_run.add_argument("--graph", required=True, help="DIMACS .col file")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--rounds", type=_positive_int, default=None, help="override the default m^2")
    p_run.add_argument("--policy", choices=("impossibility", "strict"), default="impossibility")
    p_run.add_argument("--json", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_sound = sub.add_parser("soundness", help="cheating-prover acceptance rate")
    _add_params_flags(p_sound)
    p_sound.add_argument("--graph", required=True, help="DIMACS .col file (not 3-colorable)")
    p_sound.add_argument("--trials", type=_positive_int, default=10_000)
    p_sound.add_argument("--mode", choices=("physical", "synthetic"), default="physical")
    p_sound.add_argument("--escape", type=_probability, default=0.4, help="forced lie escape in synthetic mode")
    p_sound.add_argument("--seed", type=int, default=0)
    p_sound.add_argument("--rounds", type=_positive_int, default=None)
    p_sound.add_argument("--workers", type=_positive_int, default=1)
    p_sound.add_argument("--json", action="store_true")
    p_sound.set_defaults(func=_cmd_soundness)

    p_hide = sub.add_parser("hiding", help="curious-verifier identification rate")
    _add_params_flags(p_hide)
    p_hide.add_argument("--graph", required=True, help="DIMACS .col file (3-colorable)")
    p_hide.add_argument("--trials", type=_positive_int, default=10_000)
    p_hide.add_argument("--pb-override", type=_probability, default=None,
                        help="use this per-vertex identification probability in the formula columns")
    p_hide.add_argument("--seed", type=int, default=0)
    p_hide.add_argument("--rounds", type=_positive_int, default=None)
    p_hide.add_argument("--workers", type=_positive_int, default=1)
    p_hide.add_argument("--json", action="store_true")
    p_hide.set_defaults(func=_cmd_hiding)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
