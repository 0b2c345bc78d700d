"""Command-line front end.

Subcommands: ``prepare`` builds, simulates, and verifies one target;
``verify`` runs the full acceptance suites; ``sweep`` emits a CSV grid
over the boost parameter p or the size n; ``levelsets`` prints the label
structure of an occupation vector; ``export-circuit`` writes a circuit in
the exchange format.  Exit codes: 0 success, 1 verification failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .levelsets import build_level_sets
from .qpe import (
    build_fanout_const_spin_s,
    build_fanout_const_sud,
    build_hadamard_test_spin_s,
    build_hadamard_test_sud,
    build_qpe_log_spin_s,
    build_qpe_log_sud,
    run_postselected,
)
from .reference import DickeSpecSpinS, DickeSpecSUD, spin_s_dicke, sud_dicke
from .report import count_resources
from .sequential import build_sequential_spin_s, build_sequential_sud, verify_sequential
from .serialize import circuit_to_json
from .sim import FIDELITY_ACCEPT, outcome_distribution
from .suites import DEFAULT_MAX_AMPLITUDES, run_all


def _parse_spin(text: str) -> int:
    """Spin value like '0.5', '1', or '3/2', returned as twice the spin."""
    twice = 2 * Fraction(text)
    if twice.denominator != 1 or twice < 1:
        raise ValueError(f"spin {text} is not a positive half-integer")
    return int(twice)


def _parse_kvec(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(piece) for piece in text.split(","))
    except ValueError:
        raise ValueError(f"could not parse occupation vector {text!r}") from None


def _parse_xi(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(piece) for piece in text.split(","))
    except ValueError:
        raise ValueError(f"could not parse xi vector {text!r}") from None


def _default_seed(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("DICKE_SEED")
    return int(env) if env else None


def _spec_from_args(args):
    if args.family == "spin-s":
        if args.s is None or args.k is None:
            raise ValueError("family spin-s needs --s and --k")
        return DickeSpecSpinS(args.n, _parse_spin(args.s), args.k)
    if args.kvec is None:
        raise ValueError("family sud needs --kvec")
    return DickeSpecSUD(args.n, _parse_kvec(args.kvec))


_SPIN_BUILDERS = {
    "qpe-log": build_qpe_log_spin_s,
    "hadamard": build_hadamard_test_spin_s,
    "fanout": build_fanout_const_spin_s,
}
_SUD_BUILDERS = {
    "qpe-log": build_qpe_log_sud,
    "hadamard": build_hadamard_test_sud,
    "fanout": build_fanout_const_sud,
}


def _build_circuit(spec, method: str, p: float | None, xi):
    if isinstance(spec, DickeSpecSpinS):
        if method == "sequential":
            return build_sequential_spin_s(spec)
        return _SPIN_BUILDERS[method](spec, p=p)
    if method == "sequential":
        return build_sequential_sud(spec)
    return _SUD_BUILDERS[method](spec, xi=xi)


def _oracle(spec):
    return spin_s_dicke(spec) if isinstance(spec, DickeSpecSpinS) else sud_dicke(spec)


def _cap_check(circuit, cap: int) -> None:
    if circuit.register.size > cap:
        raise ValueError(
            f"register {list(circuit.register.dims)} has {circuit.register.size} amplitudes, above the cap {cap}"
        )


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", required=True, choices=("spin-s", "sud"))
    parser.add_argument("--n", required=True, type=int)
    parser.add_argument("--s", help="spin, e.g. 0.5, 1, 3/2 (spin-s family)")
    parser.add_argument("--k", type=int, help="target charge (spin-s family)")
    parser.add_argument("--kvec", help="comma-separated occupations (sud family)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quditdicke", description="Build, simulate, and verify qudit Dicke-state circuits")
    sub = parser.add_subparsers(dest="command", required=True)

    prepare = sub.add_parser("prepare", help="build, simulate, and verify one target state")
    _add_spec_flags(prepare)
    prepare.add_argument("--method", required=True, choices=("sequential", "qpe-log", "hadamard", "fanout"))
    prepare.add_argument("--p", type=float, help="override the boost parameter (spin-s)")
    prepare.add_argument("--xi", help="override the boost weights, comma-separated (sud)")
    prepare.add_argument("--seed", type=int)
    prepare.add_argument("--shots", type=int, default=10_000, help="sampling shots when a seed is set")
    prepare.add_argument("--out")
    prepare.add_argument("--format", choices=("json", "csv"), default="json")
    prepare.add_argument("--max-amplitudes", type=int, default=DEFAULT_MAX_AMPLITUDES)

    verify = sub.add_parser("verify", help="run the full acceptance suites")
    verify.add_argument("--max-amplitudes", type=int, default=DEFAULT_MAX_AMPLITUDES)

    sweep = sub.add_parser("sweep", help="CSV grid of acceptance probability and counts (spin-s)")
    _add_spec_flags(sweep)
    sweep.add_argument("--method", required=True, choices=("sequential", "qpe-log", "hadamard", "fanout"))
    sweep.add_argument("--param", required=True, choices=("p", "n"))
    sweep.add_argument("--points", type=int, default=101, help="grid points for --param p")
    sweep.add_argument("--n-max", type=int, help="upper end for --param n (lower end is --n)")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out")
    sweep.add_argument("--max-amplitudes", type=int, default=DEFAULT_MAX_AMPLITUDES)

    levelsets = sub.add_parser("levelsets", help="print the level-set index of an occupation vector")
    levelsets.add_argument("--kvec", required=True)
    levelsets.add_argument("--out")

    export = sub.add_parser("export-circuit", help="write a circuit in the exchange format")
    _add_spec_flags(export)
    export.add_argument("--method", required=True, choices=("sequential", "qpe-log", "hadamard", "fanout"))
    export.add_argument("--p", type=float)
    export.add_argument("--xi")
    export.add_argument("--out")

    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _cmd_prepare(args) -> int:
    spec = _spec_from_args(args)
    xi = _parse_xi(args.xi) if getattr(args, "xi", None) else None
    circuit = _build_circuit(spec, args.method, getattr(args, "p", None), xi)
    _cap_check(circuit, args.max_amplitudes)
    oracle = _oracle(spec)
    seed = _default_seed(args)
    if args.method == "sequential":
        report = verify_sequential(circuit, oracle)
    else:
        shots = args.shots if seed is not None else 0
        report = run_postselected(circuit, oracle, shots=shots, seed=seed)
    text = report.to_json() if args.format == "json" else report.CSV_HEADER + "\n" + report.to_csv_row()
    _emit(text, args.out)
    ok = report.conditional_fidelity >= FIDELITY_ACCEPT
    if args.method == "sequential":
        ok = ok and report.acceptance_probability >= 1.0 - 1e-10
    return 0 if ok else 1


def _cmd_verify(args) -> int:
    results = run_all(args.max_amplitudes)
    failed = False
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'} {result.ident}: {result.description}")
        for line in result.details:
            print(f"    {line}")
        failed = failed or not result.passed
    return 1 if failed else 0


def _sweep_row(circuit) -> tuple[float, int, int]:
    state = circuit.run()
    wires, digits = circuit.accept_rule
    dist = outcome_distribution(state, wires)
    index = 0
    stride = 1
    for w, v in zip(wires, digits):
        index += v * stride
        stride *= circuit.register.dim(w)
    gate_count, depth, _ = count_resources(circuit)
    return float(dist[index]), gate_count, depth


def _cmd_sweep(args) -> int:
    if args.family != "spin-s":
        raise ValueError("sweep supports the spin-s family (the sud occupation vector pins n)")
    lines = ["param,value,acceptance_probability,expected_repetitions,gate_count,logical_depth"]
    if args.param == "p":
        if args.method == "sequential":
            raise ValueError("--param p applies to the probabilistic methods")
        spec = _spec_from_args(args)
        for i in range(args.points):
            p = i / (args.points - 1) if args.points > 1 else 0.0
            circuit = _build_circuit(spec, args.method, p, None)
            _cap_check(circuit, args.max_amplitudes)
            probability, gates, depth = _sweep_row(circuit)
            reps = repr(1.0 / probability) if probability > 0 else "inf"
            lines.append(f"p,{p!r},{probability!r},{reps},{gates},{depth}")
    else:
        if args.n_max is None or args.n_max < args.n:
            raise ValueError("--param n needs --n-max >= --n")
        twice_s = _parse_spin(args.s) if args.s else None
        if twice_s is None or args.k is None:
            raise ValueError("--param n needs --s and --k")
        for n in range(args.n, args.n_max + 1):
            spec = DickeSpecSpinS(n, twice_s, args.k)
            circuit = _build_circuit(spec, args.method, None, None)
            _cap_check(circuit, args.max_amplitudes)
            probability, gates, depth = _sweep_row(circuit)
            reps = repr(1.0 / probability) if probability > 0 else "inf"
            lines.append(f"n,{n},{probability!r},{reps},{gates},{depth}")
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_levelsets(args) -> int:
    index = build_level_sets(_parse_kvec(args.kvec))
    _emit(json.dumps(index.to_dict(), indent=2), args.out)
    return 0


def _cmd_export(args) -> int:
    spec = _spec_from_args(args)
    xi = _parse_xi(args.xi) if getattr(args, "xi", None) else None
    circuit = _build_circuit(spec, args.method, getattr(args, "p", None), xi)
    _emit(circuit_to_json(circuit), args.out)
    return 0


_COMMANDS = {
    "prepare": _cmd_prepare,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "levelsets": _cmd_levelsets,
    "export-circuit": _cmd_export,
}


def cli_main(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
