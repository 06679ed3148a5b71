"""Command-line front end.

Subcommands: distance (solve one behavior), scan (distance against the
entanglement parameter), bench (runtime against measurement count), verify
(cross-check against the dense reference solve), oracle (run the separation
oracle on a coefficient table), gen (emit a behavior as JSON).

Exit codes: 0 success, 2 input or validation failure, 3 non-convergence,
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .behavior import (
    Behavior,
    BehaviorDims,
    MeasurementWeights,
    residual,
    validate_behavior,
)
from .errors import DimensionMismatch, EnumerationCapExceeded, SchemaError
from .oracle import (
    DEFAULT_ENUMERATION_CAP,
    OracleConfig,
    brute_force_oracle,
    multistart_oracle,
)
from .quantum import (
    MeasurementFamily,
    TwoQubitState,
    planar_family,
    pr_box,
    qubit_behavior,
    random_local_mixture,
)
from .solver import SolveOptions, compute_distance, reference_distance
from .strategies import local_mixture

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_RESOURCE = 4

GENERATORS = ("pr-box", "pure", "werner", "local-mixture", "uniform")

SCAN_CSV_HEADER = "gamma,distance,iterations,millis"
BENCH_CSV_HEADER = "M,millis,iterations,oracle_calls"


def _parse_dims(text: str) -> BehaviorDims:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError("--dims expects A,B,R,S")
    a, b, r, s = (int(p) for p in parts)
    return BehaviorDims(A=a, B=b, R=r, S=s)


def _parse_angles(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(","))


def _parse_gamma_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("--gamma-range expects lo:hi:step")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("--gamma-range step must be positive")
    if hi < lo:
        raise ValueError("--gamma-range upper end below lower end")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def _parse_m_range(text: str) -> list[int]:
    if "," in text:
        return [int(p) for p in text.split(",")]
    parts = text.split(":")
    if len(parts) == 1:
        return [int(parts[0])]
    if len(parts) not in (2, 3):
        raise ValueError("--M-range expects lo:hi[:step] or a comma list")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 4
    if step <= 0 or hi < lo:
        raise ValueError("invalid --M-range")
    return list(range(lo, hi + 1, step))


def _family(args, count: int, offset: float, angles: tuple[float, ...] | None):
    if angles is not None:
        return MeasurementFamily(angles, args.plane)
    return planar_family(count, args.plane, offset)


def _behavior_from_args(args) -> Behavior:
    infile = getattr(args, "infile", None)
    if infile is not None:
        if args.gen is not None:
            raise ValueError("--in and --gen are mutually exclusive")
        if infile == "-":
            data = json.load(sys.stdin)
        else:
            with open(infile, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        return Behavior.from_json_dict(data)
    if args.gen is None:
        raise ValueError("provide --in PATH or --gen NAME")
    if args.gen == "pr-box":
        return pr_box()
    if args.gen in ("pure", "werner"):
        state = (
            TwoQubitState.pure(args.gamma_state)
            if args.gen == "pure"
            else TwoQubitState.werner(args.visibility)
        )
        M = args.planar
        bob_offset = args.bob_offset
        if bob_offset is None:
            bob_count = len(args.bob_angles) if args.bob_angles else M
            bob_offset = math.pi / (2 * bob_count)
        alice = _family(args, M, args.offset, args.alice_angles)
        bob = _family(args, M, bob_offset, args.bob_angles)
        return qubit_behavior(state, alice, bob)
    if args.gen == "local-mixture":
        return random_local_mixture(_parse_dims(args.dims), args.k, args.seed)
    # uniform: the barycenter 1/(RS) everywhere
    dims = _parse_dims(args.dims)
    table = np.full(dims.shape, 1.0 / (dims.R * dims.S))
    return Behavior(dims, table)


def _solve_options(args) -> SolveOptions:
    return SolveOptions(
        eps=args.eps,
        gamma=args.gamma,
        seed=args.seed,
        oracle_mode=args.oracle,
        trials=args.trials,
        sweep_limit=args.sweep_limit,
        max_outer=args.max_outer,
    )


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _validated(P: Behavior, tol: float = 1e-9) -> None:
    rep = validate_behavior(P, tol=tol)
    if not rep.ok:
        raise SchemaError(
            "behavior failed validation: "
            f"normalization off by {rep.worst_normalization:.3e}, "
            f"negativity {rep.worst_negativity:.3e}, "
            f"signaling {rep.worst_signaling:.3e} (tol {tol:.1e})"
        )


def cmd_distance(args) -> int:
    P = _behavior_from_args(args)
    _validated(P)
    report = compute_distance(P, _solve_options(args))
    _emit(json.dumps(report.to_json_dict(), indent=2), args.out)
    if args.trace_csv:
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write(report.trace_csv())
    if args.plot:
        from .plots import save_trace_plot

        save_trace_plot(report.trace, args.plot, title="bound convergence")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def cmd_scan(args) -> int:
    gammas = _parse_gamma_range(args.gamma_range)
    M = args.M
    bob_offset = args.bob_offset
    if bob_offset is None:
        bob_offset = math.pi / (2 * M)
    opts = _solve_options(args)
    rows = []
    status = EXIT_OK
    for gamma in gammas:
        P = qubit_behavior(
            TwoQubitState.pure(gamma),
            planar_family(M, args.plane, args.offset),
            planar_family(M, args.plane, bob_offset),
        )
        report = compute_distance(P, opts)
        rows.append((gamma, report.distance, report.iterations, report.total_millis))
        if not report.converged:
            status = EXIT_NO_CONVERGENCE
    lines = [SCAN_CSV_HEADER]
    lines += [f"{g:.10g},{d!r},{it},{ms:.3f}" for g, d, it, ms in rows]
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plots import save_scan_plot

        save_scan_plot(rows, args.plot, title=f"{args.plane} plane, M={M}")
    return status


def cmd_bench(args) -> int:
    Ms = _parse_m_range(args.m_range)
    opts = _solve_options(args)
    rows = []
    status = EXIT_OK
    for M in Ms:
        P = qubit_behavior(
            TwoQubitState.pure(args.gamma_state),
            planar_family(M, args.plane, args.offset),
            planar_family(M, args.plane, math.pi / (2 * M)),
        )
        t0 = time.perf_counter()
        report = compute_distance(P, opts)
        millis = (time.perf_counter() - t0) * 1e3
        rows.append((M, millis, report.iterations, report.oracle_calls))
        if not report.converged:
            status = EXIT_NO_CONVERGENCE
    lines = [BENCH_CSV_HEADER]
    lines += [f"{M},{ms:.3f},{it},{oc}" for M, ms, it, oc in rows]
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plots import save_bench_plot

        save_bench_plot(rows, args.plot, title="runtime scaling")
    return status


def cmd_verify(args) -> int:
    P = _behavior_from_args(args)
    _validated(P)
    report = compute_distance(P, _solve_options(args))
    f_ref = reference_distance(P, cap=args.max_vertices)
    diff = abs(report.f_plus - f_ref)
    W = MeasurementWeights.uniform(P.dims)
    g = residual(P, local_mixture(report.vertices))
    heur = multistart_oracle(g, W, OracleConfig(trials=args.trials, seed=args.seed))
    exact = brute_force_oracle(g, W, cap=args.max_vertices * 64)
    out = {
        "distance": report.distance,
        "distance_reference": math.sqrt(2.0 * max(f_ref, 0.0)),
        "F_plus": report.f_plus,
        "F_reference": f_ref,
        "abs_diff_F": diff,
        "oracle_heuristic": heur.value,
        "oracle_exact": exact.value,
        "oracle_shortfall": exact.value - heur.value,
        "tolerance": 10.0 * args.eps,
        "ok": bool(diff <= 10.0 * args.eps),
    }
    _emit(json.dumps(out, indent=2), args.out)
    return EXIT_OK if out["ok"] else EXIT_NO_CONVERGENCE


def cmd_oracle(args) -> int:
    # the input is a coefficient table, not a probability table: no validation
    if args.infile == "-":
        data = json.load(sys.stdin)
    else:
        with open(args.infile, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    g = Behavior.from_json_dict(data)
    W = MeasurementWeights.uniform(g.dims)
    if args.exact:
        ans = brute_force_oracle(g, W, cap=args.cap)
    else:
        cfg = OracleConfig(
            trials=args.trials, seed=args.seed, sweep_limit=args.sweep_limit
        )
        ans = multistart_oracle(g, W, cfg)
    out = {
        "value": ans.value,
        "r": list(ans.strategy.r),
        "s": list(ans.strategy.s),
        "sweeps": ans.sweeps,
        "exact": bool(args.exact),
    }
    _emit(json.dumps(out, indent=2), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    P = _behavior_from_args(args)
    _validated(P, tol=1e-12)
    _emit(json.dumps(P.to_json_dict()), args.out)
    return EXIT_OK


def _add_generator_flags(p: argparse.ArgumentParser, with_infile: bool = True) -> None:
    if with_infile:
        p.add_argument("--in", dest="infile", metavar="PATH",
                       help="behavior JSON file, '-' for stdin")
    p.add_argument("--gen", choices=GENERATORS, help="built-in behavior generator")
    p.add_argument("--gamma-state", type=float, default=1.0, metavar="G",
                   help="entanglement parameter for --gen pure (default 1.0)")
    p.add_argument("--visibility", type=float, default=0.5, metavar="P",
                   help="visibility for --gen werner (default 0.5)")
    p.add_argument("--planar", type=int, default=2, metavar="M",
                   help="measurements per party (default 2)")
    p.add_argument("--plane", choices=("xy", "xz"), default="xy",
                   help="measurement plane (default xy)")
    p.add_argument("--offset", type=float, default=0.0,
                   help="Alice angle offset in radians (default 0)")
    p.add_argument("--bob-offset", type=float, default=None,
                   help="Bob angle offset in radians (default pi/(2M))")
    p.add_argument("--alice-angles", type=_parse_angles, default=None,
                   metavar="LIST", help="explicit Alice angles, comma separated")
    p.add_argument("--bob-angles", type=_parse_angles, default=None,
                   metavar="LIST", help="explicit Bob angles, comma separated")
    p.add_argument("--dims", default="5,5,2,2", metavar="A,B,R,S",
                   help="dimensions for --gen local-mixture/uniform")
    p.add_argument("--k", type=int, default=5,
                   help="vertex count for --gen local-mixture (default 5)")


def _add_seed_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0,
                   help="rng seed, shared by generators and the solver (default 0)")


def _add_solver_flags(p: argparse.ArgumentParser, eps: float = 1e-5) -> None:
    _add_seed_flag(p)
    p.add_argument("--eps", type=float, default=eps,
                   help=f"requested accuracy on F (default {eps:g})")
    p.add_argument("--gamma", type=float, default=0.5,
                   help="descent-test parameter in (0,1) (default 0.5)")
    p.add_argument("--oracle", choices=("heuristic", "exact", "certify"),
                   default="heuristic", help="oracle mode (default heuristic)")
    p.add_argument("--trials", type=int, default=None,
                   help="multistart trials (default: nonsignaling dimension)")
    p.add_argument("--sweep-limit", type=int, default=100,
                   help="alternating sweep cap per trial (default 100)")
    p.add_argument("--max-outer", type=int, default=2000,
                   help="outer iteration cap (default 2000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localdist",
        description="Distance of a bipartite nonsignaling behavior from the local polytope.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="solve one behavior, print the report as JSON")
    _add_generator_flags(p)
    _add_solver_flags(p)
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--trace-csv", metavar="PATH", help="also write the iteration trace as CSV")
    p.add_argument("--plot", metavar="PNG", help="also render the convergence figure")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("scan", help="distance against gamma for the pure state, CSV out")
    p.add_argument("--state", choices=("pure",), default="pure")
    p.add_argument("--plane", choices=("xy", "xz"), default="xy")
    p.add_argument("--gamma-range", required=True, metavar="LO:HI:STEP")
    p.add_argument("--M", type=int, default=10, help="measurements per party (default 10)")
    p.add_argument("--offset", type=float, default=0.0, help="Alice angle offset")
    p.add_argument("--bob-offset", type=float, default=None,
                   help="Bob angle offset (default pi/(2M))")
    _add_solver_flags(p)
    p.add_argument("--out", metavar="PATH", help="CSV path (default stdout)")
    p.add_argument("--plot", metavar="PNG", help="also render distance vs gamma")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bench", help="runtime against measurement count, CSV out")
    p.add_argument("--M-range", dest="m_range", required=True,
                   metavar="LO:HI[:STEP]", help="or a comma list like 8,12,16")
    p.add_argument("--gamma-state", type=float, default=1.0)
    p.add_argument("--plane", choices=("xy", "xz"), default="xy")
    p.add_argument("--offset", type=float, default=0.0)
    _add_solver_flags(p, eps=1e-3)
    p.add_argument("--out", metavar="PATH", help="CSV path (default stdout)")
    p.add_argument("--plot", metavar="PNG", help="also render the log-log figure")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="cross-check the solver against the dense reference")
    _add_generator_flags(p)
    _add_solver_flags(p)
    p.set_defaults(oracle="certify")
    p.add_argument("--max-vertices", type=int, default=10**6,
                   help="reference enumeration cap (default 1e6)")
    p.add_argument("--out", metavar="PATH", help="report path (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="run the separation oracle on a coefficient table")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH",
                   help="coefficient table in behavior JSON layout, '-' for stdin")
    _add_seed_flag(p)
    p.add_argument("--exact", action="store_true", help="brute-force enumeration")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sweep-limit", type=int, default=100)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP,
                   help="enumeration cap for --exact")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="emit a generated behavior as JSON")
    _add_generator_flags(p, with_infile=False)
    _add_seed_flag(p)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnumerationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SchemaError, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
