"""Command line interface: run studies, list problems, check invariants.

Exit codes: 0 on success, 1 when any solver cell or invariant check fails,
2 on configuration errors.  Colored check output honors NO_COLOR.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from .estimator import estimate, reconstruct
from .problems import BenchmarkProblem, get_problem, list_problems
from .solver import (
    ContractionWarning,
    SolverOptions,
    TimePartition,
    integrate,
    nodal_norm_drift,
    weak_residual,
)
from .study import (
    ConfigError,
    OutputFormat,
    StudyMode,
    config_from_mapping,
    linf_error,
    parse_config_file,
    rows_to_csv_text,
    rows_to_json_text,
    run_study,
)

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgode",
        description="Norm-preserving continuous Galerkin time stepping studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run",
        help="run a convergence study",
        description="Run a study. Direct flags override values from --config; "
        "without --out the serialized rows go to stdout.",
    )
    run_p.add_argument("--config", help="path to a flat key = value config file")
    run_p.add_argument("--problem", help="benchmark problem name (see list-problems)")
    run_p.add_argument(
        "--mode",
        choices=[mode.value for mode in StudyMode],
        help="study mode (default single)",
    )
    run_p.add_argument("--degrees", type=int, nargs="+", metavar="R", help="polynomial degrees")
    run_p.add_argument("--meshes", type=int, nargs="+", metavar="M", help="uniform mesh counts")
    run_p.add_argument("--T", type=float, help="final time (default 4)")
    run_p.add_argument("--out", help="output file path (default: print to stdout)")
    run_p.add_argument(
        "--format",
        choices=[fmt.value for fmt in OutputFormat],
        help="output format (default csv)",
    )
    run_p.add_argument(
        "--no-figures",
        action="store_true",
        help="do not render figures next to --out",
    )
    run_p.set_defaults(func=_cmd_run)

    list_p = sub.add_parser("list-problems", help="list built-in problem names")
    list_p.set_defaults(func=_cmd_list)

    check_p = sub.add_parser("check", help="run the invariant checks on a problem")
    check_p.add_argument("problem", help="problem name (see list-problems)")
    check_p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:  # includes ConfigError
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _cmd_run(args) -> int:
    mapping = parse_config_file(args.config) if args.config else {}
    if args.problem is not None:
        mapping["problem"] = args.problem
    if args.mode is not None:
        mapping["mode"] = args.mode
    if args.degrees is not None:
        mapping["degrees"] = ",".join(str(r) for r in args.degrees)
    if args.meshes is not None:
        mapping["meshes"] = ",".join(str(m) for m in args.meshes)
    if args.T is not None:
        mapping["T"] = repr(args.T)
    if args.out is not None:
        mapping["out"] = args.out
    if args.format is not None:
        mapping["format"] = args.format
    if args.no_figures:
        mapping["figures"] = "false"
    config = config_from_mapping(mapping)
    get_problem(config.problem)  # unknown names are config errors, fail before solving

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = run_study(config)
    num_contraction = sum(
        1 for w in caught if issubclass(w.category, ContractionWarning)
    )

    figure_paths = []
    if config.output_path and config.figures and config.mode is not StudyMode.SINGLE:
        from .figures import render_study_figures

        figure_paths = render_study_figures(config, rows)

    if config.output_path:
        info = sys.stdout
        print(f"wrote {len(rows)} rows to {config.output_path}", file=info)
    else:
        info = sys.stderr
        if config.output_format is OutputFormat.CSV:
            sys.stdout.write(rows_to_csv_text(rows))
        else:
            sys.stdout.write(rows_to_json_text(rows))
    for path in figure_paths:
        print(f"rendered {path}", file=info)
    if num_contraction:
        print(
            f"note: {num_contraction} step(s) exceeded the guaranteed-contraction "
            "step-size bound (results unaffected for the direct solver)",
            file=info,
        )
    failures = [row for row in rows if row.error is not None]
    for row in failures:
        print(f"cell r={row.r} M={row.M} failed: {row.error}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_list(args) -> int:
    for name in list_problems():
        print(name)
    return 0


def _use_color(stream) -> bool:
    return stream.isatty() and not os.environ.get("NO_COLOR")


def _verdict(ok: bool, stream) -> str:
    word = "PASS" if ok else "FAIL"
    if _use_color(stream):
        return f"\x1b[{'32' if ok else '31'}m{word}\x1b[0m"
    return word


def _cmd_check(args) -> int:
    problem = get_problem(args.problem)
    all_ok = True
    with warnings.catch_warnings():
        # the battery solves past the guaranteed-contraction step bound on
        # purpose; the drift check below is what validates that regime
        warnings.simplefilter("ignore", ContractionWarning)
        for description, ok, detail in _run_battery(problem):
            all_ok &= ok
            suffix = f"  ({detail})" if detail else ""
            print(f"[{_verdict(ok, sys.stdout)}] {description}{suffix}")
    return 0 if all_ok else 1


def _run_battery(problem: BenchmarkProblem):
    """Invariant checks for one problem; yields (description, ok, detail)."""
    rhs = problem.rhs
    u0 = problem.u0
    scale = 1.0 + float(np.linalg.norm(u0))
    rng = np.random.default_rng(20250825)
    t_hi = 4.0

    if rhs.claims_orthogonal:
        worst = 0.0
        ok = True
        for _ in range(1000):
            t = float(rng.uniform(0.0, t_hi))
            v = rng.standard_normal(rhs.dim)
            fv = rhs.eval(t, v)
            ip = abs(float(fv @ v))
            worst = max(worst, ip)
            ok &= ip <= 1e-12 * float(np.linalg.norm(v) * np.linalg.norm(fv))
        yield (
            "right-hand side is orthogonal to the state",
            ok,
            f"max |<F(t,v), v>| = {worst:.2e} over 1000 samples",
        )

    if rhs.claims_lower_adjoint:
        worst = 0.0
        ok = True
        for _ in range(1000):
            t = float(rng.uniform(0.0, t_hi))
            v = rng.standard_normal(rhs.dim)
            w = rng.standard_normal(rhs.dim)
            fv, fw = rhs.eval(t, v), rhs.eval(t, w)
            defect = abs(float(fv @ w) + float(v @ fw))
            bound = 1e-12 * (
                1.0
                + float(np.linalg.norm(fv) * np.linalg.norm(w))
                + float(np.linalg.norm(v) * np.linalg.norm(fw))
            )
            worst = max(worst, defect)
            ok &= defect <= bound
        yield (
            "adjoint pairing <F(v), w> + <v, F(w)> vanishes",
            ok,
            f"max defect {worst:.2e} over 1000 samples",
        )

    if problem.exact is not None:
        gap = float(np.linalg.norm(np.asarray(problem.exact(0.0)) - u0))
        yield (
            "exact solution starts at the initial value",
            gap <= 1e-14 * scale,
            f"gap {gap:.2e}",
        )

        if rhs.claims_orthogonal:
            base = float(np.linalg.norm(u0))
            drift = max(
                abs(float(np.linalg.norm(problem.exact(float(t)))) - base)
                for t in np.linspace(0.0, t_hi, 100)
            )
            yield (
                "exact solution stays on the initial sphere",
                drift <= 1e-12 * scale,
                f"max norm drift {drift:.2e}",
            )

        h = 1e-6
        worst = 0.0
        for t in np.linspace(h, t_hi, 100):
            t = float(t)
            fd = (np.asarray(problem.exact(t + h)) - np.asarray(problem.exact(t - h))) / (2 * h)
            worst = max(worst, float(np.linalg.norm(fd - rhs.eval(t, problem.exact(t)))))
        yield (
            "exact solution satisfies the differential equation",
            worst <= 1e-6,
            f"max finite-difference defect {worst:.2e}",
        )

    opts = SolverOptions()
    partition = TimePartition.uniform(t_hi, 8, 2)
    sol = integrate(rhs, partition, u0, opts)
    recon = reconstruct(rhs, sol, opts)

    if rhs.claims_orthogonal:
        drift = nodal_norm_drift(sol)
        yield (
            "solver preserves the nodal norms (degree 2, 8 steps)",
            drift <= 1e-11 * scale,
            f"drift {drift:.2e}",
        )

    res = max(
        float(np.max(np.abs(weak_residual(rhs, local, opts)))) for local in sol.locals
    )
    yield ("every step satisfies its weak form", res <= 1e-11, f"max residual {res:.2e}")

    nodes = partition.nodes
    seeds = [u0] + [sol(float(t)) for t in nodes[1:-1]]
    mismatch = 0.0
    for m, hat in enumerate(recon.locals):
        left = np.asarray(hat(float(nodes[m])))
        right = np.asarray(hat(float(nodes[m + 1])))
        mismatch = max(mismatch, float(np.linalg.norm(left - seeds[m])))
        mismatch = max(mismatch, float(np.linalg.norm(right - sol(float(nodes[m + 1])))))
    yield (
        "reconstruction matches the solution at the time nodes",
        mismatch <= 1e-12 * scale,
        f"max mismatch {mismatch:.2e}",
    )

    if problem.exact is not None:
        err = linf_error(sol, problem.exact)
        bound = float(estimate(rhs, sol, recon, None, opts).bound[-1])
        yield (
            "error bound covers the true error",
            bound >= err * (1.0 - 1e-6),
            f"error {err:.3e}, bound {bound:.3e}",
        )
