"""Command-line front end.

    affext plan     derive parameters and write a spec file
    affext extract  apply a spec to vectors from a file or stdin
    affext verify   sweep affine subspaces and run the bound checks
    affext bounds   run the Deligne battery and prime-average statistics

Exit codes: 0 success, 1 argument or input error, 2 planning constraint
violated in strict mode, 3 a theorem-backed check failed during verify.
All commands are deterministic given their arguments and seeds.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from dataclasses import dataclass, replace

from . import analysis, extractor, numtheory, subspace
from .config import (
    DEFAULT_C_PRIME,
    DEFAULT_FLOOR_THRESHOLD,
    DEFAULT_MINOR_BUDGET,
    DEFAULT_POINT_BUDGET,
    DEFAULT_SUBSPACE_BUDGET,
    DEFAULT_TOLERANCE,
    Budgets,
    BudgetExceededError,
)

EXIT_OK = 0
EXIT_ARGS = 1
EXIT_PLAN = 2
EXIT_CHECK = 3


@dataclass
class RunConfig:
    """Everything a command needs, assembled from parsed arguments."""

    command: str
    q: int | None = None
    n: int | None = None
    k: int | None = None
    m: int | None = None
    beta: float | None = None
    c_prime: float = DEFAULT_C_PRIME
    floor_threshold: int = DEFAULT_FLOOR_THRESHOLD
    strict_lcm: bool = False
    seed_points: tuple[int, ...] | None = None
    spec_file: str | None = None
    input_file: str = "-"
    output_file: str = "-"
    exhaustive: bool = False
    sample: int | None = None
    subspace_file: str | None = None
    checks: str = ",".join(analysis.DEFAULT_CHECKS)
    seed: int = 0
    workers: int = 1
    report_dir: str | None = None
    report_rows: str = "auto"
    tolerance: float = DEFAULT_TOLERANCE
    points_budget: int = DEFAULT_POINT_BUDGET
    subspace_budget: int = DEFAULT_SUBSPACE_BUDGET
    minor_budget: int = DEFAULT_MINOR_BUDGET
    prachar_limits: tuple[int, ...] = ()

    def budgets(self) -> Budgets:
        return Budgets(
            points=self.points_budget,
            subspaces=self.subspace_budget,
            minors=self.minor_budget,
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affext", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_budgets(p: argparse.ArgumentParser) -> None:
        p.add_argument("--points-budget", type=int, default=DEFAULT_POINT_BUDGET)
        p.add_argument("--subspace-budget", type=int, default=DEFAULT_SUBSPACE_BUDGET)
        p.add_argument("--minor-budget", type=int, default=DEFAULT_MINOR_BUDGET)

    p = sub.add_parser("plan", help="derive parameters and write a spec file")
    p.add_argument("--q", type=int, required=True, help="prime modulus")
    p.add_argument("--n", type=int, required=True, help="input length")
    p.add_argument("--k", type=int, required=True, help="subspace dimension")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--beta", type=float, help="output rate, m = floor(beta*k)")
    group.add_argument("--m", type=int, help="output length, set directly")
    p.add_argument("--c-prime", type=float, default=DEFAULT_C_PRIME)
    p.add_argument("--floor-threshold", type=int, default=DEFAULT_FLOOR_THRESHOLD)
    p.add_argument("--strict-lcm", action="store_true",
                   help="fail when lcm(d) exceeds q**epsilon instead of warning")
    p.add_argument("--seed-points", type=str, default=None,
                   help="comma-separated Vandermonde seed points (default 1..n)")
    p.add_argument("--spec-file", type=str, required=True, help="output path")

    p = sub.add_parser("extract", help="apply a spec to input vectors")
    p.add_argument("--spec-file", type=str, required=True)
    p.add_argument("--input", dest="input_file", type=str, default="-",
                   help="comma-separated residue vectors, one per line ('-' = stdin)")
    p.add_argument("--output", dest="output_file", type=str, default="-")

    p = sub.add_parser("verify", help="sweep subspaces and run checks")
    p.add_argument("--spec-file", type=str, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exhaustive", action="store_true",
                       help="every k-dimensional affine subspace")
    group.add_argument("--sample", type=int, default=None,
                       help="number of seeded random subspaces")
    group.add_argument("--subspace-file", type=str, default=None,
                       help="explicit subspaces (n,k,q header, offset, k basis lines)")
    p.add_argument("--checks", type=str, default=",".join(analysis.DEFAULT_CHECKS),
                   help=f"comma list from {','.join(analysis.CHECK_ORDER)}, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report-dir", type=str, default=None,
                   help="write verify_report.csv and verify_summary.txt here")
    p.add_argument("--report-rows", type=str, default="auto",
                   choices=("auto", "full", "violations", "none"))
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    add_budgets(p)

    p = sub.add_parser("bounds", help="Deligne battery and prime statistics")
    p.add_argument("--prachar-limit", dest="prachar_limits", type=int,
                   action="append", default=None,
                   help="sum omega(q-1) over primes q <= limit (repeatable)")
    p.add_argument("--report-dir", type=str, default=None)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    add_budgets(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(args):
        if name == "command":
            continue
        value = getattr(args, name)
        if name == "seed_points" and value is not None:
            value = tuple(int(v) for v in value.split(","))
        if name == "prachar_limits":
            value = tuple(value) if value else (1000,)
        setattr(cfg, name, value)
    return cfg


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="ascii")


def cmd_plan(cfg: RunConfig) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg.beta is not None:
            spec = extractor.plan_parameters(
                n=cfg.n, k=cfg.k, beta=cfg.beta, q=cfg.q,
                c_prime=cfg.c_prime, floor_threshold=cfg.floor_threshold,
                seed_points=cfg.seed_points, strict_lcm=cfg.strict_lcm,
            )
        else:
            spec = extractor.build_spec(
                q=cfg.q, n=cfg.n, k=cfg.k, m=cfg.m, seed_points=cfg.seed_points,
            )
            if cfg.strict_lcm and not spec.lcm_bound_satisfied:
                raise extractor.LcmBoundViolation(
                    f"lcm(d)={spec.d.lcm} exceeds q**epsilon="
                    f"{spec.modulus**spec.epsilon:.6g}"
                )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    extractor.save_spec(spec, cfg.spec_file)
    print(f"spec written to {cfg.spec_file}")
    print(f"q = {spec.modulus}, n = {spec.n}, k = {spec.k}, m = {spec.m}")
    print(f"d = {','.join(str(v) for v in spec.d)}")
    print(f"lcm = {spec.d.lcm}, q**epsilon = {spec.modulus**spec.epsilon:.6g}, "
          f"lcm_bound_satisfied = {str(spec.lcm_bound_satisfied).lower()}")
    return EXIT_OK


def cmd_extract(cfg: RunConfig) -> int:
    spec = extractor.load_spec(cfg.spec_file)
    q = spec.modulus
    fh_in = sys.stdin if cfg.input_file == "-" else open(cfg.input_file, "r", encoding="ascii")
    try:
        lines = fh_in.read().splitlines()
    finally:
        if fh_in is not sys.stdin:
            fh_in.close()
    out_lines = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            x = tuple(int(v) for v in line.split(","))
        except ValueError:
            raise ValueError(f"input line {lineno}: not a comma-separated integer vector")
        if len(x) != spec.n:
            raise ValueError(f"input line {lineno}: expected {spec.n} entries, got {len(x)}")
        for v in x:
            if not 0 <= v < q:
                raise ValueError(
                    f"input line {lineno}: {v} is not a canonical residue mod {q}"
                )
        out_lines.append(",".join(str(v) for v in extractor.evaluate(spec, x)))
    fh_out = _open_out(cfg.output_file)
    try:
        for line in out_lines:
            print(line, file=fh_out)
    finally:
        if fh_out is not sys.stdout:
            fh_out.close()
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec = extractor.load_spec(cfg.spec_file)
    if cfg.exhaustive:
        source = analysis.ExhaustiveSubspaces()
    elif cfg.sample is not None:
        source = analysis.SampledSubspaces(count=cfg.sample, seed=cfg.seed)
    else:
        source = analysis.ExplicitSubspaces(
            subspaces=tuple(subspace.load_subspaces(cfg.subspace_file))
        )
    names = analysis.CHECK_ORDER if cfg.checks == "all" else cfg.checks.split(",")
    start = time.perf_counter()
    result = analysis.verify_extractor(
        spec,
        source,
        checks=names,
        workers=cfg.workers,
        budgets=cfg.budgets(),
        tolerance=cfg.tolerance,
        collect=cfg.report_rows,
    )
    elapsed = time.perf_counter() - start
    for line in analysis.summary_lines(result):
        print(line)
    print(f"elapsed_seconds = {elapsed:.3f}")
    if cfg.report_dir is not None:
        os.makedirs(cfg.report_dir, exist_ok=True)
        report = os.path.join(cfg.report_dir, "verify_report.csv")
        summary = os.path.join(cfg.report_dir, "verify_summary.txt")
        analysis.write_reports_csv(result, report)
        analysis.write_summary(result, summary)
        print(f"report rows written to {report}")
        print(f"summary written to {summary}")
    return EXIT_OK if result.ok else EXIT_CHECK


def cmd_bounds(cfg: RunConfig) -> int:
    battery = analysis.deligne_battery()
    result = analysis.SweepResult(
        spec_q=0, spec_n=0, spec_k=0, spec_m=0,
        source=f"deligne_battery:{len(battery)}",
        checks=("deligne",), collect="full", tolerance=cfg.tolerance,
        total_subspaces=len(battery),
    )
    failed = 0
    for idx, (f, b) in enumerate(battery):
        report = analysis.deligne_bound_check(
            f, b, budget=cfg.points_budget, tolerance=cfg.tolerance
        )
        report = replace(report, subspace_id=idx)
        result.reports.append(report)
        result.processed += 1
        if report.satisfied is False:
            failed += 1
        print(
            f"deligne[{idx}] {report.detail} b={b}: |S| = {report.quantity:.6f} "
            f"<= {report.bound:.6f} {'ok' if report.satisfied else 'FAIL'}"
        )
    result.violations["deligne"] = failed
    for limit in cfg.prachar_limits:
        total, norm = numtheory.prachar_average(limit)
        print(f"prachar_sum[{limit}] = {total}")
        print(f"prachar_normalized[{limit}] = {norm!r}")
    if cfg.report_dir is not None:
        os.makedirs(cfg.report_dir, exist_ok=True)
        path = os.path.join(cfg.report_dir, "deligne_battery.csv")
        analysis.write_reports_csv(result, path)
        print(f"battery rows written to {path}")
    return EXIT_OK if failed == 0 else EXIT_CHECK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ARGS if exc.code not in (0, None) else EXIT_OK
    cfg = _config_from_args(args)
    try:
        if cfg.command == "plan":
            return cmd_plan(cfg)
        if cfg.command == "extract":
            return cmd_extract(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        if cfg.command == "bounds":
            return cmd_bounds(cfg)
        raise ValueError(f"unknown command {cfg.command}")
    except extractor.LcmBoundViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLAN
    except (ValueError, TypeError, OSError, BudgetExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
