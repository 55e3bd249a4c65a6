"""Command line interface.

Subcommands tabulate the analytic bounds, run the simulators and the dense
reference, and verify the hopping-series inequalities. Every command writes a
:class:`lrbounds.export.ResultGrid` as CSV or JSON.

Exit codes are 0 on success, 1 when a bound, oracle or verification check
fails, and 2 on invalid usage.
"""
import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ._version import __version__
from .bounds import (
    BoundConstants,
    MuPolicy,
    causal_contour,
    crossover_rc,
    hk_bound,
    hk_contour,
    hybrid_bound,
    log10_hk_bound,
    new_Jn_bound,
    verify_hopping_bounds,
    verify_partial_sums,
    verify_reproducibility,
    windowed_Jn,
)
from .bounds.hopseries import PairCheck, VerificationReport
from .config import OUTPUT_DIR_ENV, Boundary, LambdaMode, ModelKind, OutputFormat
from .dynamics import (
    DenseModelSpec,
    KrylovConfig,
    TFIMScenario,
    XYScenario,
    dispersion_vmax,
    dump_state,
    exact_qrt,
    qrt_tfim,
    qrt_xy_grid,
    quenched_state,
)
from .export import ResultGrid, check_bounds
from .lattice import CouplingModel, lambda_constant, max_distance_from

logger = logging.getLogger()

T = TypeVar("T")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

XY_ORACLE_TOL = 1e-10
TFIM_ORACLE_TOL = 1e-8


class UsageError(Exception):
    """Invalid command line parameters."""


def _alpha_list(text: str) -> List[float]:
    """Parse a comma separated list of exponents; ``inf`` is nearest-neighbor."""
    alphas = []
    for token in text.split(","):
        token = token.strip().lower()
        try:
            alpha = math.inf if token == "inf" else float(token)
        except ValueError:
            raise UsageError(f"Cannot read alpha '{token}'. Use numbers > 1 or 'inf'.")
        if not alpha > 1:
            raise UsageError(f"alpha={token} is not supported; the couplings need alpha > 1.")
        alphas.append(alpha)
    return alphas


def _float_list(text: str) -> List[float]:
    try:
        return [float(token) for token in text.split(",")]
    except ValueError:
        raise UsageError(f"Cannot read the list of numbers '{text}'.")


def _time_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:count`` (inclusive), a comma list, or a single time."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"Time grids are written start:stop:count, got '{text}'.")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"Cannot read the time grid '{text}'.")
        if count < 1 or start < 0 or stop < start:
            raise UsageError(
                f"Time grid '{text}' needs 0 <= start <= stop and a positive count."
            )
        times = np.linspace(start, stop, count)
    else:
        times = np.asarray(_float_list(text))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise UsageError(f"Times must be non-negative and ascending, got '{text}'.")
    return times


def _r_range(text: str) -> List[int]:
    """Parse ``lo:hi`` (inclusive) or a single distance."""
    try:
        if ":" in text:
            lo, hi = (int(part) for part in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"Distance ranges are written lo:hi with integers, got '{text}'.")
    if lo < 1 or hi < lo:
        raise UsageError(f"Distance range '{text}' needs 1 <= lo <= hi.")
    return list(range(lo, hi + 1))


def _mu_policy(text: str) -> MuPolicy:
    if text in ("opt", "optimized"):
        return MuPolicy.optimized()
    try:
        return MuPolicy.fixed(float(text))
    except (ValueError, RuntimeError):
        raise UsageError(f"--mu takes a number strictly inside (0, 1) or 'opt', got '{text}'.")


def _validated(factory: Callable[..., T], *args, **kwargs) -> T:
    """Build a model object, turning its validation errors into usage errors."""
    try:
        return factory(*args, **kwargs)
    except RuntimeError as exc:
        raise UsageError(str(exc)) from exc


def _per_alpha(func: Callable[[float], T], alphas: Sequence[float], threads: int) -> List[T]:
    """Run one job per exponent; results keep the order of ``alphas``."""
    if threads <= 1 or len(alphas) == 1:
        return [func(alpha) for alpha in alphas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, alphas))


def _signal_grid(alpha, n_sites, boundary, times, r_values, q, extra=None) -> ResultGrid:
    rows_t, rows_r = np.meshgrid(times, r_values, indexing="ij")
    n_rows = rows_t.size
    columns = {
        "alpha": [alpha] * n_rows,
        "N": [n_sites] * n_rows,
        "boundary": [Boundary(boundary).value] * n_rows,
    }
    for name, value in (extra or {}).items():
        columns[name] = [value] * n_rows
    columns.update({"t": rows_t.ravel().tolist(), "r": rows_r.ravel().tolist()})
    columns["Q"] = np.asarray(q).ravel().tolist()
    return ResultGrid(columns)


def _concat(grids: Sequence[ResultGrid], metadata: dict) -> ResultGrid:
    result = ResultGrid(metadata=metadata)
    for grid in grids:
        result.extend(grid)
    return result


def cmd_bound_eval(args) -> Tuple[ResultGrid, bool]:
    """Tabulate the hybrid and Hastings-Koma bounds over an (r, t) grid."""
    alphas = _alpha_list(args.alpha)
    r_values = _r_range(args.r)
    times = _time_grid(args.t)
    policy = _mu_policy(args.mu)

    def evaluate(alpha: float) -> ResultGrid:
        constants = BoundConstants.from_alpha(alpha, equal_velocities=args.equal_velocities)
        grid = ResultGrid({name: [] for name in _BOUND_EVAL_COLUMNS})
        for t in times:
            for r in r_values:
                bound = hybrid_bound(r, t, policy, constants)
                if constants.is_nearest_neighbor:
                    hk, log10_hk = math.nan, math.nan
                else:
                    hk, log10_hk = hk_bound(r, t, constants), log10_hk_bound(r, t, constants)
                row = [alpha, r, float(t), bound.mu_used, bound.term_short, bound.term_long]
                row += [bound.value, bound.log10_raw, hk, log10_hk]
                for name, value in zip(_BOUND_EVAL_COLUMNS, row):
                    grid.columns[name].append(value)
        return grid

    return _concat(_per_alpha(evaluate, alphas, args.threads), {"method": "bound eval"}), True


_BOUND_EVAL_COLUMNS = [
    "alpha",
    "r",
    "t",
    "mu",
    "term_short",
    "term_long",
    "bound",
    "log10_bound_raw",
    "hk_bound",
    "log10_hk_bound_raw",
]


def cmd_bound_contour(args) -> Tuple[ResultGrid, bool]:
    """Causal contours of the hybrid and Hastings-Koma bounds, with the crossover marker."""
    alphas = _alpha_list(args.alpha)
    r_values = _r_range(args.r)
    policy = _mu_policy(args.mu)
    if not 0 < args.epsilon < 1:
        raise UsageError(f"--epsilon must lie strictly inside (0, 1), got {args.epsilon}.")

    def contour(alpha: float) -> ResultGrid:
        constants = BoundConstants.from_alpha(alpha, equal_velocities=args.equal_velocities)
        hybrid = causal_contour(args.epsilon, r_values, policy, constants)
        if constants.is_nearest_neighbor:
            hk = [(r, math.nan) for r in r_values]
        else:
            hk = hk_contour(args.epsilon, r_values, constants)
        columns: dict = {name: [] for name in ("alpha", "r", "t_star", "mu", "t_star_hk", "r_c")}
        for (r, t_star), (_, t_hk) in zip(hybrid, hk):
            mu = hybrid_bound(r, t_star, policy, constants).mu_used
            columns["alpha"].append(alpha)
            columns["r"].append(int(r))
            columns["t_star"].append(t_star)
            columns["mu"].append(mu)
            columns["t_star_hk"].append(t_hk)
            columns["r_c"].append(crossover_rc(t_star, mu, constants))
        return ResultGrid(columns)

    grids = _per_alpha(contour, alphas, args.threads)
    return _concat(grids, {"method": "bound contour", "epsilon": args.epsilon}), True


def _oracle_columns(grid: ResultGrid, q_oracle: List[float], tol: float) -> Tuple[bool, float]:
    diff = float(np.max(np.abs(grid.column("Q") - np.asarray(q_oracle))))
    grid.add_column("Q_oracle", q_oracle)
    if diff > tol:
        logger.error(f"simulator and dense oracle differ by {diff:.3e} > {tol:.0e}")
    return diff <= tol, diff


def cmd_sim_xy(args) -> Tuple[ResultGrid, bool]:
    """Quench signal of the XY chain."""
    alphas = _alpha_list(args.alpha)
    times = _time_grid(args.t)
    scenarios = [
        _validated(
            XYScenario,
            _validated(CouplingModel, alpha, args.N, args.boundary),
            times=times,
            quench_site=args.quench_site,
        )
        for alpha in alphas
    ]
    if args.oracle_check:
        for scenario in scenarios:
            _validated(DenseModelSpec, ModelKind.XY, scenario.model)

    def simulate(scenario: XYScenario) -> Tuple[ResultGrid, float, float]:
        r_values = np.arange(scenario.max_distance() + 1)
        q = qrt_xy_grid(scenario, r_values)
        grid = _signal_grid(scenario.model.alpha, args.N, args.boundary, times, r_values, q)
        diff = math.nan
        if args.oracle_check:
            spec = DenseModelSpec(ModelKind.XY, scenario.model)
            q_oracle = exact_qrt(spec, r_values, times, quench_site=scenario.quench_site)
            _, diff = _oracle_columns(grid, q_oracle.ravel().tolist(), XY_ORACLE_TOL)
        v_max = dispersion_vmax(scenario.model).v_max
        return grid, diff, v_max

    results = _per_alpha(simulate, scenarios, args.threads)  # type: ignore
    metadata = {
        "method": "xy single-excitation eigendecomposition",
        "v_max": {_alpha_key(a): v for a, (_, _, v) in zip(alphas, results)},
    }
    ok = True
    if args.oracle_check:
        diffs = [diff for _, diff, _ in results]
        metadata["oracle_max_diff"] = max(diffs)
        ok = max(diffs) <= XY_ORACLE_TOL
    grid = _concat([g for g, _, _ in results], metadata)
    if args.check_bounds:
        ok = check_bounds(grid, _mu_policy(args.mu)) and ok
    return grid, ok


def _alpha_key(alpha: float) -> str:
    return "inf" if math.isinf(alpha) else repr(alpha)


def cmd_sim_tfim(args) -> Tuple[ResultGrid, bool]:
    """Quench signal of the transverse-field Ising chain."""
    alphas = _alpha_list(args.alpha)
    times = _time_grid(args.t)
    config = _validated(KrylovConfig, m=args.krylov_m, dt=args.krylov_dt, tol=args.krylov_tol)
    scenarios = [
        _validated(
            TFIMScenario,
            _validated(CouplingModel, alpha, args.N, args.boundary),
            b_z=args.Bz,
            times=times,
            quench_site=args.quench_site,
        )
        for alpha in alphas
    ]
    for scenario in scenarios:
        _validated(scenario.check_memory, config)
        if args.oracle_check:
            _validated(DenseModelSpec, ModelKind.TFIM, scenario.model, args.Bz)

    extra = {
        "B_z": args.Bz,
        "krylov_m": config.m,
        "krylov_dt": config.dt,
        "krylov_tol": config.tol,
    }

    def simulate(scenario: TFIMScenario) -> Tuple[ResultGrid, float]:
        result = qrt_tfim(scenario, config)
        grid = _signal_grid(
            scenario.model.alpha, args.N, args.boundary, times, result.r_values, result.q, extra
        )
        diff = math.nan
        if args.oracle_check:
            spec = DenseModelSpec(ModelKind.TFIM, scenario.model, args.Bz)
            q_oracle = exact_qrt(spec, result.r_values, times, quench_site=scenario.quench_site)
            _, diff = _oracle_columns(grid, q_oracle.ravel().tolist(), TFIM_ORACLE_TOL)
        return grid, diff

    results = _per_alpha(simulate, scenarios, args.threads)  # type: ignore
    metadata = {
        "method": "tfim krylov",
        "note": "bounds are compared with the field included, an empirically tested assumption",
    }
    ok = True
    if args.oracle_check:
        diffs = [diff for _, diff in results]
        metadata["oracle_max_diff"] = max(diffs)
        ok = max(diffs) <= TFIM_ORACLE_TOL
    grid = _concat([g for g, _ in results], metadata)
    if args.check_bounds:
        ok = check_bounds(grid, _mu_policy(args.mu)) and ok
    return grid, ok


def cmd_oracle(args) -> Tuple[ResultGrid, bool]:
    """Quench signal from dense exact diagonalization."""
    alphas = _alpha_list(args.alpha)
    times = _time_grid(args.t)
    if args.dump_state and len(alphas) != 1:
        raise UsageError("--dump-state writes one state; pass a single alpha.")
    specs = [
        _validated(
            DenseModelSpec,
            args.kind,
            _validated(CouplingModel, alpha, args.N, args.boundary),
            args.Bz,
        )
        for alpha in alphas
    ]
    extra = {"kind": args.kind, "B_z": args.Bz, "observable": args.observable}

    def simulate(spec: DenseModelSpec) -> ResultGrid:
        r_values = np.arange(_validated(max_distance_from, args.quench_site, spec.model) + 1)
        q = exact_qrt(spec, r_values, times, args.observable, quench_site=args.quench_site)
        return _signal_grid(
            spec.model.alpha, args.N, args.boundary, times, r_values, q, extra
        )

    grids = _per_alpha(simulate, specs, args.threads)  # type: ignore
    if args.dump_state:
        state = quenched_state(specs[0], float(times[-1]), quench_site=args.quench_site)
        dump_state(_resolve_output(args.dump_state), state)
        logger.info(f"wrote the quenched state at t={times[-1]} to {args.dump_state}")
    return _concat(grids, {"method": "dense exact diagonalization"}), True


def _report_grid(reports: Sequence[VerificationReport], metadata: dict) -> ResultGrid:
    names = ["alpha", "lambda", "inequality", "i", "j", "n", "lhs", "rhs", "ratio", "pass"]
    grid = ResultGrid({name: [] for name in names}, metadata)
    for report in reports:
        for check in report.checks:
            row = [report.alpha, report.lam, check.inequality, check.i, check.j, check.n]
            row += [check.lhs, check.rhs, check.ratio, check.passed]
            for name, value in zip(names, row):
                grid.columns[name].append(value)
    return grid


def cmd_verify(args) -> Tuple[ResultGrid, bool]:
    """Check the reproducibility conditions, the J_n bounds and the partial sums."""
    alphas = _alpha_list(args.alpha)
    lambda_mode = LambdaMode(args.lambda_mode)

    if args.n is not None or args.r is not None:
        if args.n is None or args.r is None:
            raise UsageError("A single hopping-sum query needs both --n and --r.")
        if args.n < 1 or args.r < 1:
            raise UsageError("--n and --r must be positive integers.")
        if args.n > args.r:
            raise UsageError(
                f"The (12 lambda)^(n-1) (r - n + 1)^-alpha bound holds for n <= r; "
                f"got n={args.n} > r={args.r}."
            )

        def single(alpha: float) -> VerificationReport:
            lam = lambda_constant(CouplingModel.infinite(alpha)).value
            lhs = windowed_Jn(alpha, args.r, args.n)
            rhs = new_Jn_bound(args.n, args.r, lam, alpha)
            check = PairCheck(0, args.r, args.n, "new-bound", lhs, rhs)
            return VerificationReport(alpha=alpha, n_sites=0, lam=lam, checks=[check])

        reports = _per_alpha(single, alphas, args.threads)
    else:
        mus = _float_list(args.mus)
        partial_times = _time_grid(args.partial_t)
        models = [
            _validated(CouplingModel, alpha, args.window, Boundary.OPEN) for alpha in alphas
        ]
        for mu in mus:
            _validated(MuPolicy.fixed, mu)

        def sweep(model: CouplingModel) -> VerificationReport:
            report = verify_reproducibility(model, args.max_r, lambda_mode)
            report.extend(verify_hopping_bounds(model, args.max_r, args.max_n, lambda_mode))
            constants = BoundConstants.from_alpha(model.alpha)
            report.extend(
                verify_partial_sums(constants, mus, args.partial_max_r, partial_times)
            )
            return report

        reports = _per_alpha(sweep, models, args.threads)  # type: ignore

    ok = all(report.passed for report in reports)
    for report in reports:
        if not report.passed:
            bad = report.failures[0]
            print(
                f"counterexample at alpha={report.alpha}: {bad.inequality} "
                f"i={bad.i} j={bad.j} n={bad.n}: {bad.lhs!r} > {bad.rhs!r}",
                file=sys.stderr,
            )
            break
    metadata = {
        "method": "verify",
        "summary": {
            _alpha_key(r.alpha): {"checks": len(r.checks), "failures": len(r.failures)}
            for r in reports
        },
    }
    return _report_grid(reports, metadata), ok


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", default=OutputFormat.CSV.value, choices=[f.value for f in OutputFormat]
    )
    parser.add_argument(
        "--output",
        default="-",
        help=f"Output file ('-' for stdout). Relative paths are resolved against "
        f"${OUTPUT_DIR_ENV} when it is set.",
    )
    parser.add_argument("--threads", type=int, default=1, help="Concurrent jobs (one per alpha).")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def _add_alpha(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--alpha", required=required, help="Comma separated exponents; 'inf' for nearest-neighbor."
    )


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of the ``lrbounds`` command."""
    parser = argparse.ArgumentParser(
        prog="lrbounds",
        description="Information-propagation bounds and exact quench dynamics of power-law "
        "interacting spin chains.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    bound = commands.add_parser("bound", help="Analytic bounds.")
    bound_commands = bound.add_subparsers(dest="bound_command", required=True)

    evaluate = bound_commands.add_parser("eval", help="Tabulate bounds over (r, t).")
    _add_alpha(evaluate)
    evaluate.add_argument("--r", required=True, help="Distances lo:hi.")
    evaluate.add_argument("--t", required=True, help="Times start:stop:count or a list.")
    evaluate.add_argument("--mu", default="opt", help="Fixed mu in (0, 1) or 'opt'.")
    evaluate.add_argument("--equal-velocities", action="store_true")
    _add_common(evaluate)
    evaluate.set_defaults(func=cmd_bound_eval)

    contour = bound_commands.add_parser("contour", help="Causal contours at level epsilon.")
    _add_alpha(contour)
    contour.add_argument("--epsilon", type=float, default=1e-3)
    contour.add_argument("--r", required=True, help="Distances lo:hi.")
    contour.add_argument("--mu", default="0.5", help="Fixed mu in (0, 1) or 'opt'.")
    contour.add_argument("--equal-velocities", action="store_true")
    _add_common(contour)
    contour.set_defaults(func=cmd_bound_contour)

    sim = commands.add_parser("sim", help="Quench dynamics.")
    sim_commands = sim.add_subparsers(dest="sim_command", required=True)

    xy = sim_commands.add_parser("xy", help="Long-range XY chain.")
    _add_alpha(xy)
    xy.add_argument("--N", type=int, required=True)
    xy.add_argument("--t", required=True)
    xy.add_argument(
        "--boundary", default=Boundary.PERIODIC.value, choices=["open", "periodic"]
    )
    xy.add_argument("--quench-site", type=int, default=0)
    xy.add_argument("--check-bounds", action="store_true")
    xy.add_argument("--oracle-check", action="store_true")
    xy.add_argument("--mu", default="opt", help="mu policy for --check-bounds.")
    _add_common(xy)
    xy.set_defaults(func=cmd_sim_xy)

    tfim = sim_commands.add_parser("tfim", help="Long-range transverse-field Ising chain.")
    _add_alpha(tfim)
    tfim.add_argument("--N", type=int, required=True)
    tfim.add_argument("--Bz", type=float, default=0.5)
    tfim.add_argument("--t", required=True)
    tfim.add_argument("--boundary", default=Boundary.OPEN.value, choices=["open", "periodic"])
    tfim.add_argument("--quench-site", type=int, default=0)
    tfim.add_argument("--krylov-m", type=int, default=KrylovConfig.m)
    tfim.add_argument("--krylov-dt", type=float, default=KrylovConfig.dt)
    tfim.add_argument("--krylov-tol", type=float, default=KrylovConfig.tol)
    tfim.add_argument("--check-bounds", action="store_true")
    tfim.add_argument("--oracle-check", action="store_true")
    tfim.add_argument("--mu", default="opt", help="mu policy for --check-bounds.")
    _add_common(tfim)
    tfim.set_defaults(func=cmd_sim_tfim)

    oracle = commands.add_parser("oracle", help="Dense exact diagonalization (N <= 12).")
    oracle.add_argument("--kind", required=True, choices=[k.value for k in ModelKind])
    _add_alpha(oracle)
    oracle.add_argument("--N", type=int, required=True)
    oracle.add_argument("--Bz", type=float, default=0.0)
    oracle.add_argument("--t", required=True)
    oracle.add_argument("--boundary", default=Boundary.OPEN.value, choices=["open", "periodic"])
    oracle.add_argument("--quench-site", type=int, default=0)
    oracle.add_argument("--observable", default="x", choices=["x", "y", "z"])
    oracle.add_argument("--dump-state", help="Write the quenched state at the last time.")
    _add_common(oracle)
    oracle.set_defaults(func=cmd_oracle)

    verify = commands.add_parser("verify", help="Hopping-series inequalities.")
    _add_alpha(verify)
    verify.add_argument("--max-r", type=int, default=50)
    verify.add_argument("--max-n", type=int, default=6)
    verify.add_argument("--window", type=int, default=401, help="Sites of the open window.")
    verify.add_argument(
        "--lambda-mode",
        default=LambdaMode.INFINITE_LATTICE.value,
        choices=[m.value for m in LambdaMode],
    )
    verify.add_argument("--mus", default="0.25,0.5,0.75")
    verify.add_argument("--partial-max-r", type=int, default=60)
    verify.add_argument("--partial-t", default="0:2:9")
    verify.add_argument("--n", type=int, help="Order of a single J_n query.")
    verify.add_argument("--r", type=int, help="Distance of a single J_n query.")
    _add_common(verify)
    verify.set_defaults(func=cmd_verify)
    return parser


def _resolve_output(path: str) -> Path:
    resolved = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not resolved.is_absolute():
        resolved = Path(base) / resolved
    resolved.parent.mkdir(parents=True, exist_ok=True)
    return resolved


def _config_echo(args: argparse.Namespace) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key != "func"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line interface and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)

    if args.threads < 1:
        parser.error(f"--threads must be at least 1, got {args.threads}.")
    try:
        grid, ok = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except RuntimeError as exc:
        print(f"lrbounds: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    grid.metadata.update({"tool": "lrbounds", "version": __version__})
    grid.metadata["config"] = _config_echo(args)
    if args.output == "-":
        grid.write(sys.stdout, args.format)
    else:
        grid.save(_resolve_output(args.output), args.format)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
