import argparse
import dataclasses
import functools
import logging
import os
import typing

import numpy as np

from largesol import artifacts
from largesol.conditions import (
    check_A_rho,
    check_h_inv_subadditive,
    check_KO,
    compute_H_bar,
    compute_H_tilde,
)
from largesol.config import RunConfig, parse_config
from largesol.constants import (
    COMMANDS,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERIC_FAILURE,
    EXIT_OK,
    EXIT_REJECTED,
    H_BAR,
    OUT_DIR_ENV,
    PLASTICITY_LOG,
)
from largesol.exceptions import (
    ConfigurationError,
    DomainError,
    Infeasible,
    NonConvergence,
    NumericFailure,
    PreconditionRejected,
    SolverDefect,
    StructuralError,
)
from largesol.fd import fd_comparison_check, fd_solve
from largesol.nfunction import PhiSpec, check_hypotheses, plasticity_constraint
from largesol.problems import NonlinearitySpec, WeightSpec
from largesol.radial import (
    RadialProfile,
    SolverControls,
    blowup_radius,
    boundary_sweep_blowup,
    entire_sandwich,
    existence_threshold,
    solve_ball_dirichlet,
    solve_ivp,
    verify_sandwich,
)
from largesol.schemas import validate_report

logger = logging.getLogger(__name__)

Report = typing.Tuple[str, typing.Dict[str, typing.Any]]


@dataclasses.dataclass
class Run:
    config: RunConfig
    out_dir: str
    seed: int
    threads: int

    @functools.cached_property
    def phi(self) -> PhiSpec:
        return self.config.phi.build()

    @functools.cached_property
    def nl(self) -> NonlinearitySpec:
        return self.config.nonlinearity.build()

    @functools.cached_property
    def weight(self) -> WeightSpec:
        return self.config.weight.build()

    @property
    def N(self) -> int:
        return self.config.geometry.N

    @property
    def controls(self) -> SolverControls:
        return SolverControls(rtol=self.config.run.rtol, atol=self.config.run.atol)

    def write_profile(self, profile: RadialProfile, name: str) -> None:
        artifacts.write_profile(profile, self.out_dir, name)

    def ball(
        self, rho: typing.Any, r_eval: typing.Optional[np.ndarray] = None
    ) -> RadialProfile:
        geometry, run = self.config.geometry, self.config.run
        if r_eval is None:
            r_eval = np.linspace(0.0, geometry.L, run.points)
        return solve_ball_dirichlet(
            self.phi,
            self.nl,
            rho,
            self.N,
            geometry.L,
            run.k,
            tol=run.tol,
            controls=self.controls,
            r_eval=r_eval,
        )


def _profile_report(run: Run, profile: RadialProfile) -> Report:
    report = profile.metadata()
    report["flux_residual"] = profile.flux_residual(run.phi)
    return "profile", report


def cmd_indices(run: Run) -> Report:
    report = check_hypotheses(run.phi).as_dict()
    report["phi"] = run.phi.as_dict()
    report["plasticity_constraint"] = None
    if run.phi.family == PLASTICITY_LOG:
        value, satisfied = plasticity_constraint(run.N)
        report["plasticity_constraint"] = {
            "N": run.N,
            "value": value,
            "satisfied": satisfied,
        }
    return "indices", report


def cmd_check_ko(run: Run) -> Report:
    settings = run.config.run
    report = check_KO(run.phi, run.nl, settings.cutoffs, analytic=settings.analytic)
    return "condition", report.as_dict()


def cmd_check_arho(run: Run) -> Report:
    settings = run.config.run
    report = check_A_rho(run.phi, run.weight, settings.which, run.N, settings.cutoffs)
    return "condition", report.as_dict()


def cmd_budget(run: Run) -> Report:
    horizon = run.config.geometry.horizon
    if run.config.run.budget == H_BAR:
        report = compute_H_bar(run.phi, run.nl, run.weight, run.N, horizon)
    else:
        ws = run.weight
        if ws.ball_lower is None or ws.ball_upper is None:
            r_max = max(horizon, run.config.weight.ball_radius)
            ws = ws.with_ball_envelopes(r_max=r_max)
        report = compute_H_tilde(run.phi, run.nl, ws, run.N, horizon)
    return "condition", report.as_dict()


def cmd_subadd(run: Run) -> Report:
    samples = run.config.run.samples
    report = check_h_inv_subadditive(run.phi, samples=samples, seed=run.seed)
    return "condition", report.as_dict()


def cmd_solve_ivp(run: Run) -> Report:
    settings = run.config.run
    profile = solve_ivp(
        run.phi,
        run.nl,
        run.weight.upper,
        run.N,
        settings.alpha,
        settings.r_max,
        run.controls,
        r_eval=np.linspace(0.0, settings.r_max, settings.points),
    )
    run.write_profile(profile, "profile")
    return _profile_report(run, profile)


def cmd_blowup_radius(run: Run) -> Report:
    settings = run.config.run
    horizon = run.config.geometry.horizon
    rho = run.weight.upper
    if settings.alphas:
        scan = existence_threshold(
            run.phi, run.nl, rho, run.N, settings.alphas, run.controls, horizon
        )
        return "existence", scan.as_dict()
    result = blowup_radius(
        run.phi, run.nl, rho, run.N, settings.alpha, run.controls, horizon
    )
    return "blowup", result.as_dict()


def cmd_solve_ball(run: Run) -> Report:
    profile = run.ball(run.weight.upper)
    run.write_profile(profile, "profile")
    return _profile_report(run, profile)


def cmd_verify_bounds(run: Run) -> Report:
    c = run.config.weight.constant
    if c is None or c <= 0.0:
        raise ConfigurationError("verify-bounds needs a positive constant weight")
    profile = run.ball(c)
    run.write_profile(profile, "profile")
    report = verify_sandwich(profile, run.phi, run.nl, c)
    return "sandwich", report.as_dict()


def cmd_sweep(run: Run) -> Report:
    settings = run.config.run
    result = boundary_sweep_blowup(
        run.phi,
        run.nl,
        run.weight.upper,
        run.N,
        run.config.geometry.L,
        settings.ladder,
        run.config.compact_radius,
        points=settings.points,
        controls=run.controls,
        threads=run.threads,
    )
    for index, profile in enumerate(result.profiles):
        run.write_profile(profile, f"profile_k{index}")
    return "sweep", result.as_dict()


def cmd_entire(run: Run) -> Report:
    settings = run.config.run
    result = entire_sandwich(
        run.phi,
        run.nl,
        run.weight,
        run.N,
        settings.alpha,
        settings.epsilon,
        run.config.geometry.horizon,
        controls=run.controls,
    )
    run.write_profile(result.upper_profile, "upper")
    run.write_profile(result.lower_profile, "lower")
    budget_path = os.path.join(run.out_dir, "budget.json")
    artifacts.write_json(result.budget.as_dict(), budget_path)
    return "certificate", result.certificate.as_dict()


def cmd_fd_check(run: Run) -> Report:
    geometry, settings = run.config.geometry, run.config.run
    rho = run.weight.upper

    def solve(k: float) -> typing.Any:
        return fd_solve(
            run.phi,
            run.nl,
            rho,
            run.N,
            geometry.L,
            k,
            M=settings.fd_cells,
            tol=settings.fd_tol,
        )

    fd = solve(settings.k)
    shooting = run.ball(rho, r_eval=fd.grid)
    comparison = fd_comparison_check(fd, solve(settings.k + 1.0))
    run.write_profile(fd.profile(run.phi), "fd")
    run.write_profile(shooting, "profile")
    report = {
        "M": fd.M,
        "k": fd.k,
        "sweeps": list(fd.sweeps),
        "sup_gap": float(np.max(np.abs(shooting.u - fd.v))),
        "shooting_centre": float(shooting.u[0]),
        "fd_centre": float(fd.v[0]),
        "comparison": comparison.as_dict(),
    }
    return "fd-check", report


HANDLERS: typing.Dict[str, typing.Callable[[Run], Report]] = {
    "indices": cmd_indices,
    "check-ko": cmd_check_ko,
    "check-arho": cmd_check_arho,
    "budget": cmd_budget,
    "subadd": cmd_subadd,
    "solve-ivp": cmd_solve_ivp,
    "blowup-radius": cmd_blowup_radius,
    "solve-ball": cmd_solve_ball,
    "verify-bounds": cmd_verify_bounds,
    "sweep": cmd_sweep,
    "entire": cmd_entire,
    "fd-check": cmd_fd_check,
}


def run_command(
    config: RunConfig,
    command: str,
    out_dir: str,
    seed: typing.Optional[int] = None,
    threads: typing.Optional[int] = None,
) -> int:
    """
    Dispatch a command and write its artifacts into out_dir. Returns the
    exit status.
    """
    if command not in HANDLERS:
        logger.error("unknown command %r", command)
        return EXIT_CONFIG_ERROR
    os.makedirs(out_dir, exist_ok=True)
    run = Run(
        config=config,
        out_dir=out_dir,
        seed=config.run.seed if seed is None else seed,
        threads=config.run.threads if threads is None else threads,
    )
    try:
        schema, report = HANDLERS[command](run)
        report = artifacts.to_json_value(report)
        validate_report(schema, report)
        envelope = {
            "command": command,
            "seed": run.seed,
            "report_schema": schema,
            "report": report,
        }
        validate_report("run", envelope)
        artifacts.write_json(envelope, os.path.join(out_dir, "report.json"))
    except PreconditionRejected as exc:
        logger.warning("%s rejected: %s", command, exc)
        rejection = artifacts.to_json_value(exc.as_dict())
        validate_report("rejection", rejection)
        artifacts.write_json(rejection, os.path.join(out_dir, "rejection.json"))
        return EXIT_REJECTED
    except (ConfigurationError, DomainError, StructuralError, Infeasible) as exc:
        logger.error("%s: %s", command, exc)
        return EXIT_CONFIG_ERROR
    except (NumericFailure, SolverDefect, NonConvergence) as exc:
        logger.error("%s failed: %s", command, exc)
        return EXIT_NUMERIC_FAILURE
    logger.info("%s finished, artifacts in %s", command, out_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="largesol",
        description="Boundary blow-up solutions of phi-Laplacian problems.",
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument(
        "--out-dir",
        default=None,
        help=f"artifact directory (default: ${OUT_DIR_ENV} or the working directory)",
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or os.getcwd()
    try:
        config = parse_config(args.config)
    except ConfigurationError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG_ERROR
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be at least 1")
        return EXIT_CONFIG_ERROR
    return run_command(
        config, args.command, out_dir, seed=args.seed, threads=args.threads
    )
