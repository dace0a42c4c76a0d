import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import linalg

from largesol.constants import COMPLETED, FD
from largesol.exceptions import DomainError, NonConvergence, SolverDefect
from largesol.nfunction import PhiSpec, eval_h
from largesol.problems import NonlinearitySpec
from largesol.radial import RadialProfile, Weight, radial_weight

logger = logging.getLogger(__name__)

MIN_CELLS = 64
FIRST_STEP = 1.0
STEP_GROWTH = 10.0
MAX_STEP = 1e14
MIN_STEP = 1e-12
STALL_SWEEPS = 50
MAX_SWEEPS = 400
NEWTON_STEPS = 50
LADDER_SLACK = 1e-10
NEWTON_TOLERANCE = 1e-12
COMPARISON_TOLERANCE = 1e-10


@dataclasses.dataclass
class FdSolution:
    """
    Discrete solution on the uniform grid 0 = r₀ < … < r_M = L, together with
    the limits of the ladders started from v ≡ 0 and from v ≡ k.
    """

    grid: np.ndarray
    v: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    flux: np.ndarray
    N: int
    L: float
    k: float
    tol: float
    sweeps: typing.Tuple[int, int]
    history: typing.Dict[str, typing.List[float]]
    params: typing.Dict[str, typing.Any] = dataclasses.field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.grid.size - 1

    def profile(self, phi: PhiSpec) -> RadialProfile:
        du = np.gradient(self.v, self.grid, edge_order=2)
        du[0] = 0.0
        du = np.maximum(du, 0.0)
        flux = self.grid ** (self.N - 1) * np.asarray(eval_h(phi, du))
        return RadialProfile(
            grid=self.grid,
            u=self.v,
            du=du,
            flux=flux,
            status=COMPLETED,
            N=self.N,
            alpha=float(self.v[0]),
            source=FD,
            params=dict(
                self.params, M=self.M, k=self.k, L=self.L, sweeps=list(self.sweeps)
            ),
        )


class FluxOperator:
    """
    Finite-volume form of (r^(N−1) h(v′))′ = r^(N−1) ρ f(v) with v_M = k pinned.
    """

    def __init__(
        self,
        phi: PhiSpec,
        nl: NonlinearitySpec,
        rho: Weight,
        N: int,
        L: float,
        k: float,
        M: int,
    ) -> None:
        self.phi = phi
        self.nl = nl
        self.N = N
        self.k = k
        self.grid = np.linspace(0.0, L, M + 1)
        self.dr = L / M
        halves = self.grid[:-1] + 0.5 * self.dr
        self.area = halves ** (N - 1)
        outer = halves**N
        inner = np.concatenate([[0.0], outer[:-1]])
        self.volume = (outer - inner) / N
        weight = np.asarray(radial_weight(rho)(self.grid[:-1]), dtype=float)
        if np.any(weight < 0.0) or not np.all(np.isfinite(weight)):
            raise DomainError("the weight must be finite and non-negative on [0, L]")
        self.source = self.volume * weight

    def h(self, s: np.ndarray) -> np.ndarray:
        return np.sign(s) * np.asarray(eval_h(self.phi, np.abs(s)))

    def dh(self, s: np.ndarray) -> np.ndarray:
        a = np.maximum(np.abs(s), 1e-12)
        step = 1e-6 * a
        above = np.asarray(eval_h(self.phi, a + step))
        below = np.asarray(eval_h(self.phi, a - step))
        return (above - below) / (2.0 * step)

    def f(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.nl.f(np.maximum(v, 0.0)))

    def df(self, v: np.ndarray) -> np.ndarray:
        base = np.maximum(v, 0.0)
        step = 1e-7 * np.maximum(base, 1.0)
        return (self.f(base + step) - self.f(base)) / step

    def slopes(self, v: np.ndarray) -> np.ndarray:
        full = np.append(v, self.k)
        return np.diff(full) / self.dr

    def fluxes(self, v: np.ndarray) -> np.ndarray:
        return self.area * self.h(self.slopes(v))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """
        A(v)_i = −(F_{i+1/2} − F_{i−1/2}) + V_i ρ_i f(v_i), zero at a solution.
        """
        flux = self.fluxes(v)
        previous = np.concatenate([[0.0], flux[:-1]])
        return previous - flux + self.source * self.f(v)

    def jacobian(self, v: np.ndarray, shift: np.ndarray) -> np.ndarray:
        """
        Banded form (upper, main, lower) of shift + dA/dv.
        """
        conductance = self.area * self.dh(self.slopes(v)) / self.dr
        main = shift + conductance + self.source * self.df(v)
        main[1:] += conductance[:-1]
        bands = np.zeros((3, v.size))
        bands[0, 1:] = -conductance[:-1]
        bands[1] = main
        bands[2, :-1] = -conductance[:-1]
        return bands


def _implicit_step(
    op: FluxOperator, previous: np.ndarray, tau: float
) -> typing.Optional[np.ndarray]:
    """
    Solve V (v − v_prev)/τ + A(v) = 0 by damped Newton, or None on failure.
    """
    shift = op.volume / tau

    def residual(v: np.ndarray) -> np.ndarray:
        return shift * (v - previous) + op.apply(v)

    v = previous.copy()
    current = residual(v)
    norm = float(np.max(np.abs(current)))
    for _ in range(NEWTON_STEPS):
        try:
            delta = linalg.solve_banded((1, 1), op.jacobian(v, shift), -current)
        except (linalg.LinAlgError, ValueError):
            return None
        if not np.all(np.isfinite(delta)):
            return None
        size = float(np.max(np.abs(delta)))
        floor = NEWTON_TOLERANCE * max(1.0, float(np.max(np.abs(v))))
        if size <= floor:
            return v + delta
        damping = 1.0
        while damping > 1e-6:
            trial = v + damping * delta
            trial_residual = residual(trial)
            trial_norm = float(np.max(np.abs(trial_residual)))
            if trial_norm <= norm or trial_norm < 1e-300:
                break
            damping *= 0.5
        else:
            # rounding floor of the residual
            if size <= 1e3 * floor:
                return v
            return None
        v, current, norm = trial, trial_residual, trial_norm
    return None


def _ladder(
    op: FluxOperator,
    start: np.ndarray,
    rising: bool,
    tol: float,
    max_sweeps: int,
) -> typing.Tuple[np.ndarray, typing.List[float]]:
    label = "lower" if rising else "upper"
    v = start.copy()
    tau = FIRST_STEP
    history: typing.List[float] = []
    best = math.inf
    since_best = 0
    target = tol * max(1.0, op.k)
    while True:
        if len(history) >= max_sweeps:
            raise NonConvergence(
                f"{label} ladder did not settle within {max_sweeps} sweeps", history
            )
        following = _implicit_step(op, v, tau)
        if following is None:
            tau *= 0.5
            if tau < MIN_STEP:
                raise NonConvergence(
                    f"{label} ladder: pseudo-time step collapsed", history
                )
            logger.debug("%s ladder: Newton failed, step reduced to %g", label, tau)
            continue
        allowance = LADDER_SLACK * (1.0 + np.abs(v))
        moved = following - v if rising else v - following
        if np.any(moved < -allowance):
            backwards = float(-np.min(moved))
            raise SolverDefect(
                f"{label} ladder is not monotone: backwards move {backwards:.3g}"
            )
        change = float(np.max(np.abs(following - v)))
        history.append(change)
        v = following
        if change < best:
            best, since_best = change, 0
        else:
            since_best += 1
        # A(v)/V = −(v − v_prev)/τ, so change/τ is the steady residual
        if change < target and change / tau <= tol:
            logger.debug("%s ladder settled after %d sweeps", label, len(history))
            return v, history
        if since_best >= STALL_SWEEPS:
            raise NonConvergence(
                f"{label} ladder stalled: no progress over {STALL_SWEEPS} sweeps",
                history,
            )
        tau = min(tau * STEP_GROWTH, MAX_STEP)


def fd_solve(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    L: float,
    k: float,
    M: int = 4096,
    tol: float = 1e-10,
    max_sweeps: int = MAX_SWEEPS,
) -> FdSolution:
    """
    Monotone iteration for the radial Dirichlet problem from the subsolution
    v ≡ 0 upward and from the supersolution v ≡ k downward.
    """
    if k < 0.0:
        raise DomainError("boundary value k must be non-negative")
    if L <= 0.0:
        raise DomainError("radius L must be positive")
    if M < MIN_CELLS:
        raise DomainError(f"the grid needs at least {MIN_CELLS} cells")
    if N < 1 or int(N) != N:
        raise DomainError("dimension N must be a positive integer")
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    op = FluxOperator(phi, nl, rho, int(N), float(L), float(k), int(M))
    lower, lower_history = _ladder(op, np.zeros(M), True, tol, max_sweeps)
    upper, upper_history = _ladder(op, np.full(M, float(k)), False, tol, max_sweeps)
    gap = float(np.max(np.abs(upper - lower)))
    if gap > 10.0 * tol * max(1.0, k):
        raise SolverDefect(f"sub and super limits differ by {gap:.3g}")
    lower = np.append(lower, k)
    upper = np.append(upper, k)
    logger.info(
        "fd solve M=%d k=%g: %d + %d sweeps, gap %.3g",
        M,
        k,
        len(lower_history),
        len(upper_history),
        gap,
    )
    return FdSolution(
        grid=op.grid,
        v=0.5 * (lower + upper),
        lower=lower,
        upper=upper,
        flux=op.fluxes(0.5 * (lower[:-1] + upper[:-1])),
        N=int(N),
        L=float(L),
        k=float(k),
        tol=tol,
        sweeps=(len(lower_history), len(upper_history)),
        history={"lower": lower_history, "upper": upper_history},
        params={"phi": phi.as_dict(), "f": nl.as_dict()},
    )


@dataclasses.dataclass
class ComparisonReport:
    ordered: bool
    equal: bool
    worst_margin: float
    worst_radius: float
    tolerance: float

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return dataclasses.asdict(self)


def fd_comparison_check(
    smaller: FdSolution,
    larger: FdSolution,
    tolerance: float = COMPARISON_TOLERANCE,
    strict: bool = True,
) -> ComparisonReport:
    """
    Check smaller ≤ larger pointwise for solutions with ordered data.
    """
    same_shape = smaller.grid.shape == larger.grid.shape
    if not same_shape or not np.allclose(smaller.grid, larger.grid):
        raise DomainError("solutions must share the grid")
    margin = larger.v - smaller.v
    allowance = tolerance * (1.0 + np.abs(larger.v))
    worst = int(np.argmin(margin))
    report = ComparisonReport(
        ordered=bool(np.all(margin >= -allowance)),
        equal=bool(np.all(np.abs(margin) <= allowance)),
        worst_margin=float(margin[worst]),
        worst_radius=float(smaller.grid[worst]),
        tolerance=tolerance,
    )
    if strict and not report.ordered:
        raise SolverDefect(
            f"comparison violated at r = {report.worst_radius:.6g}: "
            f"margin {report.worst_margin:.3g}"
        )
    return report
