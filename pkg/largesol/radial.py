import dataclasses
import functools
import logging
import math
import typing

import anyio
import numpy as np
from scipy import integrate, interpolate, optimize

from largesol.conditions import (
    ConditionReport,
    check_A_rho,
    check_h_inv_subadditive,
    check_KO,
    compute_H_bar,
)
from largesol.constants import (
    BLOW_UP,
    BOUNDARY_BLOW_UP_EXISTENCE,
    COMPLETED,
    CONVERGES,
    DIVERGES,
    ENTIRE_EXISTENCE,
    GLOBAL,
    GLOBAL_UNCONFIRMED,
    GROWTH_LOWER_WEIGHT,
    KELLER_OSSERMAN,
    LOWER,
    OSCILLATION_BUDGET,
    SHOOTING,
    SUBADDITIVITY,
)
from largesol.exceptions import (
    DomainError,
    Infeasible,
    NumericFailure,
    PreconditionRejected,
    SolverDefect,
    StructuralError,
)
from largesol.nfunction import PhiSpec, eval_h, eval_h_inv, eval_Phi_inv, xi_eta
from largesol.numerics import cumulative, quad, shanks, vectorized
from largesol.problems import (
    CalF,
    NonlinearitySpec,
    WeightSpec,
    cumulative_average,
    eval_G,
)

logger = logging.getLogger(__name__)

CROSSING_LEVELS = (1e4, 1e6, 1e8)
EXPLOSIVE_RATIO = 0.5
ORDER_SLACK = 1e-8
SANDWICH_SLACK = 1e-6
SHORT_RISE = 1e-3
STABILIZED_INCREMENT = 1e-4
SHANKS_ORDER = 2

Weight = typing.Union[float, typing.Callable]


def radial_weight(rho: Weight) -> typing.Callable:
    if isinstance(rho, (int, float)):
        constant = float(rho)
        return vectorized(lambda r: np.full_like(np.asarray(r, dtype=float), constant))
    return vectorized(rho)


@dataclasses.dataclass
class SolverControls:
    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    first_radius: float = 1e-6
    threshold: float = 1e8
    max_step: float = math.inf


@dataclasses.dataclass
class RadialProfile:
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    flux: np.ndarray
    status: str
    N: int
    alpha: float
    gamma: typing.Optional[float] = None
    bracket: typing.Optional[typing.Tuple[float, float]] = None
    source: str = SHOOTING
    params: typing.Dict[str, typing.Any] = dataclasses.field(default_factory=dict)

    @property
    def radius(self) -> float:
        return float(self.grid[-1])

    @functools.cached_property
    def _spline(self) -> interpolate.CubicHermiteSpline:
        return interpolate.CubicHermiteSpline(self.grid, self.u, self.du)

    def at(self, r: typing.Union[float, np.ndarray]) -> typing.Union[float, np.ndarray]:
        values = self._spline(r)
        if np.ndim(r) == 0:
            return float(values)
        return np.asarray(values)

    def flux_residual(self, phi: PhiSpec) -> float:
        """
        Largest relative defect of r^(N−1) h(u′) = Q over the grid.
        """
        lhs = self.grid ** (self.N - 1) * np.asarray(eval_h(phi, self.du))
        scale = np.maximum(np.abs(self.flux), 1e-300)
        defect = np.where(self.flux > 0.0, np.abs(lhs - self.flux) / scale, np.abs(lhs))
        return float(np.max(defect))

    def metadata(self) -> typing.Dict[str, typing.Any]:
        gamma = self.gamma
        if gamma is not None and not math.isfinite(gamma):
            gamma = None
        bracket = None
        if self.bracket is not None:
            bracket = [b if math.isfinite(b) else None for b in self.bracket]
        return {
            "source": self.source,
            "status": self.status,
            "N": self.N,
            "alpha": self.alpha,
            "radius": self.radius,
            "points": int(self.grid.size),
            "gamma": gamma,
            "bracket": bracket,
            "params": dict(self.params),
        }


@dataclasses.dataclass
class BlowupRadius:
    alpha: float
    gamma: float
    bracket: typing.Tuple[float, float]
    threshold: float
    status: str
    crossings: typing.List[typing.Tuple[float, float]] = dataclasses.field(
        default_factory=list
    )

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        def finite(value: float) -> typing.Optional[float]:
            return value if math.isfinite(value) else None

        return {
            "alpha": self.alpha,
            "gamma": finite(self.gamma),
            "bracket": [finite(b) for b in self.bracket],
            "threshold": self.threshold,
            "status": self.status,
            "crossings": [[level, radius] for level, radius in self.crossings],
        }


class RadialSystem:
    """
    The first-order form u′ = h⁻¹(r^(1−N) Q), Q′ = r^(N−1) ρ(r) f(u).
    """

    def __init__(
        self, phi: PhiSpec, nl: NonlinearitySpec, rho: Weight, N: int
    ) -> None:
        if N < 1 or int(N) != N:
            raise DomainError("dimension N must be a positive integer")
        self.phi = phi
        self.nl = nl
        self.N = int(N)
        self.rho = radial_weight(rho)

    def check_weight(self, r_max: float) -> None:
        sample = np.asarray(self.rho(np.linspace(0.0, r_max, 257)))
        if np.any(sample < 0.0) or not np.all(np.isfinite(sample)):
            raise DomainError(
                "the weight must be finite and non-negative on [0, r_max]"
            )

    def slope(self, r: float, Q: float) -> float:
        if r <= 0.0 or Q <= 0.0:
            return 0.0
        return float(eval_h_inv(self.phi, Q * r ** (1 - self.N)))

    def slopes(self, grid: np.ndarray, flux: np.ndarray) -> np.ndarray:
        positive = (grid > 0.0) & (flux > 0.0)
        out = np.zeros_like(grid)
        if np.any(positive):
            out[positive] = eval_h_inv(
                self.phi, flux[positive] * grid[positive] ** (1 - self.N)
            )
        return out

    def rhs(self, r: float, y: np.ndarray) -> typing.List[float]:
        u, Q = y
        source = r ** (self.N - 1) * float(self.rho(r)) * float(self.nl.f(max(u, 0.0)))
        return [self.slope(r, Q), source]

    def series(self, alpha: float, r: float) -> typing.Tuple[float, float]:
        """
        Leading-order state at a small radius: Q ≈ ρ(0) f(α) r^N / N.
        """
        c0 = float(self.rho(0.0)) * float(self.nl.f(alpha))
        if c0 <= 0.0 or r == 0.0:
            return alpha, 0.0
        flux = c0 * r**self.N / self.N
        rise = quad(lambda s: float(eval_h_inv(self.phi, c0 * s / self.N)), 0.0, r)
        return alpha + rise, flux


def _crossing_event(level: float, terminal: bool) -> typing.Callable:
    def event(r: float, y: np.ndarray) -> float:
        return float(y[0] - level)

    event.terminal = terminal  # type: ignore[attr-defined]
    event.direction = 1.0  # type: ignore[attr-defined]
    return event


def _first_radius(controls: SolverControls, r_max: float) -> float:
    return min(controls.first_radius, 1e-3 * r_max)


def _run(
    system: RadialSystem,
    span: typing.Tuple[float, float],
    state: typing.Sequence[float],
    controls: SolverControls,
    events: typing.List[typing.Callable],
    flux_scale: float,
) -> typing.Any:
    return integrate.solve_ivp(
        system.rhs,
        span,
        list(state),
        method=controls.method,
        rtol=controls.rtol,
        atol=[controls.atol, max(controls.rtol * flux_scale, 1e-300)],
        events=events or None,
        dense_output=True,
        max_step=controls.max_step,
    )


def _local_blowup(
    system: RadialSystem, radii: np.ndarray, states: np.ndarray
) -> typing.Tuple[float, float]:
    """
    Blow-up radius estimate from the last two accepted states, assuming
    u ~ C (Γ − r)^(−β) locally, so that u/u′ is linear in r.
    """
    r_b = float(radii[-1])
    u_b, q_b = states[:, -1]
    w_b = u_b / max(system.slope(r_b, q_b), 1e-300)
    if radii.size < 2:
        return r_b, r_b + w_b
    r_a = float(radii[-2])
    u_a, q_a = states[:, -2]
    w_a = u_a / max(system.slope(r_a, q_a), 1e-300)
    drift = (w_b - w_a) / (r_b - r_a) if r_b > r_a else 0.0
    beta = -1.0 / drift if drift < 0.0 else 1.0
    gamma = r_b + beta * w_b
    return gamma, max(gamma, r_b) + max(gamma - r_b, 1e-12 * max(r_b, 1.0))


def _profile_from(
    system: RadialSystem,
    alpha: float,
    r1: float,
    sol: typing.Any,
    r_eval: typing.Optional[np.ndarray],
    status: str,
) -> typing.Tuple[np.ndarray, np.ndarray]:
    reached = float(sol.t[-1])
    if r_eval is None:
        grid = np.concatenate([[0.0], sol.t])
        states = np.concatenate([[[alpha], [0.0]], sol.y], axis=1)
        return grid, states
    r_eval = np.asarray(r_eval, dtype=float)
    near = r_eval[r_eval < r1]
    inside = r_eval[(r_eval >= r1) & (r_eval <= reached)]
    columns = [np.array(system.series(alpha, float(r))).reshape(2, 1) for r in near]
    if inside.size:
        columns.append(np.asarray(sol.sol(inside)).reshape(2, -1))
    grid = np.concatenate([near, inside])
    if status == BLOW_UP and (grid.size == 0 or reached > grid[-1]):
        grid = np.concatenate([grid, [reached]])
        columns.append(sol.y[:, -1:])
    return grid, np.concatenate(columns, axis=1)


def _integrate_profile(
    system: RadialSystem,
    alpha: float,
    r_max: float,
    controls: SolverControls,
    r_eval: typing.Optional[np.ndarray],
) -> RadialProfile:
    r1 = _first_radius(controls, r_max)
    u1, q1 = system.series(alpha, r1)
    event = _crossing_event(controls.threshold, terminal=True)
    sol = _run(system, (r1, r_max), (u1, q1), controls, [event], q1)
    gamma: typing.Optional[float] = None
    bracket: typing.Optional[typing.Tuple[float, float]] = None
    if sol.status == 0:
        status = COMPLETED
    elif sol.status == 1:
        status = BLOW_UP
    elif sol.y.shape[1] and sol.y[0, -1] >= math.sqrt(controls.threshold):
        status = BLOW_UP
        logger.debug("step size collapsed at r=%g, treated as blow-up", sol.t[-1])
    else:
        raise NumericFailure(f"radial integration failed: {sol.message}", partial=sol)
    if status == BLOW_UP:
        gamma, upper = _local_blowup(system, sol.t, sol.y)
        bracket = (float(sol.t[-1]), upper)
    grid, states = _profile_from(system, alpha, r1, sol, r_eval, status)
    if grid.size == 0 or grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
        states = np.concatenate([[[alpha], [0.0]], states], axis=1)
    u, flux = states
    logger.debug(
        "radial solve alpha=%g: %s at r=%g after %d steps",
        alpha,
        status,
        sol.t[-1],
        sol.t.size,
    )
    return RadialProfile(
        grid=grid,
        u=u,
        du=system.slopes(grid, flux),
        flux=flux,
        status=status,
        N=system.N,
        alpha=alpha,
        gamma=gamma,
        bracket=bracket,
        params={"phi": system.phi.as_dict(), "f": system.nl.as_dict()},
    )


def _check_eval(
    r_eval: typing.Optional[typing.Sequence[float]], r_max: float
) -> typing.Optional[np.ndarray]:
    if r_eval is None:
        return None
    grid = np.asarray(r_eval, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError("evaluation radii must be a non-empty sequence")
    if np.any(np.diff(grid) <= 0.0) or grid[0] < 0.0 or grid[-1] > r_max * (1 + 1e-12):
        raise DomainError("evaluation radii must increase within [0, r_max]")
    return grid


def solve_ivp(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    alpha: float,
    r_max: float,
    controls: typing.Optional[SolverControls] = None,
    r_eval: typing.Optional[typing.Sequence[float]] = None,
) -> RadialProfile:
    """
    Integrate (r^(N−1) φ(|u′|) u′)′ = r^(N−1) ρ(r) f(u), u(0) = α, u′(0) = 0
    up to r_max or until u crosses the blow-up threshold.
    """
    if alpha < 0.0:
        raise DomainError("the initial value must be non-negative")
    if r_max <= 0.0:
        raise DomainError("r_max must be positive")
    controls = controls or SolverControls()
    system = RadialSystem(phi, nl, rho, N)
    system.check_weight(r_max)
    grid = _check_eval(r_eval, r_max)
    return _integrate_profile(system, float(alpha), float(r_max), controls, grid)


def blowup_radius(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    alpha: float,
    controls: typing.Optional[SolverControls] = None,
    horizon: float = 1e3,
) -> BlowupRadius:
    """
    Estimate Γ(α) from the radii where u crosses a ladder of thresholds.

    The crossing gaps of an explosive solution shrink geometrically and are
    extrapolated with Aitken's rule; gaps that do not shrink leave the
    decision to the Keller-Osserman classifier.
    """
    if alpha <= 0.0:
        raise DomainError("the initial value must be positive")
    controls = controls or SolverControls()
    system = RadialSystem(phi, nl, rho, N)
    system.check_weight(min(horizon, 1e3))
    levels = [max(alpha, 1.0) * level for level in CROSSING_LEVELS]
    r_a = _first_radius(controls, horizon)
    state = list(system.series(alpha, r_a))
    flux_scale = state[1]
    r_b = min(1.0, horizon)
    crossings: typing.Dict[float, float] = {}
    collapsed: typing.Optional[typing.Tuple[float, float]] = None
    while True:
        pending = [level for level in levels if level not in crossings]
        events = [_crossing_event(level, level == levels[-1]) for level in pending]
        sol = _run(system, (r_a, r_b), state, controls, events, flux_scale)
        for level, times in zip(pending, sol.t_events or []):
            if len(times):
                crossings[level] = float(times[0])
        logger.info(
            "blow-up scan alpha=%g segment [%g, %g]: %d crossings",
            alpha,
            r_a,
            r_b,
            len(crossings),
        )
        if sol.status == 1:
            break
        if sol.status == -1:
            collapsed = _local_blowup(system, sol.t, sol.y)
            break
        if r_b >= horizon:
            break
        r_a, state = r_b, list(sol.y[:, -1])
        r_b = min(4.0 * r_b, horizon)

    found = [(level, crossings[level]) for level in levels if level in crossings]
    top = levels[-1]
    if len(found) == 3:
        (_, r1), (_, r2), (_, r3) = found
        d1, d2 = r2 - r1, r3 - r2
        ratio = d2 / d1 if d1 > 0.0 else math.inf
        explosive = ratio < EXPLOSIVE_RATIO
        ko: typing.Optional[ConditionReport] = None
        if not explosive and ratio < 1.0:
            ko = check_KO(phi, nl)
            explosive = ko.converges
        if explosive:
            gamma = r3 + d2 * ratio / (1.0 - ratio)
            return BlowupRadius(alpha, gamma, (r3, gamma + d2), top, BLOW_UP, found)
    if collapsed is not None:
        gamma, upper = collapsed
        bracket = (float(sol.t[-1]), upper)
        return BlowupRadius(alpha, gamma, bracket, top, BLOW_UP, found)
    ko = check_KO(phi, nl)
    status = GLOBAL if ko.diverges else GLOBAL_UNCONFIRMED
    reached = found[-1][1] if found else float(sol.t[-1])
    return BlowupRadius(alpha, math.inf, (reached, math.inf), top, status, found)


@dataclasses.dataclass
class ExistenceScan:
    alphas: typing.List[float]
    results: typing.List[BlowupRadius]
    threshold: float

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "alphas": list(self.alphas),
            "results": [r.as_dict() for r in self.results],
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
            "threshold_infinite": not math.isfinite(self.threshold),
        }


def existence_threshold(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    alphas: typing.Sequence[float],
    controls: typing.Optional[SolverControls] = None,
    horizon: float = 1e3,
) -> ExistenceScan:
    """
    Sample A = sup{α : the radial solution starting at α is global}.
    """
    ordered = sorted(float(a) for a in alphas)
    if not ordered:
        raise DomainError("at least one initial value is required")
    results = [blowup_radius(phi, nl, rho, N, a, controls, horizon) for a in ordered]
    survivors = [r.alpha for r in results if r.status != BLOW_UP]
    if not survivors:
        threshold = 0.0
    elif len(survivors) == len(results) and all(r.status == GLOBAL for r in results):
        threshold = math.inf
    else:
        threshold = max(survivors)
    return ExistenceScan(ordered, results, threshold)


def _zero_profile(
    system: RadialSystem, L: float, r_eval: typing.Optional[np.ndarray]
) -> RadialProfile:
    grid = r_eval if r_eval is not None else np.array([0.0, L])
    zeros = np.zeros_like(grid)
    return RadialProfile(
        grid=grid,
        u=zeros,
        du=zeros.copy(),
        flux=zeros.copy(),
        status=COMPLETED,
        N=system.N,
        alpha=0.0,
        params={
            "phi": system.phi.as_dict(),
            "f": system.nl.as_dict(),
            "k": 0.0,
            "L": L,
        },
    )


def solve_ball_dirichlet(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    L: float,
    k: float,
    tol: float = 1e-8,
    controls: typing.Optional[SolverControls] = None,
    r_eval: typing.Optional[typing.Sequence[float]] = None,
) -> RadialProfile:
    """
    Radial solution of Δ_φ v = ρ f(v) in the ball of radius L with v = k on
    the boundary, by shooting on v(0) ∈ [0, k].
    """
    if k < 0.0:
        raise DomainError("boundary value k must be non-negative")
    if L <= 0.0:
        raise DomainError("radius L must be positive")
    controls = controls or SolverControls()
    grid = _check_eval(r_eval, L)
    if grid is not None and grid[-1] < L:
        grid = np.concatenate([grid, [L]])
    system = RadialSystem(phi, nl, rho, N)
    system.check_weight(L)
    if k == 0.0:
        return _zero_profile(system, L, grid)
    shooting = dataclasses.replace(controls, threshold=max(controls.threshold, 1e3 * k))

    def miss(alpha: float) -> float:
        if alpha <= 0.0:
            return -k
        profile = _integrate_profile(system, alpha, L, shooting, None)
        if profile.status == BLOW_UP:
            return shooting.threshold - k
        return min(float(profile.u[-1]), shooting.threshold) - k

    top = miss(k)
    if top < -tol * max(1.0, k):
        raise Infeasible(f"u_k(L) = {top + k:.6g} lies below k = {k:.6g}")
    if top <= tol * max(1.0, k):
        alpha = k
    else:
        xtol = max(1e-15 * k, 1e-300)
        alpha = optimize.brentq(miss, 0.0, k, xtol=xtol, rtol=1e-14, maxiter=200)
    profile = _integrate_profile(system, alpha, L, shooting, grid)
    residual = abs(float(profile.u[-1]) - k)
    if profile.status != COMPLETED or residual > tol * max(1.0, k):
        raise NumericFailure(
            f"shooting missed the boundary value by {residual:.3g}", partial=profile
        )
    profile.params.update({"k": k, "L": L})
    logger.debug("ball solve k=%g L=%g: v(0)=%.12g", k, L, alpha)
    return profile


@dataclasses.dataclass
class SandwichReport:
    radii: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    skipped: np.ndarray
    slack: float

    @property
    def lower_margin(self) -> np.ndarray:
        return self.radii - self.lower

    @property
    def upper_margin(self) -> np.ndarray:
        return self.upper - self.radii

    @property
    def passed(self) -> bool:
        if self.skipped.any():
            return False
        allowance = self.slack * (1.0 + self.radii)
        return bool(
            np.all(self.lower_margin >= -allowance)
            and np.all(self.upper_margin >= -allowance)
        )

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "radii": self.radii.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "lower_margin": self.lower_margin.tolist(),
            "upper_margin": self.upper_margin.tolist(),
            "skipped": self.skipped.tolist(),
            "passed": self.passed,
        }


def _sandwich_exponent(l: float) -> float:  # noqa: E741
    if l <= 1.0:
        return 12.0
    return min(max(2.0, l / (l - 1.0) + 1.0), 12.0)


def verify_sandwich(
    profile: RadialProfile,
    phi: PhiSpec,
    nl: NonlinearitySpec,
    c: float,
    l1: typing.Optional[float] = None,
    m1: typing.Optional[float] = None,
    N: typing.Optional[int] = None,
    points: int = 32,
    slack: float = SANDWICH_SLACK,
) -> SandwichReport:
    """
    Check ∫ dτ/Φ⁻¹((c/l₁) G(v₀, τ)) ≤ r ≤ ∫ dτ/Φ⁻¹((c/(m₁N)) G(v₀, τ)),
    both integrals over [v₀, v(r)], at up to `points` grid radii.
    """
    indices = phi.indices
    l1 = indices.l1 if l1 is None else l1
    m1 = indices.m1 if m1 is None else m1
    N = profile.N if N is None else N
    v0 = float(profile.u[0])
    q = _sandwich_exponent(indices.l)
    size = profile.grid.size
    chosen = np.unique(np.linspace(0, size - 1, min(points, size)).round().astype(int))
    radii = profile.grid[chosen]
    lower = np.zeros_like(radii)
    upper = np.zeros_like(radii)
    skipped = np.zeros(radii.shape, dtype=bool)
    f0 = float(nl.f(v0))
    short = SHORT_RISE * max(1.0, v0)

    def rise_G(step: float) -> float:
        if step < 1e-12 * max(1.0, v0):
            return f0 * step
        if step <= short:
            middle = float(nl.f(v0 + 0.5 * step))
            return step * (f0 + 4.0 * middle + float(nl.f(v0 + step))) / 6.0
        return eval_G(nl, v0, v0 + step)

    def tau_integral(kappa: float, rise: float) -> float:
        def integrand(x: float) -> float:
            G = rise_G(rise * x**q)
            if G <= 0.0:
                return 0.0
            return q * rise * x ** (q - 1.0) / float(eval_Phi_inv(phi, kappa * G))

        try:
            return quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10)
        except NumericFailure:
            # still well inside SANDWICH_SLACK
            return quad(integrand, 0.0, 1.0, epsabs=1e-11, epsrel=1e-8)

    for i, index in enumerate(chosen):
        rise = float(profile.u[index]) - v0
        if rise <= 0.0:
            continue
        try:
            lower[i] = tau_integral(c / l1, rise)
            upper[i] = tau_integral(c / (m1 * N), rise)
        except (NumericFailure, DomainError) as exc:
            logger.warning("sandwich quadrature skipped at r=%g: %s", radii[i], exc)
            skipped[i] = True
    return SandwichReport(radii, lower, upper, skipped, slack)


@dataclasses.dataclass
class SweepResult:
    profiles: typing.List[RadialProfile]
    k_sequence: typing.List[float]
    radii: np.ndarray
    limit: np.ndarray
    raw_increments: typing.List[float]
    extrapolated_increments: typing.List[float]
    compact_radius: float

    @property
    def stabilized(self) -> bool:
        return bool(
            self.extrapolated_increments
            and self.extrapolated_increments[-1] < STABILIZED_INCREMENT
        )

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "k_sequence": list(self.k_sequence),
            "compact_radius": self.compact_radius,
            "radii": self.radii.tolist(),
            "limit": self.limit.tolist(),
            "raw_increments": list(self.raw_increments),
            "extrapolated_increments": list(self.extrapolated_increments),
            "stabilized": self.stabilized,
            "centre_values": [float(p.u[0]) for p in self.profiles],
        }


def _guard_keller_osserman(phi: PhiSpec, nl: NonlinearitySpec) -> ConditionReport:
    tested = nl if nl.monotone else nl.envelope("lower")
    report = check_KO(phi, tested)
    if not report.converges:
        raise PreconditionRejected(
            KELLER_OSSERMAN,
            report.verdict,
            "boundary blow-up needs a convergent Keller-Osserman integral; "
            f"the integral {report.verdict}, so the boundary ladder grows without "
            "bound at every interior point and no large solution exists",
            BOUNDARY_BLOW_UP_EXISTENCE,
        )
    return report


async def boundary_sweep_blowup_async(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    L: float,
    k_sequence: typing.Sequence[float],
    compact_radius: float,
    points: int = 201,
    controls: typing.Optional[SolverControls] = None,
    threads: int = 1,
) -> SweepResult:
    ks = [float(k) for k in k_sequence]
    if not ks or any(b <= a for a, b in zip(ks[:-1], ks[1:])):
        raise DomainError("the boundary ladder must be strictly increasing")
    if not 0.0 < compact_radius < L:
        raise DomainError("the compact radius must lie in (0, L)")
    _guard_keller_osserman(phi, nl)
    grid = np.linspace(0.0, L, points)
    profiles: typing.List[typing.Optional[RadialProfile]] = [None] * len(ks)
    limiter = anyio.CapacityLimiter(max(1, threads))

    async def member(index: int) -> None:
        solve = functools.partial(
            solve_ball_dirichlet,
            phi,
            nl,
            rho,
            N,
            L,
            ks[index],
            controls=controls,
            r_eval=grid,
        )
        profiles[index] = await anyio.to_thread.run_sync(solve, limiter=limiter)
        logger.info("sweep member k=%g: v(0)=%.10g", ks[index], profiles[index].u[0])

    async with anyio.create_task_group() as tg:
        for index in range(len(ks)):
            tg.start_soon(member, index)

    solved = typing.cast(typing.List[RadialProfile], profiles)
    for previous, current in zip(solved[:-1], solved[1:]):
        allowance = ORDER_SLACK * (1.0 + np.abs(current.u))
        if np.any(previous.u > current.u + allowance):
            worst = float(np.max(previous.u - current.u))
            raise SolverDefect(f"boundary ladder is not monotone: excess {worst:.3g}")

    interior = grid <= compact_radius
    values = [p.u[interior] for p in solved]
    raw = [float(np.max(np.abs(b - a))) for a, b in zip(values[:-1], values[1:])]
    order = min(SHANKS_ORDER, (len(values) - 1) // 2)
    extrapolated = shanks(values, order) if order else []
    extrapolated_increments = [
        float(np.max(np.abs(b - a)))
        for a, b in zip(extrapolated[:-1], extrapolated[1:])
    ]
    limit = extrapolated[-1] if extrapolated else values[-1]
    return SweepResult(
        profiles=solved,
        k_sequence=ks,
        radii=grid[interior],
        limit=limit,
        raw_increments=raw,
        extrapolated_increments=extrapolated_increments,
        compact_radius=compact_radius,
    )


def boundary_sweep_blowup(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    rho: Weight,
    N: int,
    L: float,
    k_sequence: typing.Sequence[float],
    compact_radius: float,
    points: int = 201,
    controls: typing.Optional[SolverControls] = None,
    threads: int = 1,
) -> SweepResult:
    """
    Solve the ball problem along an increasing boundary ladder and extrapolate
    the interior limit on [0, compact_radius].
    """
    return anyio.run(
        functools.partial(
            boundary_sweep_blowup_async,
            phi,
            nl,
            rho,
            N,
            L,
            k_sequence,
            compact_radius,
            points=points,
            controls=controls,
            threads=threads,
        )
    )


@dataclasses.dataclass
class Certificate:
    alpha: float
    beta: float
    epsilon: float
    budget: float
    budget_verdict: str
    budget_truncated: bool
    ordered: bool
    worst_margin: float
    estimate_from: typing.Optional[float]
    estimate_holds: bool
    minorant_holds: bool
    horizon: float

    @property
    def passed(self) -> bool:
        return self.ordered and self.estimate_holds and self.minorant_holds

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        data = dataclasses.asdict(self)
        data["passed"] = self.passed
        return data


@dataclasses.dataclass
class EntireSandwich:
    upper_profile: RadialProfile
    lower_profile: RadialProfile
    certificate: Certificate
    budget: ConditionReport


def _entire_preconditions(
    phi: PhiSpec, nl: NonlinearitySpec, ws: WeightSpec, N: int, horizon: float
) -> ConditionReport:
    growth = check_A_rho(phi, ws, LOWER, N)
    if not growth.diverges:
        raise PreconditionRejected(
            GROWTH_LOWER_WEIGHT,
            growth.verdict,
            "the entire-space construction needs ∫ h⁻¹(𝓐(s)) ds = ∞ "
            "for the lower weight",
            ENTIRE_EXISTENCE,
        )
    ko = check_KO(phi, nl)
    if not ko.diverges:
        raise PreconditionRejected(
            KELLER_OSSERMAN,
            ko.verdict,
            "the entire-space construction needs f not to satisfy the "
            "Keller-Osserman condition",
            ENTIRE_EXISTENCE,
        )
    subadditive = check_h_inv_subadditive(phi)
    if not subadditive.holds:
        raise PreconditionRejected(
            SUBADDITIVITY,
            subadditive.verdict,
            f"h⁻¹ is not subadditive: witness {subadditive.witness}",
            ENTIRE_EXISTENCE,
        )
    try:
        budget = compute_H_bar(phi, nl, ws, N, horizon)
    except StructuralError as exc:
        raise PreconditionRejected(
            OSCILLATION_BUDGET, "undefined", str(exc), ENTIRE_EXISTENCE
        ) from exc
    if budget.verdict == DIVERGES:
        raise PreconditionRejected(
            OSCILLATION_BUDGET,
            budget.verdict,
            "the oscillation budget H̄ diverges; the value on the horizon "
            f"({budget.value}) is a truncation, not a finite budget",
            ENTIRE_EXISTENCE,
        )
    if budget.value is None or not math.isfinite(budget.value):
        raise PreconditionRejected(
            OSCILLATION_BUDGET,
            budget.verdict,
            "the oscillation budget is not finite",
            ENTIRE_EXISTENCE,
        )
    if budget.verdict != CONVERGES:
        logger.warning(
            "oscillation budget is %s; certifying with the value truncated at %g",
            budget.verdict,
            horizon,
        )
    return budget


def entire_sandwich(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    ws: WeightSpec,
    N: int,
    alpha: float,
    epsilon: float,
    horizon: float,
    points: int = 2001,
    controls: typing.Optional[SolverControls] = None,
) -> EntireSandwich:
    """
    Build u_α for the upper weight and u_β for the lower weight with
    β = α + ε + H̄ and certify u_α ≤ u_β on [0, horizon].
    """
    if alpha <= 0.0 or epsilon <= 0.0 or horizon <= 0.0:
        raise DomainError("alpha, epsilon and horizon must be positive")
    budget = _entire_preconditions(phi, nl, ws, N, horizon)
    beta = alpha + epsilon + float(budget.value or 0.0)
    grid = np.linspace(0.0, horizon, points)
    upper = solve_ivp(phi, nl, ws.upper, N, alpha, horizon, controls, r_eval=grid)
    lower = solve_ivp(phi, nl, ws.lower, N, beta, horizon, controls, r_eval=grid)
    if upper.status != COMPLETED or lower.status != COMPLETED:
        raise NumericFailure(
            "a radial solution blew up inside the horizon", partial=(upper, lower)
        )

    margin = lower.u - upper.u
    ordered = bool(np.all(margin >= -ORDER_SLACK * (1.0 + np.abs(lower.u))))

    upper_average = cumulative_average(ws.upper, grid, N)
    reach = cumulative(np.asarray(eval_h_inv(phi, upper_average)), grid)
    calf = CalF(nl, phi.indices.l1)
    bound = np.full_like(grid, np.nan)
    for i, value in enumerate(reach):
        try:
            bound[i] = calf.inverse(float(value))
        except StructuralError:
            continue
    defined = np.isfinite(bound)
    holds = ~defined | (upper.u <= bound * (1.0 + 1e-9) + 1e-12)
    failing = np.flatnonzero(~holds)
    if failing.size == 0:
        estimate_from: typing.Optional[float] = 0.0
    elif failing[-1] + 1 < grid.size:
        estimate_from = float(grid[failing[-1] + 1])
    else:
        estimate_from = None
    estimate_holds = estimate_from is not None and estimate_from <= horizon / 2.0

    minorant = alpha + float(xi_eta(phi, "eta3", float(nl.f(alpha)))) * reach
    minorant_holds = bool(np.all(minorant <= upper.u * (1.0 + 1e-9) + 1e-9))

    certificate = Certificate(
        alpha=alpha,
        beta=beta,
        epsilon=epsilon,
        budget=float(budget.value or 0.0),
        budget_verdict=budget.verdict,
        budget_truncated=budget.verdict != CONVERGES,
        ordered=ordered,
        worst_margin=float(np.min(margin)),
        estimate_from=estimate_from,
        estimate_holds=estimate_holds,
        minorant_holds=minorant_holds,
        horizon=horizon,
    )
    logger.info("entire sandwich certificate: %s", certificate)
    return EntireSandwich(upper, lower, certificate, budget)
