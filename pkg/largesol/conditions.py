import dataclasses
import logging
import math
import typing

import numpy as np

from largesol.constants import (
    A_RHO,
    ANALYTIC,
    BALL_LOWER,
    BALL_UPPER,
    CONSTANT_TWO,
    CONVERGES,
    DIVERGES,
    FAILS,
    FITTED,
    H_BAR,
    H_INV_SUBADDITIVE,
    H_TILDE,
    HOLDS,
    INCONCLUSIVE,
    KO,
    POWER,
    SAMPLED,
)
from largesol.exceptions import DomainError, StructuralError
from largesol.nfunction import PhiSpec, eval_h_inv, eval_Phi, eval_Phi_inv, xi_eta
from largesol.numerics import cumulative, fit_log_slope, quad
from largesol.problems import (
    CalF,
    NonlinearitySpec,
    WeightSpec,
    average_weight,
    cumulative_average,
    eval_F,
)

logger = logging.getLogger(__name__)

DEFAULT_CUTOFFS = [10.0**k for k in range(1, 7)]
LADDER_LIMIT = 1e9
RESIDUAL_THRESHOLD = 0.05
DIVERGENCE_SLOPE = -0.001
CONVERGENCE_SLOPE = -0.02
SUBADDITIVE_SLACK = 1e-9
MIN_SUBADDITIVE_SAMPLES = 10_000
BUDGET_POINTS = 4001
BUDGET_CUTOFFS = 6


@dataclasses.dataclass
class ConditionReport:
    condition_id: str
    cutoffs: typing.List[float]
    partial_values: typing.List[float]
    verdict: str
    confidence: str
    fitted_tail_exponent: typing.Optional[float] = None
    residual: typing.Optional[float] = None
    fitted_verdict: typing.Optional[str] = None
    value: typing.Optional[float] = None
    witness: typing.Optional[typing.Dict[str, float]] = None
    notes: typing.List[str] = dataclasses.field(default_factory=list)

    @property
    def converges(self) -> bool:
        return self.verdict == CONVERGES

    @property
    def diverges(self) -> bool:
        return self.verdict == DIVERGES

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "condition_id": self.condition_id,
            "cutoffs": [float(c) for c in self.cutoffs],
            "partial_values": [float(v) for v in self.partial_values],
            "verdict": self.verdict,
            "confidence": self.confidence,
            "fitted_tail_exponent": self.fitted_tail_exponent,
            "residual": self.residual,
            "fitted_verdict": self.fitted_verdict,
            "value": self.value,
            "witness": self.witness,
            "notes": list(self.notes),
        }


def _ladder(cutoffs: typing.Optional[typing.Sequence[float]]) -> typing.List[float]:
    ladder = list(DEFAULT_CUTOFFS if cutoffs is None else cutoffs)
    if not ladder:
        raise DomainError("the cutoff ladder is empty")
    if ladder[0] < 1.0:
        raise DomainError("the first cutoff must be at least 1")
    if any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
        raise DomainError("cutoffs must be strictly increasing")
    return [float(c) for c in ladder]


def classify_increments(
    cutoffs: typing.Sequence[float], partials: typing.Sequence[float]
) -> typing.Tuple[str, str, typing.Optional[float], typing.Optional[float]]:
    """
    Verdict, confidence, fitted slope and residual for a ladder of partial
    integrals. The slope is taken over the increments after the first one
    whenever at least three are available.
    """
    increments = np.diff(np.concatenate([[0.0], np.asarray(partials, dtype=float)]))
    if np.all(increments <= 0.0):
        return CONVERGES, SAMPLED, None, None
    cut = np.asarray(cutoffs, dtype=float)
    if increments.size >= 3:
        increments, cut = increments[1:], cut[1:]
    if np.any(increments <= 0.0):
        if np.all(increments[-2:] <= 0.0):
            return CONVERGES, SAMPLED, None, None
        return INCONCLUSIVE, FITTED, None, None
    if increments.size < 2:
        return INCONCLUSIVE, FITTED, None, None
    slope, residual = fit_log_slope(cut, increments)
    if residual > RESIDUAL_THRESHOLD:
        return INCONCLUSIVE, FITTED, slope, residual
    if slope >= DIVERGENCE_SLOPE:
        return DIVERGES, FITTED, slope, residual
    if slope < CONVERGENCE_SLOPE and increments[-1] < increments[-2]:
        return CONVERGES, FITTED, slope, residual
    return INCONCLUSIVE, FITTED, slope, residual


def _segment(integrand: typing.Callable[[float], float], a: float, b: float) -> float:
    # x = log t flattens power-law integrands over a decade
    return quad(
        lambda x: integrand(math.exp(x)) * math.exp(x), math.log(a), math.log(b)
    )


def _ladder_report(
    condition_id: str,
    integrand: typing.Callable[[float], float],
    cutoffs: typing.List[float],
) -> ConditionReport:
    partials = []
    total = 0.0
    start = 1.0
    for cutoff in cutoffs:
        total += _segment(integrand, start, cutoff) if cutoff > start else 0.0
        partials.append(total)
        start = cutoff
    verdict, confidence, slope, residual = classify_increments(cutoffs, partials)
    while verdict == INCONCLUSIVE and cutoffs[-1] < LADDER_LIMIT:
        growth = cutoffs[-1] / cutoffs[-2] if len(cutoffs) > 1 else 10.0
        cutoff = min(cutoffs[-1] * growth, LADDER_LIMIT)
        total += _segment(integrand, cutoffs[-1], cutoff)
        cutoffs.append(cutoff)
        partials.append(total)
        logger.info("%s inconclusive, ladder extended to %g", condition_id, cutoff)
        verdict, confidence, slope, residual = classify_increments(cutoffs, partials)
    logger.info(
        "%s verdict %s (%s, slope=%s)", condition_id, verdict, confidence, slope
    )
    return ConditionReport(
        condition_id=condition_id,
        cutoffs=cutoffs,
        partial_values=partials,
        verdict=verdict,
        confidence=confidence,
        fitted_tail_exponent=slope,
        residual=residual,
        fitted_verdict=verdict,
    )


def _ko_integrand(
    phi: PhiSpec, nl: NonlinearitySpec
) -> typing.Callable[[float], float]:
    def integrand(t: float) -> float:
        F = float(eval_F(nl, t))
        if not math.isfinite(F):
            return 0.0
        return 1.0 / float(eval_Phi_inv(phi, F))

    return integrand


def analytic_ko_exponent(phi: PhiSpec, nl: NonlinearitySpec) -> typing.Optional[float]:
    """
    The decay exponent (γ+1)/p of 1/Φ⁻¹(F(t)) for a power-type φ and an f
    with a known tail exponent γ, or None when no closed form applies.
    """
    if nl.tail_exponent is None:
        return None
    if phi.family == POWER:
        p = float(phi.params["p"])
    elif phi.family == CONSTANT_TWO:
        p = 2.0
    else:
        return None
    return (nl.tail_exponent + 1.0) / p


def check_KO(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    cutoffs: typing.Optional[typing.Sequence[float]] = None,
    analytic: bool = True,
) -> ConditionReport:
    """
    Classify ∫₁^∞ dt / Φ⁻¹(F(t)).
    """
    ladder = _ladder(cutoffs)
    sample = np.logspace(0.0, math.log10(ladder[-1]), 50)
    if not np.any(np.asarray(nl.f(sample)) > 0.0):
        raise DomainError(
            "f vanishes on [1, inf), the Keller-Osserman integral is degenerate"
        )
    report = _ladder_report(KO, _ko_integrand(phi, nl), ladder)
    exponent = analytic_ko_exponent(phi, nl) if analytic else None
    if exponent is not None:
        report.verdict = CONVERGES if exponent > 1.0 else DIVERGES
        report.confidence = ANALYTIC
        report.notes.append(f"integrand decays like t^-{exponent:.6g}")
    return report


def ko_envelopes(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    cutoffs: typing.Optional[typing.Sequence[float]] = None,
) -> typing.Dict[str, typing.List[float]]:
    """
    Partial integrals of the power-law envelopes

        1/η₂(F/Φ(1)) ≤ 1/Φ⁻¹(F) ≤ 1/η₁(F/Φ(1)).
    """
    ladder = _ladder(cutoffs)
    anchor = float(eval_Phi(phi, 1.0))

    def envelope(tag: str) -> typing.Callable[[float], float]:
        def integrand(t: float) -> float:
            F = float(eval_F(nl, t))
            if not math.isfinite(F):
                return 0.0
            return 1.0 / float(xi_eta(phi, tag, F / anchor))

        return integrand

    result: typing.Dict[str, typing.List[float]] = {"cutoffs": ladder}
    for name, tag in (("lower", "eta2"), ("upper", "eta1")):
        total, start, partials = 0.0, 1.0, []
        for cutoff in ladder:
            total += _segment(envelope(tag), start, cutoff) if cutoff > start else 0.0
            partials.append(total)
            start = cutoff
        result[name] = partials
    return result


def check_A_rho(
    phi: PhiSpec,
    ws: WeightSpec,
    which: str,
    N: int,
    cutoffs: typing.Optional[typing.Sequence[float]] = None,
) -> ConditionReport:
    """
    Classify ∫₁^∞ h⁻¹(𝓐_ρ(s)) ds. The growth condition holds when the
    integral diverges.
    """
    ladder = _ladder(cutoffs)
    rho = ws.component(which)

    def integrand(s: float) -> float:
        return float(eval_h_inv(phi, average_weight(rho, s, N)))

    report = _ladder_report(A_RHO, integrand, ladder)
    if report.diverges:
        report.notes.append(f"growth condition holds for the {which} weight")
    else:
        report.notes.append(
            f"growth condition is not established for the {which} weight"
        )
    return report


def _budget_cutoffs(horizon: float) -> np.ndarray:
    return horizon * 2.0 ** -np.arange(BUDGET_CUTOFFS - 1, -1, -1, dtype=float)


def _invert_calF(calf: CalF, inner: np.ndarray, grid: np.ndarray) -> np.ndarray:
    try:
        return np.asarray(calf.inverse(inner))
    except StructuralError as exc:
        offending = np.flatnonzero(inner == exc.witness)
        s = float(grid[offending[0]]) if offending.size else float("nan")
        raise StructuralError(
            f"calF inverse out of range at s = {s:.6g}: {exc}",
            interval=exc.interval,
            witness=s,
        ) from exc


def _budget_report(
    condition_id: str, grid: np.ndarray, integrand: np.ndarray, horizon: float
) -> ConditionReport:
    partial = cumulative(integrand, grid)
    cutoffs = _budget_cutoffs(horizon)
    partials = np.interp(cutoffs, grid, partial)
    verdict, confidence, slope, residual = classify_increments(cutoffs, partials)
    report = ConditionReport(
        condition_id=condition_id,
        cutoffs=list(cutoffs),
        partial_values=list(partials),
        verdict=verdict,
        confidence=confidence,
        fitted_tail_exponent=slope,
        residual=residual,
        fitted_verdict=verdict,
        value=float(partial[-1]),
    )
    if verdict != CONVERGES:
        logger.warning(
            "%s integrand does not decay on [0, %g]; using the truncated value %g",
            condition_id,
            horizon,
            report.value,
        )
        report.notes.append("tail does not decay on the horizon; value is truncated")
    return report


def _zero_budget(condition_id: str, horizon: float, reason: str) -> ConditionReport:
    cutoffs = _budget_cutoffs(horizon)
    return ConditionReport(
        condition_id=condition_id,
        cutoffs=list(cutoffs),
        partial_values=[0.0] * cutoffs.size,
        verdict=CONVERGES,
        confidence=ANALYTIC,
        value=0.0,
        notes=[reason],
    )


def compute_H_bar(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    ws: WeightSpec,
    N: int,
    horizon: float,
    points: int = BUDGET_POINTS,
) -> ConditionReport:
    """
    The oscillation budget

        ∫₀^R η₄(𝓐_{a_osc}(s)) h⁻¹(f(𝓕⁻¹(∫₀ˢ h⁻¹(𝓐_ā(t)) dt))) ds

    on a uniform grid of [0, R].
    """
    if horizon <= 0.0:
        raise DomainError("the horizon must be positive")
    grid = np.linspace(0.0, horizon, points)
    if not np.any(np.asarray(ws.osc(grid)) > 0.0):
        return _zero_budget(H_BAR, horizon, "a_osc vanishes on the horizon")
    upper_average = cumulative_average(ws.upper, grid, N)
    inner = cumulative(np.asarray(eval_h_inv(phi, upper_average)), grid)
    t = _invert_calF(CalF(nl, phi.indices.l1), inner, grid)
    osc_average = cumulative_average(ws.osc, grid, N)
    integrand = np.asarray(xi_eta(phi, "eta4", osc_average)) * np.asarray(
        eval_h_inv(phi, np.asarray(nl.f(t)))
    )
    return _budget_report(H_BAR, grid, integrand, horizon)


def compute_H_tilde(
    phi: PhiSpec,
    nl: NonlinearitySpec,
    ws: WeightSpec,
    N: int,
    horizon: float,
    points: int = BUDGET_POINTS,
) -> ConditionReport:
    """
    The ball-envelope budget

        ∫₀^R [η₄(a*(s)) − η₃(a_*(s))] h⁻¹(s f(𝓕⁻¹(∫₀ˢ h⁻¹(𝓐_{a*}(t)) dt))) ds.
    """
    if horizon <= 0.0:
        raise DomainError("the horizon must be positive")
    ball_lower = ws.component(BALL_LOWER)
    ball_upper = ws.component(BALL_UPPER)
    grid = np.linspace(0.0, horizon, points)
    bracket = np.asarray(xi_eta(phi, "eta4", np.asarray(ball_upper(grid))))
    bracket = bracket - np.asarray(xi_eta(phi, "eta3", np.asarray(ball_lower(grid))))
    bracket = np.maximum(bracket, 0.0)
    if not np.any(bracket > 0.0):
        return _zero_budget(H_TILDE, horizon, "the ball envelope bracket vanishes")
    inner = cumulative(
        np.asarray(eval_h_inv(phi, cumulative_average(ball_upper, grid, N))), grid
    )
    t = _invert_calF(CalF(nl, phi.indices.l1), inner, grid)
    integrand = bracket * np.asarray(eval_h_inv(phi, grid * np.asarray(nl.f(t))))
    return _budget_report(H_TILDE, grid, integrand, horizon)


def check_h_inv_subadditive(
    phi: PhiSpec, samples: int = MIN_SUBADDITIVE_SAMPLES, seed: int = 0
) -> ConditionReport:
    """
    Probe h⁻¹(s + t) ≤ h⁻¹(s) + h⁻¹(t) on random and structured pairs in
    [0, 1e6]².
    """
    if samples < MIN_SUBADDITIVE_SAMPLES:
        raise DomainError(f"at least {MIN_SUBADDITIVE_SAMPLES} samples are required")
    rng = np.random.default_rng(seed)
    s = 10.0 ** rng.uniform(-6.0, 6.0, samples)
    t = 10.0 ** rng.uniform(-6.0, 6.0, samples)
    lattice = np.logspace(-6.0, 6.0, 25)
    S, T = np.meshgrid(lattice, lattice)
    s = np.concatenate([s, S.ravel()])
    t = np.concatenate([t, T.ravel()])
    lhs = np.asarray(eval_h_inv(phi, s + t))
    rhs = np.asarray(eval_h_inv(phi, s)) + np.asarray(eval_h_inv(phi, t))
    excess = (lhs - rhs) / rhs
    worst = int(np.argmax(excess))
    report = ConditionReport(
        condition_id=H_INV_SUBADDITIVE,
        cutoffs=[],
        partial_values=[],
        verdict=HOLDS,
        confidence=SAMPLED,
        notes=[f"{s.size} pairs probed"],
    )
    if excess[worst] > SUBADDITIVE_SLACK:
        report.verdict = FAILS
        report.witness = {
            "s": float(s[worst]),
            "t": float(t[worst]),
            "violation": float(lhs[worst] - rhs[worst]),
        }
        logger.info("h inverse is not subadditive: witness %s", report.witness)
    return report
