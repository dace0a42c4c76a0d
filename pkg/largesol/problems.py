import dataclasses
import logging
import typing

import numpy as np
from scipy import optimize

from largesol.constants import (
    ALGEBRAIC_DECAY,
    BALL_LOWER,
    BALL_UPPER,
    CONSTANT,
    CUSTOM,
    EXPONENTIAL,
    EXPONENTIAL_DECAY,
    LOWER,
    OSC,
    POWER,
    SATURATING,
    UPPER,
    WEIGHT_COMPONENTS,
)
from largesol.exceptions import ConfigurationError, DomainError, StructuralError
from largesol.numerics import (
    ArrayLike,
    bisect_increasing,
    cell_integrals,
    quad,
    vectorized,
)
from largesol.tables import Table

logger = logging.getLogger(__name__)

DEFAULT_T_MAX = 1e6
ENVELOPE_STABILITY = 1e-8
ENVELOPE_MIN_POINTS = 4097
ENVELOPE_MAX_POINTS = 2**20
G_CANCELLATION = 1e-3


class NonlinearitySpec:
    """
    The absorption nonlinearity f with its antiderivative F when one is known.
    """

    def __init__(
        self,
        family: str,
        f: typing.Callable,
        params: typing.Optional[typing.Dict[str, typing.Any]] = None,
        F: typing.Optional[typing.Callable] = None,
        monotone: bool = False,
        tail_exponent: typing.Optional[float] = None,
        table: typing.Optional[Table] = None,
    ) -> None:
        self.family = family
        self.f = vectorized(f)
        self.params = dict(params or {})
        self.F_closed_form = vectorized(F) if F is not None else None
        self.monotone = monotone
        self.tail_exponent = tail_exponent
        self.table = table

    @classmethod
    def power(cls, gamma: float) -> "NonlinearitySpec":
        if gamma <= 0.0:
            raise DomainError("power nonlinearity needs gamma > 0")
        return cls(
            POWER,
            f=lambda t: t**gamma,
            params={"gamma": gamma},
            F=lambda t: t ** (gamma + 1.0) / (gamma + 1.0),
            monotone=True,
            tail_exponent=gamma,
        )

    @classmethod
    def exponential(cls) -> "NonlinearitySpec":
        return cls(EXPONENTIAL, f=np.expm1, F=lambda t: np.expm1(t) - t, monotone=True)

    @classmethod
    def custom(
        cls,
        f: typing.Callable,
        F: typing.Optional[typing.Callable] = None,
        monotone: bool = False,
        tail_exponent: typing.Optional[float] = None,
        name: str = CUSTOM,
    ) -> "NonlinearitySpec":
        spec = cls(
            CUSTOM,
            f=f,
            params={"name": name},
            F=F,
            monotone=monotone,
            tail_exponent=tail_exponent,
        )
        spec.validate()
        return spec

    @classmethod
    def from_table(
        cls, table: Table, monotone: typing.Optional[bool] = None
    ) -> "NonlinearitySpec":
        if monotone is None:
            monotone = bool(np.all(np.diff(table.values) >= 0.0))
        spec = cls(
            CUSTOM,
            f=table.linear(tail="linear"),
            params={"name": "table"},
            monotone=monotone,
            table=table,
        )
        spec.validate()
        return spec

    def envelope(self, kind: str, T_max: float = DEFAULT_T_MAX) -> "NonlinearitySpec":
        """
        A monotone spec built from f̲ (kind="lower") or f̄ (kind="upper").
        """
        if self.monotone:
            return self
        grid = _envelope_grid(0.0, T_max, ENVELOPE_MIN_POINTS * 4)
        values = envelope_profile(self, grid, kind)
        table = Table(grid, values)
        return NonlinearitySpec(
            CUSTOM,
            f=table.linear(tail="linear"),
            params={"name": f"{kind}-envelope", "source": self.family},
            monotone=True,
            tail_exponent=self.tail_exponent,
        )

    def validate(self) -> None:
        sample = np.concatenate([[0.0], np.logspace(-6.0, 6.0, 49)])
        values = self.f(sample)
        if values[0] != 0.0:
            raise DomainError("f(0) must vanish")
        if not np.all(np.isfinite(values[1:])) or np.any(values[1:] <= 0.0):
            raise DomainError("f must be positive on (0, inf)")
        if self.monotone and np.any(np.diff(values) < 0.0):
            raise DomainError("f is flagged non-decreasing but decreases on the sample")

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        data: typing.Dict[str, typing.Any] = {"family": self.family}
        data.update(self.params)
        return data

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, NonlinearitySpec):
            return False
        if self.family != other.family or self.params != other.params:
            return False
        if self.family == CUSTOM:
            if self.table is not None or other.table is not None:
                return self.table == other.table and self.monotone == other.monotone
            return self.f is other.f
        return True

    def __repr__(self) -> str:
        items = sorted(self.params.items())
        params = ", ".join(f"{key}={value!r}" for key, value in items)
        return f"<NonlinearitySpec: {self.family}({params})>"


def _nonneg(t: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(t, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0):
        raise DomainError(f"{name} is only defined for non-negative arguments")
    return values


def eval_F(nl: NonlinearitySpec, t: ArrayLike) -> ArrayLike:
    values = _nonneg(t, "F")
    if nl.F_closed_form is not None:
        out = nl.F_closed_form(values)
    else:
        flat = values.ravel()
        points, inverse = np.unique(flat, return_inverse=True)
        edges = np.concatenate([[0.0], points])
        pieces = [quad(nl.f, a, b) for a, b in zip(edges[:-1], edges[1:])]
        out = np.cumsum(pieces)[inverse].reshape(values.shape)
    if np.ndim(t) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def eval_G(nl: NonlinearitySpec, x: float, y: float) -> float:
    """
    G(x, y) = F(y) − F(x) for 0 ≤ x ≤ y.

    Short intervals are integrated directly to avoid cancellation.
    """
    if x < 0.0 or y < 0.0:
        raise DomainError("G is only defined for non-negative arguments")
    if x > y:
        raise DomainError(f"G(x, y) needs x <= y, got x={x}, y={y}")
    if x == y:
        return 0.0
    if nl.F_closed_form is None or y - x <= G_CANCELLATION * y:
        return quad(nl.f, x, y)
    return float(nl.F_closed_form(y) - nl.F_closed_form(x))


def _envelope_grid(t: float, T_max: float, points: int) -> np.ndarray:
    linear = np.linspace(t, T_max, points)
    start = max(t, 1e-12 * max(T_max, 1.0))
    geometric = np.geomspace(start, T_max, points) if start < T_max else np.array([])
    return np.unique(np.concatenate([[t], linear, geometric]))


def envelope_profile(
    nl: NonlinearitySpec, grid: np.ndarray, kind: str
) -> np.ndarray:
    """
    Running infimum from the right (kind="lower") or running supremum from the
    left (kind="upper") of f sampled on an increasing grid.
    """
    values = np.asarray(nl.f(grid), dtype=float)
    if nl.monotone:
        return values
    if kind == "lower":
        return np.minimum.accumulate(values[::-1])[::-1]
    if kind == "upper":
        return np.maximum.accumulate(values)
    raise DomainError(f"unknown envelope kind {kind!r}")


def _polished_extremum(
    nl: NonlinearitySpec, grid: np.ndarray, values: np.ndarray, sign: float
) -> float:
    index = int(np.argmin(sign * values))
    best = float(values[index])
    lo = grid[max(index - 1, 0)]
    hi = grid[min(index + 1, grid.size - 1)]
    if hi > lo:
        result = optimize.minimize_scalar(
            lambda s: sign * float(nl.f(s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(hi, 1.0)},
        )
        candidate = sign * float(result.fun)
        if sign * candidate < sign * best:
            best = candidate
    return best


def _envelope_value(
    nl: NonlinearitySpec, a: float, b: float, sign: float
) -> float:
    points = ENVELOPE_MIN_POINTS
    previous = None
    while True:
        grid = _envelope_grid(a, b, points)
        value = _polished_extremum(nl, grid, np.asarray(nl.f(grid)), sign)
        if previous is not None and abs(value - previous) <= ENVELOPE_STABILITY * max(
            abs(value), 1e-300
        ):
            return value
        if points >= ENVELOPE_MAX_POINTS:
            logger.warning("envelope on [%g, %g] not stable at %d points", a, b, points)
            return value
        previous = value
        points *= 2


def envelope_lower(
    nl: NonlinearitySpec, t: float, T_max: float = DEFAULT_T_MAX
) -> float:
    """
    f̲(t) = inf{f(s) : t ≤ s ≤ T_max}.
    """
    if t < 0.0 or t > T_max:
        raise DomainError("envelope_lower needs 0 <= t <= T_max")
    at_t = float(nl.f(t))
    if nl.monotone or t == T_max:
        return at_t
    return min(at_t, _envelope_value(nl, t, T_max, 1.0))


def envelope_upper(nl: NonlinearitySpec, t: float) -> float:
    """
    f̄(t) = sup{f(s) : 0 ≤ s ≤ t}.
    """
    if t < 0.0:
        raise DomainError("envelope_upper needs t >= 0")
    at_t = float(nl.f(t))
    if nl.monotone or t == 0.0:
        return at_t
    return max(at_t, _envelope_value(nl, 0.0, t, -1.0))


@dataclasses.dataclass
class EnvelopeRatioReport:
    horizon: float
    lower_ratio_inf: float
    upper_ratio_sup: float

    @property
    def lower_satisfied(self) -> bool:
        return self.lower_ratio_inf > 0.0

    @property
    def upper_satisfied(self) -> bool:
        return bool(np.isfinite(self.upper_ratio_sup))

    @property
    def status(self) -> str:
        if self.lower_satisfied and self.upper_satisfied:
            return "satisfied on sampled horizon"
        return "not satisfied on sampled horizon"

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "horizon": self.horizon,
            "lower_ratio_inf": self.lower_ratio_inf,
            "upper_ratio_sup": self.upper_ratio_sup,
            "status": self.status,
        }


def envelope_ratio_report(
    nl: NonlinearitySpec, T_max: float = DEFAULT_T_MAX, points: int = 4001
) -> EnvelopeRatioReport:
    grid = np.concatenate([[0.0], np.geomspace(1e-6, T_max, points)])
    values = np.asarray(nl.f(grid))
    lower = envelope_profile(nl, grid, "lower")
    upper = envelope_profile(nl, grid, "upper")
    tail = grid >= np.sqrt(T_max)
    return EnvelopeRatioReport(
        horizon=T_max,
        lower_ratio_inf=float(np.min(lower[tail] / values[tail])),
        upper_ratio_sup=float(np.max(upper[tail] / values[tail])),
    )


def calF(nl: NonlinearitySpec, l1: float, t: ArrayLike) -> ArrayLike:
    """
    𝓕(t) = (t/2)·f(t)^(−1/l₁).
    """
    values = np.asarray(t, dtype=float)
    if np.any(values <= 0.0):
        raise DomainError("calF is only defined for t > 0")
    fv = np.asarray(nl.f(values), dtype=float)
    if np.any(fv <= 0.0):
        raise DomainError("calF needs f(t) > 0")
    out = 0.5 * values * fv ** (-1.0 / l1)
    if np.ndim(t) == 0:
        return float(out)
    return out


class CalF:
    """
    𝓕 sampled on a logarithmic range, checked for strict monotonicity and
    inverted by bisection inside the bracketing cell.
    """

    def __init__(
        self,
        nl: NonlinearitySpec,
        l1: float,
        t_min: float = 1e-12,
        t_max: float = 1e12,
        points: int = 1201,
    ) -> None:
        self.nl = nl
        self.l1 = l1
        self.grid = np.geomspace(t_min, t_max, points)
        with np.errstate(over="ignore", divide="ignore"):
            self.values = 0.5 * self.grid * np.asarray(nl.f(self.grid)) ** (-1.0 / l1)
        steps = np.diff(self.values)
        if np.all(steps > 0.0):
            self.increasing = True
        elif np.all(steps < 0.0):
            self.increasing = False
        else:
            self._raise_non_monotone(steps)
        log_t = np.log(self.grid[:2])
        log_v = np.log(self.values[:2])
        self.start_slope = float((log_v[1] - log_v[0]) / (log_t[1] - log_t[0]))

    def _raise_non_monotone(self, steps: np.ndarray) -> None:
        reference = np.sign(steps[0]) if steps[0] != 0.0 else 1.0
        bad = int(np.argmax(np.sign(steps) != reference))
        following = min(bad + 1, self.grid.size - 1)
        interval = (float(self.grid[bad]), float(self.grid[following]))
        raise StructuralError(
            f"calF is not strictly monotone on [{interval[0]:.6g}, {interval[1]:.6g}]",
            interval=interval,
            witness=float(self.values[bad]),
        )

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return calF(self.nl, self.l1, t)

    def inverse(self, y: ArrayLike) -> ArrayLike:
        targets = np.asarray(y, dtype=float)
        flat = np.atleast_1d(targets).astype(float)
        if np.any(np.isnan(flat)) or np.any(flat < 0.0):
            raise DomainError("calF inverse needs non-negative values")
        sign = 1.0 if self.increasing else -1.0
        ordered = sign * self.values
        z = sign * flat
        out = np.empty_like(flat)

        beyond = z > ordered[-1]
        if np.any(beyond):
            offending = float(flat[beyond][0])
            low, high = sorted((float(self.values[0]), float(self.values[-1])))
            raise StructuralError(
                f"calF inverse: value {offending:.6g} lies outside the scanned range "
                f"[{low:.6g}, {high:.6g}]",
                interval=(low, high),
                witness=offending,
            )
        before = z < ordered[0]
        if np.any(before):
            # power-law continuation of the first scanned cell towards t = 0
            with np.errstate(divide="ignore"):
                out[before] = self.grid[0] * (flat[before] / self.values[0]) ** (
                    1.0 / self.start_slope
                )
            out[before & (flat == 0.0)] = 0.0
        inside = ~before
        if np.any(inside):
            cells = np.clip(np.searchsorted(ordered, z[inside]), 1, ordered.size - 1)
            out[inside] = bisect_increasing(
                lambda t: sign * np.asarray(calF(self.nl, self.l1, t)),
                z[inside],
                self.grid[cells - 1],
                self.grid[cells],
            )
        if targets.ndim == 0:
            return float(out[0])
        return out.reshape(targets.shape)


def calF_inv(nl: NonlinearitySpec, l1: float, y: ArrayLike) -> ArrayLike:
    return CalF(nl, l1).inverse(y)


def weight_function(
    family: str,
    value: float = 1.0,
    rate: float = 1.0,
    exponent: float = 2.0,
    table: typing.Optional[Table] = None,
) -> typing.Callable[[ArrayLike], ArrayLike]:
    if family == CONSTANT:
        return vectorized(lambda r: np.full_like(np.asarray(r, dtype=float), value))
    if family == SATURATING:
        return vectorized(lambda r: -value * np.expm1(-rate * r))
    if family == ALGEBRAIC_DECAY:
        return vectorized(lambda r: value * (1.0 + r) ** (-exponent))
    if family == EXPONENTIAL_DECAY:
        return vectorized(lambda r: value * np.exp(-rate * r))
    if family == CUSTOM:
        if table is None:
            raise ConfigurationError("custom weight needs a table")
        return vectorized(table.linear(tail="constant"))
    raise ConfigurationError(f"unknown weight family {family!r}")


class WeightSpec:
    """
    Radial envelopes a̲ ≤ ā of the weight, optionally with the ball envelopes
    a_* (running minimum) and a* (running maximum).
    """

    def __init__(
        self,
        lower: typing.Callable,
        upper: typing.Callable,
        ball_lower: typing.Optional[typing.Callable] = None,
        ball_upper: typing.Optional[typing.Callable] = None,
        is_radial: bool = False,
    ) -> None:
        self.lower = vectorized(lower)
        self.upper = vectorized(upper)
        self.ball_lower = vectorized(ball_lower) if ball_lower is not None else None
        self.ball_upper = vectorized(ball_upper) if ball_upper is not None else None
        self.is_radial = is_radial
        self.validate()

    @classmethod
    def radial(cls, rho: typing.Callable) -> "WeightSpec":
        return cls(rho, rho, is_radial=True)

    @classmethod
    def bounds(
        cls,
        lower: typing.Callable,
        upper: typing.Callable,
        ball_lower: typing.Optional[typing.Callable] = None,
        ball_upper: typing.Optional[typing.Callable] = None,
    ) -> "WeightSpec":
        return cls(lower, upper, ball_lower=ball_lower, ball_upper=ball_upper)

    def validate(self, r_max: float = 1e3) -> None:
        sample = np.concatenate(
            [np.linspace(0.0, 1.0, 65), np.geomspace(1.0, r_max, 65)]
        )
        lower = self.lower(sample)
        upper = self.upper(sample)
        if np.any(lower < 0.0):
            raise DomainError("the lower weight must be non-negative")
        if np.any(lower > upper * (1.0 + 1e-12) + 1e-300):
            raise DomainError("the lower weight exceeds the upper weight")

    def osc(self, r: ArrayLike) -> ArrayLike:
        if self.is_radial:
            out = np.zeros_like(np.asarray(r, dtype=float))
        else:
            out = np.maximum(np.asarray(self.upper(r)) - np.asarray(self.lower(r)), 0.0)
        if np.ndim(r) == 0:
            return float(out)
        return out

    def component(self, which: str) -> typing.Callable[[ArrayLike], ArrayLike]:
        if which not in WEIGHT_COMPONENTS:
            raise ConfigurationError(f"unknown weight component {which!r}")
        selected = {
            LOWER: self.lower,
            UPPER: self.upper,
            OSC: self.osc,
            BALL_LOWER: self.ball_lower,
            BALL_UPPER: self.ball_upper,
        }[which]
        if selected is None:
            raise ConfigurationError(f"weight component {which!r} is not defined")
        return selected

    def with_ball_envelopes(
        self, r_max: float = 1e3, points: int = 20001
    ) -> "WeightSpec":
        grid = np.linspace(0.0, r_max, points)
        running_min = np.minimum.accumulate(np.asarray(self.lower(grid)))
        running_max = np.maximum.accumulate(np.asarray(self.upper(grid)))
        return WeightSpec(
            self.lower,
            self.upper,
            ball_lower=lambda r: np.interp(r, grid, running_min),
            ball_upper=lambda r: np.interp(r, grid, running_max),
            is_radial=self.is_radial,
        )


def weight_A(ws: WeightSpec, which: str, s: ArrayLike, N: int) -> ArrayLike:
    """
    𝓐_ρ(s) = s^(1−N)·∫₀ˢ t^(N−1)ρ(t) dt for the selected component ρ.
    """
    rho = ws.component(which)
    return average_weight(rho, s, N)


def average_weight(rho: typing.Callable, s: ArrayLike, N: int) -> ArrayLike:
    if N < 1:
        raise DomainError("dimension N must be a positive integer")
    values = np.asarray(s, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0):
        raise DomainError("the weight average needs s >= 0")
    out = np.array([_average_one(rho, float(v), N) for v in values.ravel()])
    if values.ndim == 0:
        return float(out[0])
    return out.reshape(values.shape)


def _average_one(rho: typing.Callable, s: float, N: int) -> float:
    if s == 0.0:
        return 0.0
    if s <= 1.0:
        total = quad(lambda t: t ** (N - 1) * float(rho(t)), 0.0, s)
    else:
        total = quad(lambda t: t ** (N - 1) * float(rho(t)), 0.0, 1.0)
        total += quad(lambda x: np.exp(N * x) * float(rho(np.exp(x))), 0.0, np.log(s))
    return total * s ** (1 - N)


def cumulative_average(
    rho: typing.Callable, grid: np.ndarray, N: int, order: int = 8
) -> np.ndarray:
    """
    𝓐_ρ tabulated on an increasing grid starting at 0, with Gauss-Legendre
    integration on each cell.
    """
    if grid[0] != 0.0:
        raise DomainError("the tabulation grid must start at 0")
    rho = vectorized(rho)
    pieces = cell_integrals(
        lambda t: t ** (N - 1) * np.asarray(rho(t)), grid, order=order
    )
    totals = np.concatenate([[0.0], np.cumsum(pieces)])
    out = np.zeros_like(grid)
    out[1:] = totals[1:] * grid[1:] ** (1 - N)
    return out
