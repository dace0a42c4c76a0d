import dataclasses
import functools
import logging
import math
import typing

import numpy as np
from scipy import interpolate

from largesol.constants import (
    CONSTANT_TWO,
    CUSTOM,
    ELASTICITY,
    ELASTICITY_SQRT,
    P_AND_Q,
    PLASTICITY_LOG,
    POWER,
    XI_ETA_TAGS,
)
from largesol.exceptions import DomainError, NumericFailure
from largesol.numerics import ArrayLike, monotone_inverse, quad, vectorized
from largesol.tables import Table

logger = logging.getLogger(__name__)

DEFAULT_INDEX_GRID = np.logspace(-6.0, 6.0, 241)
DEFAULT_SAFETY = 0.01
DIFFERENCE_STEP = 1e-5
BRACKET_WIDENING = 1e-3


class Indices(typing.NamedTuple):
    l: float  # noqa: E741
    m: float
    l1: float
    m1: float


class PhiSpec:
    """
    The kernel φ of the operator div(φ(|∇u|)∇u) together with the optional
    closed forms the derived N-function machinery can use.
    """

    def __init__(
        self,
        family: str,
        phi: typing.Callable,
        params: typing.Optional[typing.Dict[str, float]] = None,
        Phi: typing.Optional[typing.Callable] = None,
        Phi_inv: typing.Optional[typing.Callable] = None,
        h_inv: typing.Optional[typing.Callable] = None,
        indices: typing.Optional[typing.Sequence[float]] = None,
        table: typing.Optional[Table] = None,
    ) -> None:
        self.family = family
        self.params = dict(params or {})
        self.phi = vectorized(phi)
        self.Phi_closed_form = vectorized(Phi) if Phi is not None else None
        self.Phi_inv_closed_form = vectorized(Phi_inv) if Phi_inv is not None else None
        self.h_inv_closed_form = vectorized(h_inv) if h_inv is not None else None
        self.exact_indices = Indices(*indices) if indices is not None else None
        self.table = table

    @classmethod
    def constant_two(cls) -> "PhiSpec":
        return cls(
            CONSTANT_TWO,
            phi=lambda t: np.full_like(np.asarray(t, dtype=float), 2.0),
            Phi=lambda t: t * t,
            Phi_inv=np.sqrt,
            h_inv=lambda s: s / 2.0,
            indices=(2.0, 2.0, 1.0, 1.0),
        )

    @classmethod
    def power(cls, p: float) -> "PhiSpec":
        _require(p > 1.0, "power family needs p > 1")
        return cls(
            POWER,
            phi=lambda t: p * t ** (p - 2.0),
            params={"p": p},
            Phi=lambda t: t**p,
            Phi_inv=lambda y: y ** (1.0 / p),
            h_inv=lambda s: (s / p) ** (1.0 / (p - 1.0)),
            indices=(p, p, p - 1.0, p - 1.0),
        )

    @classmethod
    def p_and_q(cls, p: float, q: float) -> "PhiSpec":
        _require(1.0 < p < q, "p-and-q family needs 1 < p < q")
        return cls(
            P_AND_Q,
            phi=lambda t: p * t ** (p - 2.0) + q * t ** (q - 2.0),
            params={"p": p, "q": q},
            Phi=lambda t: t**p + t**q,
        )

    @classmethod
    def elasticity(cls, gamma: float) -> "PhiSpec":
        _require(gamma > 1.0, "elasticity family needs gamma > 1")
        return cls(
            ELASTICITY,
            phi=lambda t: 2.0 * gamma * (1.0 + t * t) ** (gamma - 1.0),
            params={"gamma": gamma},
            Phi=lambda t: np.expm1(gamma * np.log1p(t * t)),
        )

    @classmethod
    def elasticity_sqrt(cls, gamma: float) -> "PhiSpec":
        # h is bounded when gamma = 1
        _require(gamma > 1.0, "elasticity-sqrt family needs gamma > 1")

        def phi(t: np.ndarray) -> np.ndarray:
            root = np.sqrt(1.0 + t * t)
            return gamma * (t * t / (root + 1.0)) ** (gamma - 1.0) / root

        return cls(
            ELASTICITY_SQRT,
            phi=phi,
            params={"gamma": gamma},
            Phi=lambda t: (t * t / (np.sqrt(1.0 + t * t) + 1.0)) ** gamma,
        )

    @classmethod
    def plasticity_log(cls, p: float) -> "PhiSpec":
        _require(p > 1.0, "plasticity-log family needs p > 1")

        def phi(t: np.ndarray) -> np.ndarray:
            log = np.log1p(t)
            return (p * t ** (p - 2.0) * (1.0 + t) * log + t ** (p - 1.0)) / (1.0 + t)

        return cls(
            PLASTICITY_LOG,
            phi=phi,
            params={"p": p},
            Phi=lambda t: t**p * np.log1p(t),
        )

    @classmethod
    def custom(
        cls,
        phi: typing.Callable,
        Phi: typing.Optional[typing.Callable] = None,
        Phi_inv: typing.Optional[typing.Callable] = None,
        h_inv: typing.Optional[typing.Callable] = None,
        indices: typing.Optional[typing.Sequence[float]] = None,
        name: str = CUSTOM,
    ) -> "PhiSpec":
        spec = cls(
            CUSTOM,
            phi=phi,
            params={"name": name},
            Phi=Phi,
            Phi_inv=Phi_inv,
            h_inv=h_inv,
            indices=indices,
        )
        _check_positive(spec)
        return spec

    @classmethod
    def from_table(cls, table: Table) -> "PhiSpec":
        spec = cls(CUSTOM, phi=table.loglog(), params={"name": "table"}, table=table)
        _check_positive(spec)
        return spec

    @functools.cached_property
    def indices(self) -> Indices:
        return estimate_indices(self)

    @functools.cached_property
    def h_table(self) -> "InverseTable":
        return InverseTable(lambda t: eval_h(self, t))

    @functools.cached_property
    def Phi_table(self) -> typing.Optional["InverseTable"]:
        # only closed-form Φ is tabulated
        if self.Phi_closed_form is None:
            return None
        return InverseTable(lambda t: eval_Phi(self, t))

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        data: typing.Dict[str, typing.Any] = {"family": self.family}
        data.update(self.params)
        return data

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, PhiSpec):
            return False
        if self.family != other.family or self.params != other.params:
            return False
        if self.family == CUSTOM:
            if self.table is not None or other.table is not None:
                return self.table == other.table
            return self.phi is other.phi
        return True

    def __repr__(self) -> str:
        items = sorted(self.params.items())
        params = ", ".join(f"{key}={value!r}" for key, value in items)
        return f"<PhiSpec: {self.family}({params})>"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


def _check_positive(spec: PhiSpec) -> None:
    sample = np.logspace(-6.0, 6.0, 49)
    values = spec.phi(sample)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise DomainError("phi must be positive and finite on (0, inf)")


def _nonneg(t: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(t, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0):
        raise DomainError(f"{name} is only defined for non-negative arguments")
    return values


def _like(values: np.ndarray, reference: ArrayLike) -> ArrayLike:
    if np.ndim(reference) == 0:
        return float(values)
    return np.asarray(values, dtype=float)


def _Phi_by_quadrature(spec: PhiSpec, values: np.ndarray) -> np.ndarray:
    flat = values.ravel()
    points, inverse = np.unique(flat, return_inverse=True)
    edges = np.concatenate([[0.0], points])
    pieces = [
        quad(lambda s: float(eval_h(spec, s)), a, b)
        for a, b in zip(edges[:-1], edges[1:])
    ]
    return np.cumsum(pieces)[inverse].reshape(values.shape)


def eval_Phi(spec: PhiSpec, t: ArrayLike) -> ArrayLike:
    """
    Φ(t) = ∫₀ᵗ φ(s)s ds.
    """
    values = _nonneg(t, "Phi")
    if spec.Phi_closed_form is not None:
        return _like(spec.Phi_closed_form(values), t)
    return _like(_Phi_by_quadrature(spec, values), t)


def eval_h(spec: PhiSpec, t: ArrayLike) -> ArrayLike:
    values = _nonneg(t, "h")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(values > 0.0, spec.phi(values) * values, 0.0)
    return _like(out, t)


class InverseTable:
    """
    Log-log tabulation of an increasing function used to invert it quickly.

    A tabulated guess is accepted only after the function values at
    guess·(1 ∓ δ) are checked to enclose the target; the root is then
    interpolated log-linearly inside that bracket.
    """

    def __init__(
        self,
        func: typing.Callable[[np.ndarray], np.ndarray],
        lo: float = 1e-12,
        hi: float = 1e12,
        points: int = 9601,
        width: float = 1e-6,
    ) -> None:
        self.func = func
        self.width = width
        t = np.geomspace(lo, hi, points)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            values = np.asarray(func(t), dtype=float)
        keep = np.isfinite(values) & (values > 0.0)
        t, values = t[keep], values[keep]
        self.usable = t.size >= 2 and bool(np.all(np.diff(values) > 0.0))
        if self.usable:
            self.log_range = (float(np.log(values[0])), float(np.log(values[-1])))
            self.spline = interpolate.PchipInterpolator(np.log(values), np.log(t))

    def invert(self, y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        if not self.usable:
            return out, np.zeros(y.shape, dtype=bool)
        with np.errstate(divide="ignore"):
            log_y = np.log(y)
        inside = (log_y >= self.log_range[0]) & (log_y <= self.log_range[1])
        guess = np.exp(self.spline(np.clip(log_y, *self.log_range)))
        a = guess * (1.0 - self.width)
        b = guess * (1.0 + self.width)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            fa = np.asarray(self.func(a), dtype=float)
            fb = np.asarray(self.func(b), dtype=float)
            ok = inside & (fa > 0.0) & (fa <= y) & (y <= fb) & (fb > fa)
            weight = np.where(ok, (log_y - np.log(fa)) / np.log(fb / fa), 0.0)
            out = np.where(ok, a * (b / a) ** weight, 0.0)
        return out, ok


def _tabulated_inverse(
    table: typing.Optional[InverseTable],
    func: typing.Callable[[ArrayLike], ArrayLike],
    values: np.ndarray,
    bracket: typing.Callable[[np.ndarray], typing.Tuple[np.ndarray, np.ndarray]],
) -> np.ndarray:
    flat = np.atleast_1d(values).astype(float)
    out = np.zeros_like(flat)
    pending = flat > 0.0
    if table is not None and np.any(pending):
        found, ok = table.invert(flat[pending])
        indices = np.flatnonzero(pending)
        out[indices[ok]] = found[ok]
        pending[indices[ok]] = False
    if np.any(pending):
        if np.count_nonzero(pending) == 1:
            index = int(np.flatnonzero(pending)[0])
            out[index] = monotone_inverse(func, float(flat[index]), bracket=bracket)
        else:
            out[pending] = monotone_inverse(func, flat[pending], bracket=bracket)
    return out.reshape(values.shape)


def _sandwich_bracket(
    spec: PhiSpec,
    func: typing.Callable[[ArrayLike], ArrayLike],
    low: str,
    high: str,
) -> typing.Callable[[np.ndarray], typing.Tuple[np.ndarray, np.ndarray]]:
    anchor = float(func(1.0))

    def bracket(y: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
        ratio = y / anchor
        lower = np.asarray(xi_eta(spec, low, ratio)) * (1.0 - BRACKET_WIDENING)
        upper = np.asarray(xi_eta(spec, high, ratio)) * (1.0 + BRACKET_WIDENING)
        return lower, upper

    return bracket


def eval_Phi_inv(spec: PhiSpec, y: ArrayLike) -> ArrayLike:
    values = _nonneg(y, "Phi inverse")
    if spec.Phi_inv_closed_form is not None:
        return _like(spec.Phi_inv_closed_form(values), y)

    def Phi(t: ArrayLike) -> ArrayLike:
        return eval_Phi(spec, t)

    bracket = _sandwich_bracket(spec, Phi, "eta1", "eta2")
    return _like(_tabulated_inverse(spec.Phi_table, Phi, values, bracket), y)


def eval_h_inv(spec: PhiSpec, s: ArrayLike) -> ArrayLike:
    values = _nonneg(s, "h inverse")
    if spec.h_inv_closed_form is not None:
        return _like(spec.h_inv_closed_form(values), s)

    def h(t: ArrayLike) -> ArrayLike:
        return eval_h(spec, t)

    bracket = _sandwich_bracket(spec, h, "eta3", "eta4")
    return _like(_tabulated_inverse(spec.h_table, h, values, bracket), s)


def _index_ratios(
    spec: PhiSpec, grid: np.ndarray
) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    phi = spec.phi(grid)
    h = np.asarray(eval_h(spec, grid))
    Phi = np.asarray(eval_Phi(spec, grid))
    upper = np.asarray(eval_h(spec, grid * (1.0 + DIFFERENCE_STEP)))
    lower = np.asarray(eval_h(spec, grid * (1.0 - DIFFERENCE_STEP)))
    with np.errstate(divide="ignore", invalid="ignore"):
        second = h * grid / Phi
        third = (upper - lower) / (2.0 * DIFFERENCE_STEP * h)
    return phi, h, second, third


def estimate_indices(
    spec: PhiSpec,
    grid: typing.Optional[np.ndarray] = None,
    safety: float = DEFAULT_SAFETY,
) -> Indices:
    """
    Sampled bounds (l, m, l₁, m₁) for φ(t)t²/Φ(t) and Φ″(t)t/Φ′(t).

    The infimum is shrunk and the supremum grown by `safety`. Families with
    exact indices return them unchanged.
    """
    if spec.exact_indices is not None:
        return spec.exact_indices
    grid = DEFAULT_INDEX_GRID if grid is None else np.asarray(grid, dtype=float)
    spans = grid.min() <= 1e-6 * (1 + 1e-9) and grid.max() >= 1e6 * (1 - 1e-9)
    if grid.size < 200 or not spans:
        raise DomainError("index grid must span [1e-6, 1e6] with at least 200 points")
    _, _, second, third = _index_ratios(spec, grid)
    if not (np.all(np.isfinite(second)) and np.all(np.isfinite(third))):
        raise NumericFailure("index ratios are not finite on the grid")
    indices = Indices(
        float(second.min()) * (1.0 - safety),
        float(second.max()) * (1.0 + safety),
        float(third.min()) * (1.0 - safety),
        float(third.max()) * (1.0 + safety),
    )
    logger.debug("estimated indices for %r: %s", spec, indices)
    return indices


_XI_ETA = {
    "xi1": (lambda i: (i.l, i.m), np.minimum),
    "xi2": (lambda i: (i.l, i.m), np.maximum),
    "xi3": (lambda i: (i.l1, i.m1), np.minimum),
    "xi4": (lambda i: (i.l1, i.m1), np.maximum),
    "eta1": (lambda i: (1.0 / i.l, 1.0 / i.m), np.minimum),
    "eta2": (lambda i: (1.0 / i.l, 1.0 / i.m), np.maximum),
    "eta3": (lambda i: (1.0 / i.l1, 1.0 / i.m1), np.minimum),
    "eta4": (lambda i: (1.0 / i.l1, 1.0 / i.m1), np.maximum),
}


def xi_eta(spec: PhiSpec, which: str, t: ArrayLike) -> ArrayLike:
    if which not in XI_ETA_TAGS:
        raise DomainError(f"unknown sandwich function {which!r}")
    values = _nonneg(t, which)
    exponents, pick = _XI_ETA[which]
    a, b = exponents(spec.indices)
    return _like(pick(values**a, values**b), t)


@dataclasses.dataclass
class HypothesisReport:
    family: str
    phi_positive: bool
    h_increasing: bool
    ratio_range: typing.Tuple[float, float]
    derivative_ratio_range: typing.Tuple[float, float]
    indices: Indices

    @property
    def holds(self) -> bool:
        return (
            self.phi_positive
            and self.h_increasing
            and self.indices.l > 1.0
            and self.indices.l1 > 0.0
        )

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "family": self.family,
            "phi_positive": self.phi_positive,
            "h_increasing": self.h_increasing,
            "ratio_range": list(self.ratio_range),
            "derivative_ratio_range": list(self.derivative_ratio_range),
            "indices": dict(self.indices._asdict()),
            "holds": self.holds,
        }


def check_hypotheses(
    spec: PhiSpec, grid: typing.Optional[np.ndarray] = None
) -> HypothesisReport:
    grid = DEFAULT_INDEX_GRID if grid is None else np.asarray(grid, dtype=float)
    phi, h, second, third = _index_ratios(spec, grid)
    return HypothesisReport(
        family=spec.family,
        phi_positive=bool(np.all(phi > 0.0)),
        h_increasing=bool(np.all(np.diff(h) > 0.0)),
        ratio_range=(float(np.nanmin(second)), float(np.nanmax(second))),
        derivative_ratio_range=(float(np.nanmin(third)), float(np.nanmax(third))),
        indices=spec.indices,
    )


def plasticity_constraint(N: int) -> typing.Tuple[float, bool]:
    """
    The dimension constraint quoted for the plasticity-log operator. It is
    reported, never enforced.
    """
    value = (-1.0 + math.sqrt(1.0 + 4.0 * N)) / 2.0
    return value, value > 1.0
