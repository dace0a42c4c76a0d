import functools
import logging
import typing

import numpy as np
from scipy import integrate, optimize

from largesol.exceptions import DomainError, NumericFailure

logger = logging.getLogger(__name__)

ArrayLike = typing.Union[float, np.ndarray]
Bracket = typing.Callable[[np.ndarray], typing.Tuple[np.ndarray, np.ndarray]]

MAX_BRACKET_STEPS = 2100
BISECTION_STEPS = 200


def vectorized(func: typing.Callable) -> typing.Callable[[ArrayLike], ArrayLike]:
    """
    Wrap a user callable so that it accepts scalars or numpy arrays.

    Scalars come back as floats, arrays as float arrays of the same shape.
    Callables that only understand scalars are evaluated element by element.
    """
    if getattr(func, "_largesol_vectorized", False):
        return func

    @functools.wraps(func)
    def wrapper(x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        try:
            out = np.asarray(func(arr), dtype=float)
            if out.shape != arr.shape:
                out = np.broadcast_to(out, arr.shape).copy()
        except (TypeError, ValueError):
            out = np.vectorize(lambda v: float(func(float(v))), otypes=[float])(arr)
        if arr.ndim == 0:
            return float(out)
        return out

    wrapper._largesol_vectorized = True  # type: ignore[attr-defined]
    return wrapper


def quad(
    func: typing.Callable[[float], float],
    a: float,
    b: float,
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
    limit: int = 200,
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature that raises instead of warning.
    """
    if a == b:
        return 0.0
    result = integrate.quad(
        func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
    )
    value, abserr = float(result[0]), float(result[1])
    if not np.isfinite(value):
        raise NumericFailure(f"quadrature on [{a}, {b}] is not finite", partial=value)
    if len(result) > 3 and abserr > 1e3 * max(epsabs, epsrel * abs(value)):
        raise NumericFailure(
            f"quadrature on [{a}, {b}] did not reach tolerance: {result[3]}",
            partial=value,
        )
    return value


def _grow_bracket(
    func: typing.Callable, y: np.ndarray, lo: np.ndarray, hi: np.ndarray
) -> typing.Tuple[np.ndarray, np.ndarray]:
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(MAX_BRACKET_STEPS):
        low_side = np.asarray(func(hi)) < y
        if not np.any(low_side):
            break
        lo = np.where(low_side, hi, lo)
        hi = np.where(low_side, hi * 2.0, hi)
        if not np.all(np.isfinite(hi)):
            raise NumericFailure("inverse bracket overflowed", partial=hi)
    else:  # pragma: no cover
        raise NumericFailure("inverse bracket did not close from above", partial=hi)
    for _ in range(MAX_BRACKET_STEPS):
        high_side = np.asarray(func(lo)) > y
        if not np.any(high_side):
            break
        hi = np.where(high_side, lo, hi)
        lo = np.where(high_side, lo * 0.5, lo)
        if np.any(lo <= 0.0):
            raise NumericFailure("inverse bracket underflowed", partial=lo)
    else:  # pragma: no cover
        raise NumericFailure("inverse bracket did not close from below", partial=lo)
    return lo, hi


def bisect_increasing(
    func: typing.Callable,
    y: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    rtol: float = 1e-14,
) -> np.ndarray:
    """
    Vectorised bisection for an increasing function with func(lo) <= y <= func(hi).

    Positive brackets are halved geometrically, which keeps the iteration count
    independent of the magnitude of the root.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(BISECTION_STEPS):
        positive = lo > 0.0
        geometric = np.sqrt(lo * np.where(positive, hi, 1.0))
        mid = np.where(positive, geometric, 0.5 * (lo + hi))
        below = np.asarray(func(mid)) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= rtol * np.abs(hi)):
            break
    return 0.5 * (lo + hi)


def monotone_inverse(
    func: typing.Callable,
    y: ArrayLike,
    bracket: typing.Optional[Bracket] = None,
    rtol: float = 1e-14,
) -> ArrayLike:
    """
    Invert a strictly increasing func: [0, inf) -> [0, inf) with func(0) = 0.

    The bracket starts from `bracket(y)` when given (widened until it encloses
    the root), otherwise from [1, 1], and grows geometrically. Scalars are then
    polished with Brent's method, arrays with vectorised bisection.
    """
    values = np.asarray(y, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0):
        raise DomainError("inverse is only defined for non-negative values")
    if values.ndim == 0:
        target = float(values)
        if target == 0.0:
            return 0.0
        lo, hi = _start_bracket(values.reshape(1), bracket)
        lo, hi = _grow_bracket(func, values.reshape(1), lo, hi)
        a, b = float(lo[0]), float(hi[0])
        if a == b:
            return a
        if float(func(b)) == target:
            return b
        return float(
            optimize.brentq(
                lambda t: float(func(t)) - target,
                a,
                b,
                xtol=max(a * 1e-15, 1e-300),
                rtol=rtol,
                maxiter=BISECTION_STEPS,
            )
        )

    out = np.zeros_like(values)
    positive = values > 0.0
    if np.any(positive):
        targets = values[positive]
        lo, hi = _start_bracket(targets, bracket)
        lo, hi = _grow_bracket(func, targets, lo, hi)
        out[positive] = bisect_increasing(func, targets, lo, hi, rtol=rtol)
    return out


def _start_bracket(
    y: np.ndarray, bracket: typing.Optional[Bracket]
) -> typing.Tuple[np.ndarray, np.ndarray]:
    if bracket is None:
        ones = np.ones_like(y)
        return ones, ones.copy()
    lo, hi = bracket(y)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), y.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), y.shape).copy()
    bad = ~(np.isfinite(lo) & np.isfinite(hi) & (lo > 0.0) & (hi >= lo))
    lo[bad] = 1.0
    hi[bad] = 1.0
    return lo, hi


def fit_log_slope(
    x: typing.Sequence[float], y: typing.Sequence[float]
) -> typing.Tuple[float, float]:
    """
    Least-squares slope of log10(y) against log10(x) and the RMS residual.
    """
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.log10(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise DomainError("a slope needs at least two points")
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (slope * lx + intercept)
    return float(slope), float(np.sqrt(np.mean(residual**2)))


def cell_integrals(
    func: typing.Callable[[np.ndarray], np.ndarray], grid: np.ndarray, order: int = 8
) -> np.ndarray:
    """
    Gauss-Legendre integrals of func over each cell [grid[i], grid[i+1]].
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a = grid[:-1, None]
    b = grid[1:, None]
    points = 0.5 * (a + b) + 0.5 * (b - a) * nodes[None, :]
    values = np.asarray(func(points), dtype=float)
    return 0.5 * (grid[1:] - grid[:-1]) * (values @ weights)


def cumulative(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """
    Cumulative integral of tabulated values, starting at zero.
    """
    if grid.size < 3:
        return integrate.cumulative_trapezoid(values, x=grid, initial=0.0)
    return integrate.cumulative_simpson(values, x=grid, initial=0.0)


def shanks(terms: typing.Sequence[np.ndarray], order: int) -> typing.List[np.ndarray]:
    """
    Pointwise Shanks transforms e_order of every window of 2 * order + 1
    successive terms, built column by column with Wynn's epsilon table.

    The transform is exact for a sequence whose error is a sum of `order`
    geometric components. Where the table breaks down, a window falls back
    to the highest-order estimate that is still finite.
    """
    span = 2 * order
    if order < 1 or len(terms) <= span:
        raise DomainError(f"order {order} needs more than {span} terms")
    current = [np.asarray(term, dtype=float) for term in terms]
    previous = [np.zeros_like(current[0])] * (len(current) + 1)
    estimates = [current]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for column in range(span):
            following = []
            for n in range(len(current) - 1):
                diff = current[n + 1] - current[n]
                if column % 2 == 0:
                    scale = np.abs(current[n]) + np.abs(current[n + 1])
                    diff = np.where(np.abs(diff) <= 1e-14 * scale, 0.0, diff)
                following.append(previous[n + 1] + 1.0 / diff)
            previous, current = current, following
            if column % 2 == 1:
                estimates.append(current)
    result = []
    for n in range(len(terms) - span):
        value = estimates[0][n + span]
        for j, column in enumerate(estimates[1:], start=1):
            candidate = column[n + span - 2 * j]
            value = np.where(np.isfinite(candidate), candidate, value)
        result.append(value)
    return result
