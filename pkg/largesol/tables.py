import os
import typing

import numpy as np
from scipy import interpolate

from largesol.exceptions import ConfigurationError, DomainError


class Table:
    """
    Two-column tabulated function with strictly increasing abscissae.
    """

    def __init__(
        self,
        t: typing.Sequence[float],
        values: typing.Sequence[float],
        path: typing.Optional[str] = None,
    ) -> None:
        self.t = np.asarray(t, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.path = path
        if self.t.ndim != 1 or self.t.shape != self.values.shape:
            raise DomainError("table columns must be one-dimensional and equally long")
        if self.t.size < 2:
            raise DomainError("table needs at least 2 rows")
        if not np.all(np.isfinite(self.t)) or not np.all(np.isfinite(self.values)):
            raise DomainError("table entries must be finite")
        if np.any(np.diff(self.t) <= 0.0):
            raise DomainError("table abscissae must be strictly increasing")

    def loglog(self) -> typing.Callable[[np.ndarray], np.ndarray]:
        """
        Monotone cubic interpolation in log-log coordinates, extrapolated as
        power laws with the end slopes.
        """
        if np.any(self.t <= 0.0) or np.any(self.values <= 0.0):
            raise DomainError(
                "log-log interpolation needs positive abscissae and values"
            )
        x = np.log(self.t)
        y = np.log(self.values)
        spline = interpolate.PchipInterpolator(x, y, extrapolate=False)
        slopes = spline.derivative()(x[[0, -1]])

        def evaluate(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore"):
                lr = np.log(np.maximum(r, 1e-300))
            out = spline(np.clip(lr, x[0], x[-1]))
            out = np.where(lr < x[0], y[0] + slopes[0] * (lr - x[0]), out)
            out = np.where(lr > x[-1], y[-1] + slopes[1] * (lr - x[-1]), out)
            return np.exp(out)

        return evaluate

    def linear(
        self, tail: str = "linear"
    ) -> typing.Callable[[np.ndarray], np.ndarray]:
        """
        Monotone cubic interpolation in the original coordinates.

        Beyond the last row the function continues with the end slope
        (`tail="linear"`) or the end value (`tail="constant"`); before the
        first row it keeps the first value.
        """
        spline = interpolate.PchipInterpolator(self.t, self.values, extrapolate=False)
        end_slope = float(spline.derivative()(self.t[-1]))
        t0, t1 = self.t[0], self.t[-1]
        v0, v1 = self.values[0], self.values[-1]

        def evaluate(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            out = spline(np.clip(r, t0, t1))
            out = np.where(r < t0, v0, out)
            if tail == "constant":
                return np.where(r > t1, v1, out)
            return np.where(r > t1, v1 + end_slope * (r - t1), out)

        return evaluate

    def __eq__(self, other: typing.Any) -> bool:
        return (
            isinstance(other, Table)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        source = f" from {self.path!r}" if self.path else ""
        return f"<Table: {self.t.size} rows{source}>"


def load_table(path: str) -> Table:
    if not os.path.isfile(path):
        raise ConfigurationError(f"table file {path!r} does not exist")
    rows = []
    with open(path, encoding="utf8") as f:
        for lineno, line in enumerate(f, start=1):
            content = line.split("#", 1)[0].replace(",", " ").split()
            if not content:
                continue
            if len(content) != 2:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected two columns, found {len(content)}"
                )
            try:
                rows.append((float(content[0]), float(content[1])))
            except ValueError:
                raise ConfigurationError(f"{path}:{lineno}: not a number") from None
    if not rows:
        raise ConfigurationError(f"table file {path!r} has no rows")
    t, values = zip(*rows)
    try:
        return Table(t, values, path=path)
    except DomainError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def write_table(table: Table, path: str) -> None:
    with open(path, "w", encoding="utf8") as f:
        for t, value in zip(table.t, table.values):
            f.write(f"{t:.17g} {value:.17g}\n")
