# built-in
from dataclasses import dataclass
from math import ceil

# external
import numpy as np

# app
from ._constants import LOESS_SPAN
from ._exceptions import ConfigError, DataError, InterpolationRangeError


@dataclass(frozen=True)
class Interpolant:
    """Piecewise-linear curve through (x, y) knots, no extrapolation."""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise DataError('knots and values must be vectors of equal length')
        if x.shape[0] < 2:
            raise DataError('an interpolant needs at least two knots')
        if not np.all(np.diff(x) > 0):
            raise DataError('knots must be strictly ascending')
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)

    def _check(self, q: float) -> None:
        if not (self.x[0] <= q <= self.x[-1]):
            raise InterpolationRangeError('{} is outside the knot range [{}, {}]'.format(q, self.x[0], self.x[-1]))

    def __call__(self, q: float) -> float:
        return interp_linear(self, q)

    def slope(self, q: float) -> float:
        """Derivative at q; knots take the slope of the segment to their left."""
        self._check(q)
        j = max(int(np.searchsorted(self.x, q, side='left')), 1)
        return float((self.y[j] - self.y[j - 1]) / (self.x[j] - self.x[j - 1]))


def interp_linear(itp: Interpolant, q: float) -> float:
    q = float(q)
    itp._check(q)
    return float(np.interp(q, itp.x, itp.y))


def _local_fit(x: np.ndarray, y: np.ndarray, weights: np.ndarray, center: float, degree: int) -> float:
    active = weights > 0
    dx = x[active] - center
    root = np.sqrt(weights[active])
    for deg in range(degree, -1, -1):
        design = np.vander(dx, deg + 1, increasing=True) * root[:, None]
        coef, _, rank, _ = np.linalg.lstsq(design, y[active] * root, rcond=None)
        if rank == deg + 1:
            return float(coef[0])
    raise DataError('no neighbours with positive weight at x={}'.format(center))


def loess_fit(x, y, span: float = LOESS_SPAN, degree: int = 1) -> np.ndarray:
    """Tricube-weighted local polynomial regression evaluated at the inputs.

    Each fit uses the ceil(span * n) nearest points (at least degree + 2);
    a local design that loses rank falls back to a lower degree.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if degree not in (0, 1, 2):
        raise ConfigError('loess degree must be 0, 1 or 2')
    if not 0 < span <= 1:
        raise ConfigError('loess span must lie in (0, 1]')
    n = x.shape[0]
    if y.shape != x.shape:
        raise DataError('x and y must have the same length')
    if n < max(3, degree + 2):
        raise DataError('loess needs at least {} points'.format(max(3, degree + 2)))
    if np.unique(x).shape[0] != n:
        raise DataError('loess inputs must be distinct')

    q = min(n, max(ceil(span * n), degree + 2))
    fitted = np.empty(n)
    for i in range(n):
        dist = np.abs(x - x[i])
        h = np.sort(dist)[q - 1]
        if q == n:
            # whole-sample neighbourhoods keep the farthest point in the fit
            h = max(h, np.max(dist)) * (1.0 + 1e-10)
        u = np.clip(dist / h, 0.0, 1.0)
        weights = np.power(1.0 - np.power(u, 3), 3)
        fitted[i] = _local_fit(x, y, weights, x[i], degree)
    return fitted
