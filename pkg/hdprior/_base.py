# built-in
from dataclasses import dataclass
from functools import cached_property
from logging import getLogger
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# external
import numpy as np
from scipy import special

# app
from ._constants import DISPERSION
from ._exceptions import ConfigError, DataError, DomainError, ShapeError
from ._glm import Dataset, ModelSpec, value_and_grad


logger = getLogger('hdprior')
LOG_2PI = np.log(2 * np.pi)

Values = Dict[str, np.ndarray]
Kernel = Callable[[Values], Tuple[float, Values]]


# densities shared by the priors


def normal_lpdf(x, mean, sd) -> Tuple[float, np.ndarray]:
    """Sum of independent normal log densities and the gradient in x."""
    z = (np.asarray(x, dtype=float) - mean) / sd
    value = np.sum(-0.5 * LOG_2PI - np.log(sd) - 0.5 * z * z)
    return float(value), -z / sd


def half_normal_lpdf(x, mean, sd) -> Tuple[float, np.ndarray]:
    """Normal truncated below at zero, normalised by Phi(mean / sd)."""
    value, grad = normal_lpdf(x, mean, sd)
    value -= float(np.sum(special.log_ndtr(np.asarray(mean, dtype=float) / sd) * np.ones_like(x, dtype=float)))
    return value, grad


def beta_lpdf(x, a, b) -> Tuple[float, np.ndarray]:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore'):
        value = np.sum(special.xlogy(a - 1.0, x) + special.xlog1py(b - 1.0, -x) - special.betaln(a, b))
        grad = (a - 1.0) / x - (b - 1.0) / (1.0 - x)
    return float(value), grad


# transforms


class Transform:
    """Map from unconstrained coordinates to a constrained block.

    `backward` receives the gradient of the density with respect to the
    constrained values and returns the gradient with respect to the free
    coordinates, log-Jacobian included.
    """
    name = ''

    def free_size(self, size: int) -> int:
        return size

    def forward(self, u: np.ndarray) -> Tuple[np.ndarray, float]:
        raise NotImplementedError

    def backward(self, u: np.ndarray, x: np.ndarray, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Identity(Transform):
    name = 'identity'

    def forward(self, u):
        return u.copy(), 0.0

    def backward(self, u, x, grad):
        return grad

    def inverse(self, x):
        return np.asarray(x, dtype=float)


class Log(Transform):
    name = 'log'

    def forward(self, u):
        return np.exp(u), float(np.sum(u))

    def backward(self, u, x, grad):
        return grad * x + 1.0

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError('log transform needs positive values')
        return np.log(x)


class Logit(Transform):
    name = 'logit'

    def forward(self, u):
        log_jac = -np.logaddexp(0.0, -u) - np.logaddexp(0.0, u)
        return special.expit(u), float(np.sum(log_jac))

    def backward(self, u, x, grad):
        return grad * x * (1.0 - x) + (1.0 - 2.0 * x)

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x <= 0) | (x >= 1)):
            raise DomainError('logit transform needs values in (0, 1)')
        return special.logit(x)


class StickBreaking(Transform):
    """K-simplex from K - 1 free coordinates.

    Break k takes the fraction z_k = expit(u_k - log(K - k)) of what is left,
    so u = 0 maps to the uniform simplex. Unlike the other transforms,
    `backward` expects the gradient with respect to log x.
    """
    name = 'simplex'

    def free_size(self, size):
        if size < 2:
            raise ConfigError('a simplex needs at least two components')
        return size - 1

    @staticmethod
    def _shift(k_minus_1: int) -> np.ndarray:
        return np.log(np.arange(k_minus_1, 0, -1, dtype=float))

    def _parts(self, u):
        v = u - self._shift(u.shape[0])
        log_z = -np.logaddexp(0.0, -v)
        log_1mz = -np.logaddexp(0.0, v)
        log_r = np.concatenate([[0.0], np.cumsum(log_1mz)])
        log_x = np.append(log_r[:-1] + log_z, log_r[-1])
        return log_z, log_1mz, log_r, log_x

    def log_forward(self, u):
        log_z, log_1mz, log_r, log_x = self._parts(u)
        return log_x, float(np.sum(log_z + log_1mz + log_r[:-1]))

    def forward(self, u):
        log_x, log_jac = self.log_forward(u)
        return np.exp(log_x), log_jac

    def backward(self, u, x, grad):
        z = special.expit(u - self._shift(u.shape[0]))
        free = np.empty_like(u)
        # running sum of the log-scale gradient beyond the current break,
        # plus one for each later log r_k term of the Jacobian
        tail = grad[-1]
        for k in range(u.shape[0] - 1, -1, -1):
            free[k] = (1.0 - z[k]) * grad[k] - z[k] * tail + 1.0 - 2.0 * z[k]
            tail = grad[k] + tail + 1.0
        return free

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0) or abs(np.sum(x) - 1.0) > 1e-8:
            raise DomainError('simplex values must be positive and sum to one')
        remaining = 1.0 - np.concatenate([[0.0], np.cumsum(x[:-1])])
        return special.logit(x[:-1] / remaining[:-1]) + self._shift(x.shape[0] - 1)


TRANSFORMS = {cls.name: cls for cls in (Identity, Log, Logit, StickBreaking)}


# parameter space


@dataclass(frozen=True)
class Block:
    name: str
    labels: Tuple[str, ...]
    transform: Transform

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def free_size(self) -> int:
        return self.transform.free_size(self.size)


class ParameterSpace:
    def __init__(self, blocks: Sequence[Block]):
        names = [b.name for b in blocks]
        if len(set(names)) != len(names):
            raise ConfigError('parameter blocks must have distinct names')
        self.blocks = tuple(blocks)
        self._slices = dict()    # type: Dict[str, slice]
        start = 0
        for block in self.blocks:
            self._slices[block.name] = slice(start, start + block.free_size)
            start += block.free_size
        self.dim = start

    @property
    def labels(self) -> List[str]:
        return [label for block in self.blocks for label in block.labels]

    @property
    def free_labels(self) -> List[str]:
        result = []
        for block in self.blocks:
            if block.free_size == block.size:
                result.extend(block.labels)
            else:
                result.extend('{}__free'.format(label) for label in block.labels[:block.free_size])
        return result

    def forward(self, u: np.ndarray) -> Tuple[Values, float]:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim, ):
            raise ShapeError('expected {} free coordinates, got shape {}'.format(self.dim, u.shape))
        values = dict()     # type: Values
        log_jac = 0.0
        for block in self.blocks:
            x, lj = block.transform.forward(u[self._slices[block.name]])
            values[block.name] = x
            log_jac += lj
        return values, log_jac

    def backward(self, u: np.ndarray, values: Values, grads: Values) -> np.ndarray:
        result = np.zeros(self.dim)
        for block in self.blocks:
            grad = grads.get(block.name)
            if grad is None:
                grad = np.zeros(block.size)
            part = self._slices[block.name]
            result[part] = block.transform.backward(u[part], values[block.name], np.asarray(grad, dtype=float))
        return result

    def constrain(self, u) -> Values:
        return self.forward(u)[0]

    def unconstrain(self, values: Values) -> np.ndarray:
        parts = []
        for block in self.blocks:
            x = np.atleast_1d(np.asarray(values[block.name], dtype=float))
            if x.shape != (block.size, ):
                raise ShapeError('block {} expects {} values'.format(block.name, block.size))
            parts.append(block.transform.inverse(x))
        return np.concatenate(parts) if parts else np.zeros(0)

    def flatten(self, values: Values) -> np.ndarray:
        return np.concatenate([np.atleast_1d(values[b.name]) for b in self.blocks])


# log target


class LogTarget:
    """Unnormalised log density on the unconstrained space.

    `report` maps the block values onto the quantities returned in draws;
    by default that is the blocks themselves.
    """

    def __init__(self, space: ParameterSpace, kernel: Kernel,
                 report: Optional[Callable[[Values], Values]] = None,
                 report_labels: Optional[Sequence[Tuple[str, Tuple[str, ...]]]] = None):
        self.space = space
        self.kernel = kernel
        self._report = report
        if report_labels is None:
            report_labels = [(b.name, b.labels) for b in space.blocks]
        self.report_labels = tuple(report_labels)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def names(self) -> List[str]:
        return [label for _, labels in self.report_labels for label in labels]

    def __call__(self, u) -> Tuple[float, np.ndarray]:
        u = np.asarray(u, dtype=float)
        values, log_jac = self.space.forward(u)
        try:
            with np.errstate(all='ignore'):
                value, grads = self.kernel(values)
                grad = self.space.backward(u, values, grads)
        except DomainError:
            return -np.inf, np.zeros(self.dim)
        total = value + log_jac
        if not np.isfinite(total) or not np.all(np.isfinite(grad)):
            return -np.inf, np.zeros(self.dim)
        return float(total), grad

    def log_density(self, u) -> float:
        return self(u)[0]

    def constrain(self, u) -> Values:
        values = self.space.constrain(u)
        if self._report is None:
            return values
        return self._report(values)

    def constrain_flat(self, u) -> np.ndarray:
        reported = self.constrain(u)
        return np.concatenate([np.atleast_1d(reported[name]) for name, _ in self.report_labels])


# priors


def split_data(data: Sequence[Dataset], need_history: bool = True) -> Tuple[Dataset, Tuple[Dataset, ...]]:
    """First data set is the current one; the rest are historical, in order."""
    data = list(data)
    if not data:
        raise DataError('no data sets given')
    current = data[0].as_current()
    history = tuple(d.as_historical(h) for h, d in enumerate(data[1:], start=1))
    if need_history and not history:
        raise DataError('this prior needs at least one historical data set')
    for d in history:
        if d.names != current.names:
            raise ShapeError('historical data set {} has columns {}, current has {}'.format(
                d.index, d.names, current.names))
    return current, history


class BasePrior:
    """Unnormalised posterior for one borrowing prior.

    Subclasses describe their blocks in `space` and evaluate the density on
    the constrained block values in `kernel`; `current=False` drops the
    current-data likelihood, leaving the prior's own density.
    """
    kind = ''
    needs_history = True
    # the prior density integrates to one without further work
    normalized = False

    def __init__(self, spec, model: ModelSpec, data: Sequence[Dataset]):
        self.spec = spec
        self.model = model
        self.current, self.history = split_data(data, need_history=self.needs_history)
        for dataset in (self.current, ) + self.history:
            model.check(dataset)

    @property
    def H(self) -> int:
        return len(self.history)

    @property
    def names(self) -> Tuple[str, ...]:
        return self.model.names or self.current.names

    def hist_labels(self, suffix: str) -> Tuple[str, ...]:
        return tuple('{}_{}'.format(name, suffix) for name in self.names)

    def current_blocks(self) -> List[Block]:
        blocks = [Block('beta', self.names, Identity())]
        if not self.model.dispersion_fixed:
            blocks.append(Block(DISPERSION, (DISPERSION, ), Log()))
        return blocks

    def loglik(self, beta, phi, data: Dataset) -> Tuple[float, np.ndarray, float]:
        """Log-likelihood, its beta gradient and its phi derivative."""
        value, grad_beta, grad_tau = value_and_grad(self.model.family, self.model.link, beta, phi, data)
        return value, grad_beta, grad_tau / phi

    def phi(self, values: Values, name: str = DISPERSION) -> float:
        if self.model.dispersion_fixed:
            return 1.0
        return float(values[name][0])

    @cached_property
    def space(self) -> ParameterSpace:
        raise NotImplementedError

    def kernel(self, values: Values, current: bool = True) -> Tuple[float, Values]:
        raise NotImplementedError

    def report(self, values: Values) -> Values:
        return values

    def report_labels(self) -> List[Tuple[str, Tuple[str, ...]]]:
        return [(b.name, b.labels) for b in self.space.blocks]

    def _target(self, current: bool) -> LogTarget:
        return LogTarget(
            space=self.space,
            kernel=lambda values: self.kernel(values, current=current),
            report=self.report,
            report_labels=self.report_labels(),
        )

    @cached_property
    def target(self) -> LogTarget:
        return self._target(current=True)

    @cached_property
    def prior_target(self) -> LogTarget:
        return self._target(current=False)
