# built-in
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

# external
import numpy as np

# app
from ._exceptions import ConfigError


def _vector(value, p: int, default: float, label: str, positive: bool = False) -> np.ndarray:
    if value is None:
        return np.full(p, default)
    array = np.atleast_1d(np.asarray(value, dtype=float))
    if array.shape[0] == 1:
        array = np.full(p, array[0])
    if array.shape != (p, ):
        raise ConfigError('{} needs {} values, got {}'.format(label, p, array.shape[0]))
    if positive and np.any(array <= 0):
        raise ConfigError('{} must be positive'.format(label))
    return array


def _positive(value: float, label: str) -> None:
    if not value > 0:
        raise ConfigError('{} must be positive, got {}'.format(label, value))


@dataclass(frozen=True)
class InitialPriorHyper:
    """Independent normals on beta and a half-normal on the dispersion."""
    mu0: Optional[Sequence[float]] = None
    sigma0: Optional[Sequence[float]] = None
    alpha0: float = 0.0
    gamma0: float = 10.0

    def __post_init__(self):
        _positive(self.gamma0, 'gamma0')
        if self.sigma0 is not None and np.any(np.asarray(self.sigma0, dtype=float) <= 0):
            raise ConfigError('sigma0 must be positive')

    def means(self, p: int) -> np.ndarray:
        return _vector(self.mu0, p, 0.0, 'mu0')

    def sds(self, p: int) -> np.ndarray:
        return _vector(self.sigma0, p, 10.0, 'sigma0', positive=True)


@dataclass(frozen=True)
class InitialSpec:
    kind = 'initial'
    hyper: InitialPriorHyper = field(default_factory=InitialPriorHyper)


@dataclass(frozen=True)
class PPSpec:
    kind = 'pp'
    a0: Tuple[float, ...] = ()
    hyper: InitialPriorHyper = field(default_factory=InitialPriorHyper)

    def __post_init__(self):
        a0 = tuple(float(v) for v in np.atleast_1d(self.a0))
        if not a0:
            raise ConfigError('power prior needs a0 values')
        if any(not 0 <= v <= 1 for v in a0):
            raise ConfigError('a0 values must lie in [0, 1], got {}'.format(a0))
        object.__setattr__(self, 'a0', a0)


@dataclass(frozen=True)
class NPPSpec:
    """`grids` holds one lognc grid per historical data set."""
    kind = 'npp'
    grids: Tuple = ()
    a0_shape1: float = 1.0
    a0_shape2: float = 1.0
    hyper: InitialPriorHyper = field(default_factory=InitialPriorHyper)

    def __post_init__(self):
        _positive(self.a0_shape1, 'a0_shape1')
        _positive(self.a0_shape2, 'a0_shape2')
        object.__setattr__(self, 'grids', tuple(self.grids))


@dataclass(frozen=True)
class NAPPSpec:
    kind = 'napp'
    a0_shape1: float = 1.0
    a0_shape2: float = 1.0

    def __post_init__(self):
        _positive(self.a0_shape1, 'a0_shape1')
        _positive(self.a0_shape2, 'a0_shape2')


@dataclass(frozen=True)
class BHMSpec:
    """Meta-analytic hierarchy: beta_hj ~ N(mu_j, sigma_j^2) for every data set."""
    kind = 'bhm'
    meta_mean_mean: Optional[Sequence[float]] = None
    meta_mean_sd: Optional[Sequence[float]] = None
    meta_sd_mean: Optional[Sequence[float]] = None
    meta_sd_sd: Optional[Sequence[float]] = None
    disp_mean: float = 0.0
    disp_sd: float = 10.0
    disp_mean_hist: float = 0.0
    disp_sd_hist: float = 10.0

    def __post_init__(self):
        _positive(self.disp_sd, 'disp_sd')
        _positive(self.disp_sd_hist, 'disp_sd_hist')

    def resolve(self, p: int):
        return (
            _vector(self.meta_mean_mean, p, 0.0, 'meta_mean_mean'),
            _vector(self.meta_mean_sd, p, 10.0, 'meta_mean_sd', positive=True),
            _vector(self.meta_sd_mean, p, 0.0, 'meta_sd_mean'),
            _vector(self.meta_sd_sd, p, 1.0, 'meta_sd_sd', positive=True),
        )


@dataclass(frozen=True)
class CPSpec:
    kind = 'cp'
    p_spike: float = 0.1
    spike_mean: float = 200.0
    spike_sd: float = 0.1
    slab_mean: float = 0.0
    slab_sd: float = 5.0
    beta0_mean: Optional[Sequence[float]] = None
    beta0_sd: Optional[Sequence[float]] = None
    disp_mean: float = 0.0
    disp_sd: float = 10.0
    disp_mean_hist: float = 0.0
    disp_sd_hist: float = 10.0

    def __post_init__(self):
        if not 0 <= self.p_spike <= 1:
            raise ConfigError('p_spike must lie in [0, 1], got {}'.format(self.p_spike))
        for label in ('spike_sd', 'slab_sd', 'disp_sd', 'disp_sd_hist'):
            _positive(getattr(self, label), label)


@dataclass(frozen=True)
class LEAPSpec:
    kind = 'leap'
    K: int = 2
    prob_conc: Optional[Sequence[float]] = None
    hyper: InitialPriorHyper = field(default_factory=InitialPriorHyper)

    def __post_init__(self):
        if self.K < 2:
            raise ConfigError('LEAP needs at least two mixture components, got K={}'.format(self.K))
        conc = self.concentration
        if np.any(conc <= 0):
            raise ConfigError('prob_conc must be positive')

    @property
    def concentration(self) -> np.ndarray:
        return _vector(self.prob_conc, self.K, 1.0, 'prob_conc')


@dataclass(frozen=True)
class RMAPSpec:
    """Robust MAP prior: the BHM-induced prior mixed with a vague one."""
    kind = 'rmap'
    w: float = 0.1
    bhm: BHMSpec = field(default_factory=BHMSpec)
    vague: InitialPriorHyper = field(default_factory=InitialPriorHyper)

    def __post_init__(self):
        if not 0 <= self.w <= 1:
            raise ConfigError('mixture weight w must lie in [0, 1], got {}'.format(self.w))


def auto_a0(n: int, n0: int) -> float:
    """Half the ratio of current to historical sample size, capped at one."""
    if n < 1 or n0 < 1:
        raise ConfigError('sample sizes must be positive')
    return min(1.0, n / (2.0 * n0))
