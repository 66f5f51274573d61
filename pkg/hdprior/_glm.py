# built-in
from dataclasses import dataclass, field, replace
from logging import getLogger
from typing import Dict, Optional, Sequence, Tuple, Type, Union

# external
import numpy as np
from scipy import optimize, special, stats

# app
from ._constants import (
    ADMISSIBLE_LINKS, INTERCEPT, IRLS_MAX_ITER, IRLS_TOL, MAX_COEF_NORM, MU_CLAMP,
)
from ._exceptions import (
    BoundaryError, ConfigError, DataError, DomainError, NonConvergenceError, ShapeError, SingularityError,
)


logger = getLogger('hdprior')
LOG_2PI = np.log(2 * np.pi)


# links


class Link:
    """Mean link g: mu = g^-1(eta).

    `log_mu` and `log1m_mu` are only used by the binomial family; links that can
    evaluate them without forming mu override the defaults.
    """
    name = ''

    def inverse(self, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, eta: np.ndarray) -> np.ndarray:
        """d mu / d eta"""
        raise NotImplementedError

    def link(self, mu: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_mu(self, eta):
        return np.log(self.inverse(eta))

    def log1m_mu(self, eta):
        return np.log1p(-self.inverse(eta))

    def dlog_mu(self, eta):
        return self.deriv(eta) / self.inverse(eta)

    def dlog1m_mu(self, eta):
        return -self.deriv(eta) / (1.0 - self.inverse(eta))

    def __repr__(self) -> str:
        return '{}()'.format(type(self).__name__)


class IdentityLink(Link):
    name = 'identity'

    def inverse(self, eta):
        return np.asarray(eta, dtype=float)

    def deriv(self, eta):
        return np.ones_like(eta, dtype=float)

    def link(self, mu):
        return np.asarray(mu, dtype=float)


class LogLink(Link):
    name = 'log'

    def inverse(self, eta):
        return np.exp(eta)

    def deriv(self, eta):
        return np.exp(eta)

    def link(self, mu):
        return np.log(mu)

    def log_mu(self, eta):
        return np.asarray(eta, dtype=float)

    def log1m_mu(self, eta):
        return np.log(-np.expm1(eta))

    def dlog_mu(self, eta):
        return np.ones_like(eta, dtype=float)

    def dlog1m_mu(self, eta):
        return np.exp(eta) / np.expm1(eta)


class LogitLink(Link):
    name = 'logit'

    def inverse(self, eta):
        return special.expit(eta)

    def deriv(self, eta):
        mu = special.expit(eta)
        return mu * (1.0 - mu)

    def link(self, mu):
        return special.logit(mu)

    def log_mu(self, eta):
        return -np.logaddexp(0.0, -eta)

    def log1m_mu(self, eta):
        return -np.logaddexp(0.0, eta)

    def dlog_mu(self, eta):
        return special.expit(-eta)

    def dlog1m_mu(self, eta):
        return -special.expit(eta)


class ProbitLink(Link):
    name = 'probit'

    def inverse(self, eta):
        return special.ndtr(eta)

    def deriv(self, eta):
        return stats.norm.pdf(eta)

    def link(self, mu):
        return special.ndtri(mu)

    def log_mu(self, eta):
        return special.log_ndtr(eta)

    def log1m_mu(self, eta):
        return special.log_ndtr(-eta)

    def dlog_mu(self, eta):
        return np.exp(stats.norm.logpdf(eta) - special.log_ndtr(eta))

    def dlog1m_mu(self, eta):
        return -np.exp(stats.norm.logpdf(eta) - special.log_ndtr(-eta))


class CloglogLink(Link):
    name = 'cloglog'

    def inverse(self, eta):
        return np.clip(-np.expm1(-np.exp(eta)), MU_CLAMP, 1.0 - MU_CLAMP)

    def deriv(self, eta):
        # mu is flat where the inverse is clamped
        raw = -np.expm1(-np.exp(eta))
        inside = (raw > MU_CLAMP) & (raw < 1.0 - MU_CLAMP)
        return np.where(inside, np.exp(eta - np.exp(eta)), 0.0)

    def link(self, mu):
        return np.log(-np.log1p(-mu))


class CauchitLink(Link):
    name = 'cauchit'

    def inverse(self, eta):
        return 0.5 + np.arctan(eta) / np.pi

    def deriv(self, eta):
        return 1.0 / (np.pi * (1.0 + np.square(eta)))

    def link(self, mu):
        return np.tan(np.pi * (mu - 0.5))


class InverseLink(Link):
    name = 'inverse'

    def inverse(self, eta):
        with np.errstate(divide='ignore'):
            return 1.0 / eta

    def deriv(self, eta):
        with np.errstate(divide='ignore'):
            return -1.0 / np.square(eta)

    def link(self, mu):
        return 1.0 / mu


class InverseSquaredLink(Link):
    name = 'inverse_squared'

    def inverse(self, eta):
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(eta > 0, np.power(np.abs(eta), -0.5), np.nan)

    def deriv(self, eta):
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(eta > 0, -0.5 * np.power(np.abs(eta), -1.5), np.nan)

    def link(self, mu):
        return 1.0 / np.square(mu)


class SqrtLink(Link):
    name = 'sqrt'

    def inverse(self, eta):
        return np.square(eta)

    def deriv(self, eta):
        return 2.0 * np.asarray(eta, dtype=float)

    def link(self, mu):
        return np.sqrt(mu)


# families


class Family:
    """Exponential-family response distribution with a(phi) = phi.

    All pointwise quantities are returned per row; log densities include the
    normalising term c(y, phi).
    """
    name = ''
    dispersion_fixed = False

    def check_response(self, y: np.ndarray) -> None:
        pass

    def valid_mean(self, mu: np.ndarray, eta: np.ndarray, link: Link) -> bool:
        return bool(np.all(np.isfinite(mu)))

    def variance(self, mu: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def start_mu(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float).copy()

    def simulate(self, mu: np.ndarray, phi: float, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _loglik_mu(self, y, mu, phi):
        raise NotImplementedError

    def _tau_score_mu(self, y, mu, phi):
        return np.zeros_like(mu)

    def tau_information(self, n: int, phi: float) -> float:
        """Expected information for tau = log(phi), summed over n rows."""
        return 0.0

    def mean(self, eta: np.ndarray, link: Link) -> np.ndarray:
        if not np.all(np.isfinite(eta)):
            raise DomainError('non-finite linear predictor')
        mu = link.inverse(eta)
        if not self.valid_mean(mu, eta, link):
            raise DomainError('mean outside the {} domain under the {} link'.format(self.name, link.name))
        return mu

    def loglik_terms(self, y, eta, phi, link):
        return self._loglik_mu(y, self.mean(eta, link), phi)

    def eta_scores(self, y, eta, phi, link):
        """d loglik / d eta per row."""
        mu = self.mean(eta, link)
        return (y - mu) / (phi * self.variance(mu)) * link.deriv(eta)

    def tau_scores(self, y, eta, phi, link):
        """d loglik / d log(phi) per row."""
        return self._tau_score_mu(y, self.mean(eta, link), phi)

    def working_weights(self, eta, link):
        mu = self.mean(eta, link)
        return np.square(link.deriv(eta)) / self.variance(mu)

    def __repr__(self) -> str:
        return '{}()'.format(type(self).__name__)


class Gaussian(Family):
    name = 'gaussian'

    def variance(self, mu):
        return np.ones_like(mu)

    def simulate(self, mu, phi, rng):
        return rng.normal(mu, np.sqrt(phi))

    def _loglik_mu(self, y, mu, phi):
        return -0.5 * (LOG_2PI + np.log(phi)) - np.square(y - mu) / (2.0 * phi)

    def _tau_score_mu(self, y, mu, phi):
        return -0.5 + np.square(y - mu) / (2.0 * phi)

    def tau_information(self, n, phi):
        return 0.5 * n


class Binomial(Family):
    """Bernoulli rows (one trial per row)."""
    name = 'binomial'
    dispersion_fixed = True

    def check_response(self, y):
        if not np.all((y == 0) | (y == 1)):
            raise DataError('binomial response must be 0 or 1')

    def valid_mean(self, mu, eta, link):
        if link.name == 'log':
            return bool(np.all(eta < 0))
        return bool(np.all((mu >= 0) & (mu <= 1)))

    def variance(self, mu):
        mu = np.clip(mu, MU_CLAMP, 1.0 - MU_CLAMP)
        return mu * (1.0 - mu)

    def start_mu(self, y):
        return (np.asarray(y, dtype=float) + 0.5) / 2.0

    def simulate(self, mu, phi, rng):
        return rng.binomial(1, mu).astype(float)

    def loglik_terms(self, y, eta, phi, link):
        self.mean(eta, link)
        with np.errstate(divide='ignore'):
            return np.where(y > 0, link.log_mu(eta), link.log1m_mu(eta))

    def eta_scores(self, y, eta, phi, link):
        self.mean(eta, link)
        return np.where(y > 0, link.dlog_mu(eta), link.dlog1m_mu(eta))


class Poisson(Family):
    name = 'poisson'
    dispersion_fixed = True

    def check_response(self, y):
        if not np.all((y >= 0) & (np.floor(y) == y)):
            raise DataError('poisson response must be a non-negative integer')

    def valid_mean(self, mu, eta, link):
        return bool(np.all(np.isfinite(mu) & (mu > 0)))

    def variance(self, mu):
        return mu

    def start_mu(self, y):
        return np.asarray(y, dtype=float) + 0.1

    def simulate(self, mu, phi, rng):
        return rng.poisson(mu).astype(float)

    def _loglik_mu(self, y, mu, phi):
        return special.xlogy(y, mu) - mu - special.gammaln(y + 1.0)


class Gamma(Family):
    name = 'gamma'

    def check_response(self, y):
        if not np.all(y > 0):
            raise DataError('gamma response must be positive')

    def valid_mean(self, mu, eta, link):
        return bool(np.all(np.isfinite(mu) & (mu > 0)))

    def variance(self, mu):
        return np.square(mu)

    def simulate(self, mu, phi, rng):
        shape = 1.0 / phi
        return rng.gamma(shape=shape, scale=mu / shape)

    def _loglik_mu(self, y, mu, phi):
        k = 1.0 / phi
        return k * np.log(k) - k * np.log(mu) + (k - 1.0) * np.log(y) - k * y / mu - special.gammaln(k)

    def _tau_score_mu(self, y, mu, phi):
        k = 1.0 / phi
        return -k * (np.log(k) + 1.0 - special.digamma(k) - np.log(mu) + np.log(y) - y / mu)

    def tau_information(self, n, phi):
        k = 1.0 / phi
        return n * k * k * (special.polygamma(1, k) - 1.0 / k)


class InverseGaussian(Family):
    name = 'inverse_gaussian'

    def check_response(self, y):
        if not np.all(y > 0):
            raise DataError('inverse_gaussian response must be positive')

    def valid_mean(self, mu, eta, link):
        return bool(np.all(np.isfinite(mu) & (mu > 0)))

    def variance(self, mu):
        return np.power(mu, 3)

    def simulate(self, mu, phi, rng):
        return rng.wald(mu, 1.0 / phi)

    def _loglik_mu(self, y, mu, phi):
        return -0.5 * (LOG_2PI + np.log(phi) + 3.0 * np.log(y)) - np.square(y - mu) / (2.0 * phi * mu * mu * y)

    def _tau_score_mu(self, y, mu, phi):
        return -0.5 + np.square(y - mu) / (2.0 * phi * mu * mu * y)

    def tau_information(self, n, phi):
        return 0.5 * n


FAMILIES = {
    cls.name: cls for cls in (Gaussian, Binomial, Poisson, Gamma, InverseGaussian)
}  # type: Dict[str, Type[Family]]
LINKS = {
    cls.name: cls for cls in (
        IdentityLink, LogLink, LogitLink, ProbitLink, CloglogLink,
        CauchitLink, InverseLink, InverseSquaredLink, SqrtLink,
    )
}  # type: Dict[str, Type[Link]]


def get_family(name: Union[str, Family]) -> Family:
    if isinstance(name, Family):
        return name
    if name not in FAMILIES:
        raise ConfigError('unknown family {!r}; expected one of {}'.format(name, ', '.join(FAMILIES)))
    return FAMILIES[name]()


def get_link(name: Union[str, Link]) -> Link:
    if isinstance(name, Link):
        return name
    if name not in LINKS:
        raise ConfigError('unknown link {!r}; expected one of {}'.format(name, ', '.join(LINKS)))
    return LINKS[name]()


def check_pair(family: Family, link: Link) -> None:
    if link.name not in ADMISSIBLE_LINKS[family.name]:
        raise ConfigError('link {!r} is not admissible for the {} family'.format(link.name, family.name))


# data


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Dataset:
    """Response, design and offset of one data set.

    `role` is 'current' or 'historical'; historical sets carry their 1-based
    position in `index`.
    """
    y: np.ndarray
    X: np.ndarray
    offset: Optional[np.ndarray] = None
    names: Tuple[str, ...] = ()
    role: str = 'current'
    index: int = 0

    def __post_init__(self):
        y = _frozen(self.y)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if y.ndim != 1 or X.ndim != 2:
            raise ShapeError('y must be a vector and X a matrix')
        if y.shape[0] < 1:
            raise DataError('a data set needs at least one row')
        if X.shape[0] != y.shape[0]:
            raise ShapeError('X has {} rows but y has {}'.format(X.shape[0], y.shape[0]))
        X.flags.writeable = False
        offset = np.zeros(y.shape[0]) if self.offset is None else self.offset
        offset = _frozen(offset)
        if offset.shape != y.shape:
            raise ShapeError('offset has length {} but y has {}'.format(offset.shape[0], y.shape[0]))
        for label, array in (('y', y), ('X', X), ('offset', offset)):
            if not np.all(np.isfinite(array)):
                raise DataError('{} contains missing or non-finite values'.format(label))
        names = tuple(self.names) or tuple('x{}'.format(j + 1) for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ShapeError('{} names given for {} columns'.format(len(names), X.shape[1]))
        if self.role not in ('current', 'historical'):
            raise DataError('unknown data role {!r}'.format(self.role))
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'offset', offset)
        object.__setattr__(self, 'names', names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def is_current(self) -> bool:
        return self.role == 'current'

    def as_historical(self, index: int) -> 'Dataset':
        return replace(self, role='historical', index=index)

    def as_current(self) -> 'Dataset':
        return replace(self, role='current', index=0)

    @classmethod
    def stack(cls, datasets: Sequence['Dataset'], role: str = 'historical', index: int = 1) -> 'Dataset':
        """Row-bind data sets sharing one design layout."""
        first = datasets[0]
        for other in datasets[1:]:
            if other.names != first.names:
                raise ShapeError('cannot stack data sets with different columns')
        return cls(
            y=np.concatenate([d.y for d in datasets]),
            X=np.vstack([d.X for d in datasets]),
            offset=np.concatenate([d.offset for d in datasets]),
            names=first.names,
            role=role,
            index=index,
        )


@dataclass(frozen=True)
class ModelSpec:
    family: Family
    link: Link
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        family = get_family(self.family)
        link = get_link(self.link)
        check_pair(family, link)
        if len(set(self.names)) != len(self.names):
            raise ConfigError('coefficient names must be distinct')
        object.__setattr__(self, 'family', family)
        object.__setattr__(self, 'link', link)
        object.__setattr__(self, 'names', tuple(self.names))

    @classmethod
    def create(cls, family: str, link: Optional[str] = None, names: Sequence[str] = ()) -> 'ModelSpec':
        if link is None:
            link = ADMISSIBLE_LINKS.get(family, ('identity', ))[0]
        return cls(family=get_family(family), link=get_link(link), names=tuple(names))

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def dispersion_fixed(self) -> bool:
        return self.family.dispersion_fixed

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self.names

    def check(self, dataset: Dataset) -> None:
        if dataset.p != self.p:
            raise ShapeError('data set has {} columns, model has {}'.format(dataset.p, self.p))
        self.family.check_response(dataset.y)


# likelihood


def _eta(beta, data: Dataset) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p, ):
        raise ShapeError('beta has shape {} but X has {} columns'.format(beta.shape, data.p))
    return data.X @ beta + data.offset


def _check_phi(family: Family, phi: float) -> float:
    phi = float(phi)
    if not np.isfinite(phi) or phi <= 0:
        raise DomainError('dispersion must be positive and finite, got {}'.format(phi))
    if family.dispersion_fixed:
        return 1.0
    return phi


def loglik_terms(family: Family, link: Link, beta, phi: float, data: Dataset) -> np.ndarray:
    """Per-row log densities."""
    phi = _check_phi(family, phi)
    return family.loglik_terms(data.y, _eta(beta, data), phi, link)


def log_likelihood(family: Family, link: Link, beta, phi: float, data: Dataset) -> float:
    check_pair(family, link)
    return float(np.sum(loglik_terms(family, link, beta, phi, data)))


def log_likelihood_grad(family: Family, link: Link, beta, phi: float, data: Dataset) -> np.ndarray:
    """Gradient in (beta, tau = log phi); the tau entry is absent when phi is fixed."""
    check_pair(family, link)
    phi = _check_phi(family, phi)
    eta = _eta(beta, data)
    grad_beta = data.X.T @ family.eta_scores(data.y, eta, phi, link)
    if family.dispersion_fixed:
        return grad_beta
    grad_tau = np.sum(family.tau_scores(data.y, eta, phi, link))
    return np.append(grad_beta, grad_tau)


def value_and_grad(family: Family, link: Link, beta, phi: float, data: Dataset) -> Tuple[float, np.ndarray, float]:
    """Log-likelihood with its beta gradient and tau derivative in one pass."""
    phi = _check_phi(family, phi)
    eta = _eta(beta, data)
    value = float(np.sum(family.loglik_terms(data.y, eta, phi, link)))
    grad_beta = data.X.T @ family.eta_scores(data.y, eta, phi, link)
    grad_tau = 0.0
    if not family.dispersion_fixed:
        grad_tau = float(np.sum(family.tau_scores(data.y, eta, phi, link)))
    return value, grad_beta, grad_tau


def expected_information(family: Family, link: Link, beta, phi: float, data: Dataset) -> np.ndarray:
    """Fisher information in (beta, tau) coordinates.

    The beta/tau cross block vanishes for every supported family, so the
    Jacobian of tau = log(phi) only rescales the dispersion entry.
    """
    check_pair(family, link)
    phi = _check_phi(family, phi)
    eta = _eta(beta, data)
    weights = family.working_weights(eta, link) / phi
    block = (data.X * weights[:, None]).T @ data.X
    block = 0.5 * (block + block.T)
    if family.dispersion_fixed:
        return block
    p = data.p
    info = np.zeros((p + 1, p + 1))
    info[:p, :p] = block
    info[p, p] = family.tau_information(data.n, phi)
    return info


# maximum likelihood


@dataclass
class MleFit:
    beta_hat: np.ndarray
    phi_hat: float
    info: np.ndarray
    converged: bool
    iterations: int
    names: Tuple[str, ...] = field(default=())

    @property
    def tau_hat(self) -> float:
        return float(np.log(self.phi_hat))

    def theta_hat(self, dispersion_fixed: bool) -> np.ndarray:
        if dispersion_fixed:
            return np.array(self.beta_hat, dtype=float)
        return np.append(self.beta_hat, self.tau_hat)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(np.linalg.inv(self.info)))


def _start_eta(family: Family, link: Link, data: Dataset) -> np.ndarray:
    mu0 = family.start_mu(data.y)
    with np.errstate(all='ignore'):
        eta0 = link.link(mu0)
        if not np.all(np.isfinite(eta0)):
            eta0 = link.link(np.full(data.n, np.mean(mu0)))
    if not np.all(np.isfinite(eta0)):
        raise DomainError('cannot find starting values for the {} link'.format(link.name))
    return eta0


def _hugs_boundary(family: Family, y: np.ndarray, mu: np.ndarray) -> bool:
    if family.name == 'binomial':
        return bool(np.any(np.abs(y - mu) < 1e-8))
    if family.name == 'poisson':
        return bool(np.any((y == 0) & (mu < 1e-8)))
    return False


def _irls(family: Family, link: Link, data: Dataset) -> Tuple[np.ndarray, bool, int]:
    X, y, offset = data.X, data.y, data.offset
    eta = _start_eta(family, link, data)
    beta = np.zeros(data.p)
    first = True
    for iteration in range(1, IRLS_MAX_ITER + 1):
        with np.errstate(all='ignore'):
            mu = link.inverse(eta)
            d = link.deriv(eta)
            weights = np.square(d) / family.variance(mu)
            z = np.where(d != 0, eta - offset + (y - mu) / d, eta - offset)
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(z))):
            logger.debug('working weights became non-finite at iteration %s', iteration)
            return beta, False, iteration
        root = np.sqrt(weights)
        proposal = np.linalg.lstsq(X * root[:, None], z * root, rcond=None)[0]

        # step halving keeps the linear predictor inside the family domain
        step = proposal - beta
        for _ in range(30):
            candidate = beta + step
            eta_new = X @ candidate + offset
            try:
                family.mean(eta_new, link)
            except DomainError:
                if first:
                    raise
                step = step / 2
                continue
            break
        else:
            raise NonConvergenceError('step halving failed at iteration {}'.format(iteration))
        first = False

        change = np.max(np.abs(candidate - beta))
        beta, eta = candidate, eta_new
        if np.linalg.norm(beta) > MAX_COEF_NORM:
            return beta, False, iteration
        score = X.T @ family.eta_scores(y, eta, 1.0, link)
        scale = 1.0 + np.max(np.abs(beta))
        if np.max(np.abs(score)) < IRLS_TOL and change < 1e-6 * scale:
            return beta, True, iteration
        if change < 1e-13 * scale:
            return beta, True, iteration
    return beta, False, IRLS_MAX_ITER


def _fit_dispersion(family: Family, link: Link, beta: np.ndarray, data: Dataset) -> float:
    if family.dispersion_fixed:
        return 1.0
    eta = data.X @ beta + data.offset
    mu = family.mean(eta, link)
    if family.name == 'gaussian':
        return float(np.mean(np.square(data.y - mu)))
    pearson = np.mean(np.square(data.y - mu) / family.variance(mu))
    tau0 = np.log(max(pearson, 1e-8))

    def objective(tau):
        return -np.sum(family.loglik_terms(data.y, eta, np.exp(tau), link))

    result = optimize.minimize_scalar(
        objective, bounds=(tau0 - 12.0, tau0 + 12.0), method='bounded', options={'xatol': 1e-10},
    )
    return float(np.exp(result.x))


def fit_mle(family: Family, link: Link, data: Dataset) -> MleFit:
    """Maximum-likelihood fit by iteratively reweighted least squares."""
    family, link = get_family(family), get_link(link)
    check_pair(family, link)
    if data.n <= data.p:
        raise ShapeError('need more rows ({}) than columns ({})'.format(data.n, data.p))
    if np.linalg.matrix_rank(data.X) < data.p:
        raise SingularityError('design matrix is rank deficient')
    family.check_response(data.y)

    beta, converged, iterations = _irls(family, link, data)
    if not converged:
        fit = MleFit(beta, 1.0, np.full((data.p, data.p), np.nan), False, iterations, data.names)
        with np.errstate(all='ignore'):
            mu = link.inverse(data.X @ beta + data.offset)
        if _hugs_boundary(family, data.y, mu):
            raise BoundaryError('maximum likelihood estimate lies on the boundary (fitted means at 0 or 1)', fit)
        raise NonConvergenceError('IRLS did not converge after {} iterations'.format(iterations), fit)

    phi = _fit_dispersion(family, link, beta, data)
    info = expected_information(family, link, beta, phi, data)
    logger.debug('mle converged in %d iterations', iterations)
    return MleFit(beta, phi, info, True, iterations, data.names)


def simulate(family: Family, link: Link, beta, phi: float, X: np.ndarray, rng: np.random.Generator,
             offset: Optional[np.ndarray] = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    eta = X @ np.asarray(beta, dtype=float)
    if offset is not None:
        eta = eta + offset
    return family.simulate(family.mean(eta, link), phi, rng)
