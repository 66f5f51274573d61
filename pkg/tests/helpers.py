# built-in
from typing import Callable, Optional, Sequence

# external
import numpy as np
from scipy import integrate

# project
from hdprior import Dataset, Draws, ModelSpec, get_family, get_link, simulate


LINK_FOR = dict(gaussian='identity', binomial='logit', poisson='log', gamma='log', inverse_gaussian='log')
PHI_FOR = dict(gaussian=1.5, binomial=1.0, poisson=1.0, gamma=0.5, inverse_gaussian=0.3)


def numeric_grad(f: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


def assert_gradient(target, u, rtol: float = 1e-5, atol: float = 1e-5) -> None:
    value, grad = target(u)
    assert np.isfinite(value)
    expected = numeric_grad(target.log_density, u)
    np.testing.assert_allclose(grad, expected, rtol=rtol, atol=atol)


def make_dataset(family: str, n: int = 40, beta: Sequence[float] = (0.3, 0.5), phi: Optional[float] = None,
                 seed: int = 0, link: Optional[str] = None, shift: float = 0.0) -> Dataset:
    """Intercept plus standard-normal covariates, response simulated from the model."""
    rng = np.random.default_rng(seed)
    p = len(beta)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
    phi = PHI_FOR[family] if phi is None else phi
    link_obj = get_link(link or LINK_FOR[family])
    y = simulate(get_family(family), link_obj, np.asarray(beta) + shift, phi, X, rng)
    names = ('(Intercept)', ) + tuple('x{}'.format(j) for j in range(1, p))
    return Dataset(y=y, X=X, names=names)


def make_model(family: str, link: Optional[str] = None, p: int = 2) -> ModelSpec:
    names = ('(Intercept)', ) + tuple('x{}'.format(j) for j in range(1, p))
    return ModelSpec.create(family, link or LINK_FOR[family], names)


def make_data(family: str, H: int = 1, n: int = 40, n0: int = 50, seed: int = 0, **kwargs):
    """Current data set followed by H historical ones."""
    data = [make_dataset(family, n=n, seed=seed, **kwargs)]
    for h in range(1, H + 1):
        data.append(make_dataset(family, n=n0, seed=seed + 100 * h, shift=0.1 * h, **kwargs))
    return data


def random_points(dim: int, count: int = 20, seed: int = 1, scale: float = 1.0) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-scale, scale, size=(count, dim))


def make_draws(values, names: Optional[Sequence[str]] = None, unconstrained=None, seed: int = 0) -> Draws:
    """Draws around hand-made (chain, iteration, parameter) values."""
    values = np.asarray(values, dtype=float)
    chains, iterations, dim = values.shape
    names = list(names) if names is not None else ['x{}'.format(j) for j in range(1, dim + 1)]
    shape = (chains, iterations)
    return Draws(
        names=names,
        values=values,
        unconstrained=values.copy() if unconstrained is None else np.asarray(unconstrained, dtype=float),
        log_density=np.zeros(shape),
        divergent=np.zeros(shape, dtype=bool),
        accept_stat=np.full(shape, 0.8),
        tree_depth=np.ones(shape, dtype=int),
        n_leapfrog=np.ones(shape, dtype=int),
        energy=np.zeros(shape),
        step_size=np.ones(chains),
        inv_metric=np.ones((chains, dim)),
        seed=seed,
        free_names=list(names),
    )


def _conjugate_terms(phi: float, data: Sequence[Dataset], weights: Sequence[float], hyper):
    """log of the beta integral of prod L_d(beta, phi)^w_d N(beta | mu0, sigma0^2), with the
    conditional posterior mean and covariance of beta, for the gaussian identity model."""
    p = data[0].p
    mu0, sd0 = hyper.means(p), hyper.sds(p)
    precision = np.diag(1.0 / sd0 ** 2)
    shift = mu0 / sd0 ** 2
    value = -0.5 * float(np.sum(mu0 ** 2 / sd0 ** 2)) - float(np.sum(np.log(sd0)))
    for dataset, w in zip(data, weights):
        y = dataset.y - dataset.offset
        precision = precision + w * dataset.X.T @ dataset.X / phi
        shift = shift + w * dataset.X.T @ y / phi
        value += w * (-0.5 * dataset.n * np.log(2 * np.pi * phi) - float(y @ y) / (2 * phi))
    chol = np.linalg.cholesky(precision)
    cov = np.linalg.inv(precision)
    mean = cov @ shift
    value += 0.5 * float(shift @ mean) - float(np.sum(np.log(np.diag(chol))))
    return value, mean, cov


def _log_phi_grid(data, weights, hyper):
    """Integrand over t = log phi on a fine grid, dispersion prior and Jacobian included."""
    t = np.linspace(-8.0, 8.0, 8001)
    values, means, covs = [], [], []
    for phi in np.exp(t):
        value, mean, cov = _conjugate_terms(phi, data, weights, hyper)
        prior = np.log(2.0) - 0.5 * np.log(2 * np.pi) - np.log(hyper.gamma0) - 0.5 * (phi / hyper.gamma0) ** 2
        values.append(value + prior + np.log(phi))
        means.append(mean)
        covs.append(cov)
    return t, np.array(values), np.array(means), np.array(covs)


def gaussian_log_z(data: Sequence[Dataset], weights: Sequence[float], hyper) -> float:
    """log of the integral of prod L_d^w_d times the initial prior, beta in closed form, phi by quadrature."""
    t, values, _, _ = _log_phi_grid(data, weights, hyper)
    peak = values.max()
    return float(peak + np.log(integrate.trapezoid(np.exp(values - peak), t)))


def gaussian_posterior(data: Sequence[Dataset], weights: Sequence[float], hyper):
    """Posterior mean and covariance of beta under the same weighted gaussian model."""
    t, values, means, covs = _log_phi_grid(data, weights, hyper)
    density = np.exp(values - values.max())
    density /= integrate.trapezoid(density, t)
    mean = integrate.trapezoid(density[:, None] * means, t, axis=0)
    second = integrate.trapezoid(density[:, None, None] * (covs + np.einsum('ti,tj->tij', means, means)), t, axis=0)
    return mean, second - np.outer(mean, mean)
