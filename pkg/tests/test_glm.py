# external
import numpy as np
import pytest
from scipy import special, stats

# project
from hdprior import (
    BoundaryError, ConfigError, Dataset, DataError, DomainError, ModelSpec, NonConvergenceError, ShapeError,
    SingularityError, expected_information, fit_mle, get_family, get_link, log_likelihood, log_likelihood_grad,
)
from hdprior._constants import ADMISSIBLE_LINKS
from hdprior._glm import IdentityLink, _irls

# app
from .helpers import LINK_FOR, PHI_FOR, make_dataset, numeric_grad


def one_row(y, x=1.0, offset=0.0):
    return Dataset(y=[y], X=[[x]], offset=[offset])


def test_gaussian_standard_normal_at_zero():
    value = log_likelihood(get_family('gaussian'), get_link('identity'), [0.0], 1.0, one_row(0.0))
    assert value == pytest.approx(-0.5 * np.log(2 * np.pi))


def test_binomial_half():
    value = log_likelihood(get_family('binomial'), get_link('logit'), [0.0], 1.0, one_row(1.0))
    assert value == pytest.approx(np.log(0.5))


def test_poisson_pmf():
    value = log_likelihood(get_family('poisson'), get_link('log'), [0.0], 1.0, one_row(2.0))
    assert value == pytest.approx(-1.693147, abs=1e-6)


def test_binomial_gradient_at_zero():
    grad = log_likelihood_grad(get_family('binomial'), get_link('logit'), [0.0], 1.0, one_row(1.0))
    assert grad == pytest.approx([0.5])


def test_gaussian_gradient_at_mode():
    grad = log_likelihood_grad(get_family('gaussian'), get_link('identity'), [0.0], 1.0, one_row(0.0))
    assert grad[0] == pytest.approx(0.0)
    # tau entry: -1/2 + r^2 / (2 phi)
    assert grad[1] == pytest.approx(-0.5)


def test_gamma_matches_scipy():
    data = make_dataset('gamma', n=15, seed=3)
    family, link = get_family('gamma'), get_link('log')
    beta, phi = np.array([0.2, -0.1]), 0.4
    mu = np.exp(data.X @ beta)
    expected = np.sum(stats.gamma.logpdf(data.y, a=1 / phi, scale=mu * phi))
    assert log_likelihood(family, link, beta, phi, data) == pytest.approx(expected)


@pytest.mark.parametrize('family_name, link_name', [
    (family, link) for family, links in ADMISSIBLE_LINKS.items() for link in links
])
def test_gradient_matches_finite_differences(family_name, link_name):
    family, link = get_family(family_name), get_link(link_name)
    rng = np.random.default_rng(7)
    data = make_dataset(family_name, n=20, seed=11)
    # small coefficients keep every link inside its domain
    base = dict(identity=np.array([2.0, 0.1]), inverse=np.array([1.0, 0.05]), inverse_squared=np.array([1.0, 0.05]),
                sqrt=np.array([1.5, 0.1]), log=np.array([-0.5, 0.1]))
    for _ in range(20):
        beta = base.get(link_name, np.array([0.1, 0.3])) + rng.uniform(-0.05, 0.05, size=2)
        tau = np.log(PHI_FOR[family_name]) + rng.uniform(-0.3, 0.3)
        phi = np.exp(tau)

        def f(theta):
            return log_likelihood(family, link, theta[:2], np.exp(theta[2]) if theta.shape[0] > 2 else 1.0, data)

        theta = beta if family.dispersion_fixed else np.append(beta, tau)
        grad = log_likelihood_grad(family, link, beta, phi, data)
        np.testing.assert_allclose(grad, numeric_grad(f, theta), rtol=1e-5, atol=1e-5)


def test_offset_equals_fixed_column():
    data = make_dataset('poisson', n=30, seed=2)
    offset = np.linspace(-0.5, 0.5, data.n)
    with_offset = Dataset(y=data.y, X=data.X, offset=offset)
    absorbed = Dataset(y=data.y, X=np.column_stack([data.X, offset]))
    family, link = get_family('poisson'), get_link('log')
    beta = np.array([0.2, 0.4])
    assert log_likelihood(family, link, beta, 1.0, with_offset) == pytest.approx(
        log_likelihood(family, link, np.append(beta, 1.0), 1.0, absorbed))


def test_inadmissible_pair():
    with pytest.raises(ConfigError):
        log_likelihood(get_family('poisson'), get_link('logit'), [0.0], 1.0, one_row(1.0))
    with pytest.raises(ConfigError):
        ModelSpec.create('binomial', 'identity')
    with pytest.raises(ConfigError):
        get_family('negative_binomial')


def test_domain_and_shape_errors():
    with pytest.raises(DomainError):
        log_likelihood(get_family('binomial'), get_link('log'), [0.5], 1.0, one_row(1.0))
    with pytest.raises(ShapeError):
        log_likelihood(get_family('gaussian'), get_link('identity'), [0.0, 1.0], 1.0, one_row(0.0))


def test_response_checks():
    with pytest.raises(DataError):
        get_family('binomial').check_response(np.array([0.0, 2.0]))
    with pytest.raises(DataError):
        get_family('poisson').check_response(np.array([1.5]))
    with pytest.raises(DataError):
        get_family('gamma').check_response(np.array([0.0]))


def test_fit_binomial_intercept():
    data = Dataset(y=[1, 1, 1, 0, 0, 0, 0, 0, 0, 0], X=np.ones((10, 1)))
    fit = fit_mle(get_family('binomial'), get_link('logit'), data)
    assert fit.converged
    assert fit.beta_hat[0] == pytest.approx(special.logit(0.3), abs=1e-8)
    assert fit.phi_hat == 1.0


def test_fit_gaussian_intercept():
    data = Dataset(y=[1.0, 2.0, 3.0], X=np.ones((3, 1)))
    fit = fit_mle(get_family('gaussian'), get_link('identity'), data)
    assert fit.beta_hat[0] == pytest.approx(2.0)
    assert fit.phi_hat == pytest.approx(2.0 / 3.0)
    assert fit.info.shape == (2, 2)


def test_fit_poisson_all_zero():
    data = Dataset(y=[0.0, 0.0, 0.0], X=np.ones((3, 1)))
    with pytest.raises(NonConvergenceError) as info:
        fit_mle(get_family('poisson'), get_link('log'), data)
    assert isinstance(info.value, BoundaryError)
    assert info.value.fit is not None
    assert not info.value.fit.converged


class BrokenLink(IdentityLink):
    def deriv(self, eta):
        return np.full_like(eta, np.nan, dtype=float)


def test_irls_stops_on_non_finite_weights():
    data = Dataset(y=[1.0, 2.0, 3.0], X=np.ones((3, 1)))
    beta, converged, iteration = _irls(get_family('gaussian'), BrokenLink(), data)
    assert not converged
    assert iteration == 1
    assert beta.tolist() == [0.0]


def test_cloglog_deriv_flat_outside_clamp():
    link = get_link('cloglog')
    assert link.deriv(np.array([10.0, -40.0])).tolist() == [0.0, 0.0]
    eta = np.array([-3.0, 0.0, 1.5])
    h = 1e-6
    expected = (link.inverse(eta + h) - link.inverse(eta - h)) / (2 * h)
    np.testing.assert_allclose(link.deriv(eta), expected, rtol=1e-6)
    # the clamped log-likelihood is flat there too
    grad = log_likelihood_grad(get_family('binomial'), link, [10.0], 1.0, one_row(1.0))
    assert grad == pytest.approx([0.0])


def test_fit_rank_deficient():
    X = np.column_stack([np.ones(10), np.arange(10.0), 2 * np.arange(10.0)])
    data = Dataset(y=np.arange(10.0), X=X)
    with pytest.raises(SingularityError):
        fit_mle(get_family('gaussian'), get_link('identity'), data)


def test_fit_needs_more_rows():
    data = Dataset(y=[1.0, 2.0], X=np.eye(2))
    with pytest.raises(ShapeError):
        fit_mle(get_family('gaussian'), get_link('identity'), data)


@pytest.mark.parametrize('family_name', ['gaussian', 'binomial', 'poisson', 'gamma', 'inverse_gaussian'])
def test_fit_recovers_coefficients(family_name):
    beta = np.array([0.3, 0.5])
    data = make_dataset(family_name, n=2000, beta=beta, seed=5)
    fit = fit_mle(get_family(family_name), get_link(LINK_FOR[family_name]), data)
    assert fit.converged
    se = fit.std_errors[:2]
    assert np.all(np.abs(fit.beta_hat - beta) < 4 * se)
    assert np.all(np.linalg.eigvalsh(fit.info) > 0)


def test_fit_dispersion_recovered():
    data = make_dataset('gamma', n=3000, phi=0.5, seed=9)
    fit = fit_mle(get_family('gamma'), get_link('log'), data)
    assert fit.phi_hat == pytest.approx(0.5, rel=0.1)


def test_expected_information_examples():
    info = expected_information(get_family('gaussian'), get_link('identity'), [0.0], 1.0, one_row(0.0))
    assert info[0, 0] == pytest.approx(1.0)
    info = expected_information(get_family('binomial'), get_link('logit'), [0.0], 1.0, one_row(1.0))
    assert info == pytest.approx(np.array([[0.25]]))


def test_expected_information_symmetric():
    for family_name in ('gaussian', 'gamma'):
        data = make_dataset(family_name, n=50, seed=4)
        info = expected_information(get_family(family_name), get_link('log'), [0.1, 0.2], 0.7, data)
        assert np.array_equal(info, info.T)


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(y=[1.0, np.nan], X=np.ones((2, 1)))
    with pytest.raises(ShapeError):
        Dataset(y=[1.0, 2.0], X=np.ones((3, 1)))
    data = Dataset(y=[1.0, 2.0], X=np.ones((2, 2)))
    assert data.names == ('x1', 'x2')
    assert not data.y.flags.writeable
