# built-in
from functools import cached_property
from logging import getLogger
from typing import List, Sequence, Tuple

# external
import numpy as np

# app
from ._base import LOG_2PI, BasePrior, Block, Logit, ParameterSpace, beta_lpdf
from ._constants import DISPERSION
from ._exceptions import SingularityError
from ._glm import Dataset, MleFit, ModelSpec, fit_mle
from ._specs import NAPPSpec


logger = getLogger('hdprior')


class _Gaussian:
    """Normal kernel N(theta | mode, (a * info)^-1)."""

    def __init__(self, fit: MleFit, dispersion_fixed: bool):
        self.mode = fit.theta_hat(dispersion_fixed)
        self.info = np.asarray(fit.info, dtype=float)
        try:
            chol = np.linalg.cholesky(self.info)
        except np.linalg.LinAlgError:
            raise SingularityError('historical information matrix is not positive definite') from None
        self.half_logdet = float(np.sum(np.log(np.diag(chol))))
        self.d = self.mode.shape[0]

    def __call__(self, theta: np.ndarray, a: float) -> Tuple[float, np.ndarray, float]:
        diff = theta - self.mode
        scaled = self.info @ diff
        q = float(diff @ scaled)
        value = -0.5 * self.d * LOG_2PI + 0.5 * self.d * np.log(a) + self.half_logdet - 0.5 * a * q
        return value, -a * scaled, 0.5 * self.d / a - 0.5 * q


class NormalizedAsymptoticPowerPrior(BasePrior):
    """Normal approximation to each historical power prior, centred at the MLE.

    The density is defined on theta = (beta, log phi), so the log-scale
    Jacobian added by the dispersion transform is cancelled here.
    """
    kind = 'napp'
    needs_history = True

    def __init__(self, spec: NAPPSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        self.kernels = [_Gaussian(fit, model.dispersion_fixed) for fit in self.mle_fits]

    @property
    def normalized(self) -> bool:   # type: ignore
        # a product of several normal kernels in theta is no longer normalised
        return self.H == 1

    @cached_property
    def mle_fits(self) -> List[MleFit]:
        fits = []
        for dataset in self.history:
            fits.append(fit_mle(self.model.family, self.model.link, dataset))
            logger.debug('historical mle for data set %d: %s', dataset.index, fits[-1].beta_hat)
        return fits

    @cached_property
    def space(self) -> ParameterSpace:
        labels = tuple('a0_hist_{}'.format(h) for h in range(1, self.H + 1))
        return ParameterSpace(self.current_blocks() + [Block('a0', labels, Logit())])

    def theta(self, values) -> np.ndarray:
        if self.model.dispersion_fixed:
            return np.asarray(values['beta'], dtype=float)
        return np.append(values['beta'], np.log(values[DISPERSION][0]))

    def kernel(self, values, current=True):
        beta, phi, a0 = values['beta'], self.phi(values), values['a0']
        theta = self.theta(values)
        value, grad_a0 = beta_lpdf(a0, self.spec.a0_shape1, self.spec.a0_shape2)
        grad_a0 = np.array(grad_a0, dtype=float)
        grad_theta = np.zeros_like(theta)
        for h, gaussian in enumerate(self.kernels):
            lp, g_theta, g_a = gaussian(theta, a0[h])
            value += lp
            grad_theta += g_theta
            grad_a0[h] += g_a

        p = beta.shape[0]
        grad_beta = grad_theta[:p]
        grad_phi = 0.0
        if not self.model.dispersion_fixed:
            value -= np.log(phi)
            grad_phi = (grad_theta[p] - 1.0) / phi
        if current:
            lik, g_beta, g_phi = self.loglik(beta, phi, self.current)
            value += lik
            grad_beta = grad_beta + g_beta
            grad_phi += g_phi

        grads = dict(beta=grad_beta, a0=grad_a0)
        if not self.model.dispersion_fixed:
            grads[DISPERSION] = np.array([grad_phi])
        return value, grads


def napp_log_density(theta, a0, mle_fits: Sequence[MleFit], dispersion_fixed: bool,
                     beta_prior: Tuple[float, float] = (1.0, 1.0)) -> float:
    """Sum over historical fits of log N(theta | mode, (a0 I)^-1) + log Beta(a0)."""
    theta = np.asarray(theta, dtype=float)
    a0 = np.atleast_1d(np.asarray(a0, dtype=float))
    value = beta_lpdf(a0, beta_prior[0], beta_prior[1])[0]
    for fit, a in zip(mle_fits, a0):
        value += _Gaussian(fit, dispersion_fixed)(theta, a)[0]
    return float(value)
