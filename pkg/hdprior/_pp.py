# built-in
from functools import cached_property
from typing import Sequence, Tuple

# external
import numpy as np

# app
from ._base import BasePrior, ParameterSpace, Values, half_normal_lpdf, normal_lpdf
from ._constants import DISPERSION
from ._exceptions import ConfigError
from ._glm import Dataset, ModelSpec
from ._specs import InitialPriorHyper, PPSpec


def initial_log_prior(beta, phi: float, hyper: InitialPriorHyper,
                      dispersion_fixed: bool) -> Tuple[float, np.ndarray, float]:
    """log pi0(beta, phi) with its beta gradient and phi derivative."""
    p = len(beta)
    value, grad_beta = normal_lpdf(beta, hyper.means(p), hyper.sds(p))
    grad_phi = 0.0
    if not dispersion_fixed:
        lp, g = half_normal_lpdf(np.array([phi]), hyper.alpha0, hyper.gamma0)
        value += lp
        grad_phi = float(g[0])
    return value, grad_beta, grad_phi


class InitialPrior(BasePrior):
    kind = 'initial'
    needs_history = False
    normalized = True

    @property
    def hyper(self) -> InitialPriorHyper:
        return self.spec.hyper

    @cached_property
    def space(self) -> ParameterSpace:
        return ParameterSpace(self.current_blocks())

    def _prior(self, values: Values) -> Tuple[float, np.ndarray, float]:
        return initial_log_prior(values['beta'], self.phi(values), self.hyper, self.model.dispersion_fixed)

    def _finish(self, values: Values, value: float, grad_beta, grad_phi) -> Tuple[float, Values]:
        grads = dict(beta=grad_beta)
        if not self.model.dispersion_fixed:
            grads[DISPERSION] = np.array([grad_phi])
        return value, grads

    def kernel(self, values, current=True):
        value, grad_beta, grad_phi = self._prior(values)
        if current:
            lik, g_beta, g_phi = self.loglik(values['beta'], self.phi(values), self.current)
            value += lik
            grad_beta = grad_beta + g_beta
            grad_phi += g_phi
        return self._finish(values, value, grad_beta, grad_phi)


class PowerPrior(InitialPrior):
    """Historical likelihoods raised to fixed powers a0 times the initial prior."""
    kind = 'pp'
    needs_history = True

    def __init__(self, spec: PPSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        a0 = np.asarray(spec.a0, dtype=float)
        if a0.shape[0] == 1 and self.H > 1:
            a0 = np.full(self.H, a0[0])
        if a0.shape[0] != self.H:
            raise ConfigError('{} a0 values for {} historical data sets'.format(a0.shape[0], self.H))
        self.a0 = a0

    @property
    def normalized(self) -> bool:    # type: ignore
        # all-zero powers leave only the initial prior
        return bool(np.all(self.a0 == 0))

    def kernel(self, values, current=True):
        value, grads = super().kernel(values, current=current)
        beta, phi = values['beta'], self.phi(values)
        for a0, dataset in zip(self.a0, self.history):
            if a0 == 0:
                continue
            lik, g_beta, g_phi = self.loglik(beta, phi, dataset)
            value += a0 * lik
            grads['beta'] = grads['beta'] + a0 * g_beta
            if DISPERSION in grads:
                grads[DISPERSION] = grads[DISPERSION] + a0 * g_phi
        return value, grads


def pp_log_kernel(model: ModelSpec, beta, tau: float, a0, data: Sequence[Dataset],
                  hyper: InitialPriorHyper = InitialPriorHyper()) -> float:
    """Power-prior kernel on (beta, phi = exp(tau)); the first data set is current
    and does not enter."""
    prior = PowerPrior(PPSpec(a0=tuple(np.atleast_1d(a0)), hyper=hyper), model, data)
    values = dict(beta=np.asarray(beta, dtype=float))
    if not model.dispersion_fixed:
        values[DISPERSION] = np.array([np.exp(tau)])
    return prior.kernel(values, current=False)[0]
