# built-in
from functools import cached_property
from typing import Optional, Sequence, Tuple

# external
import numpy as np
from scipy import special

# app
from ._base import LOG_2PI, BasePrior, Block, Identity, Log, ParameterSpace, half_normal_lpdf, normal_lpdf
from ._constants import DISPERSION
from ._glm import Dataset, ModelSpec
from ._specs import CPSpec


def _half_normal_terms(x, mean, sd):
    z = (x - mean) / sd
    value = -0.5 * LOG_2PI - np.log(sd) - 0.5 * z * z - special.log_ndtr(mean / sd)
    return value, -z / sd


def spike_slab_lpdf(tau, spec: CPSpec) -> Tuple[float, np.ndarray]:
    """Two-component half-normal mixture, summed over coordinates."""
    tau = np.asarray(tau, dtype=float)
    spike, grad_spike = _half_normal_terms(tau, spec.spike_mean, spec.spike_sd)
    slab, grad_slab = _half_normal_terms(tau, spec.slab_mean, spec.slab_sd)
    with np.errstate(divide='ignore'):
        spike = spike + np.log(spec.p_spike)
        slab = slab + np.log1p(-spec.p_spike)
    total = np.logaddexp(spike, slab)
    weight = np.exp(spike - total)
    grad = np.where(weight > 0, weight * grad_spike, 0.0) + np.where(weight < 1, (1.0 - weight) * grad_slab, 0.0)
    return float(np.sum(total)), grad


class CommensuratePrior(BasePrior):
    """beta_j ~ N(beta0_j, 1 / tau_j) with historical sets sharing beta0."""
    kind = 'cp'
    needs_history = True

    def __init__(self, spec: CPSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        p = len(self.names)
        self.beta0_mean = np.zeros(p) if spec.beta0_mean is None else np.broadcast_to(
            np.asarray(spec.beta0_mean, dtype=float), (p, ))
        self.beta0_sd = np.full(p, 10.0) if spec.beta0_sd is None else np.broadcast_to(
            np.asarray(spec.beta0_sd, dtype=float), (p, ))

    @cached_property
    def space(self) -> ParameterSpace:
        blocks = [
            Block('beta', self.names, Identity()),
            Block('beta0', self.hist_labels('hist'), Identity()),
            Block('comm', self.hist_labels('comm'), Log()),
        ]
        if not self.model.dispersion_fixed:
            blocks.append(Block(DISPERSION, (DISPERSION, ), Log()))
            labels = tuple('dispersion_hist_{}'.format(h) for h in range(1, self.H + 1))
            blocks.append(Block('dispersion_hist', labels, Log()))
        return ParameterSpace(blocks)

    def kernel(self, values, current=True):
        beta, beta0, tau = values['beta'], values['beta0'], values['comm']
        diff = beta - beta0
        value = float(np.sum(-0.5 * LOG_2PI + 0.5 * np.log(tau) - 0.5 * tau * diff * diff))
        grad_beta = -tau * diff
        grad_beta0 = tau * diff
        grad_tau = 0.5 / tau - 0.5 * diff * diff

        lp, g = normal_lpdf(beta0, self.beta0_mean, self.beta0_sd)
        value += lp
        grad_beta0 = grad_beta0 + g
        lp, g = spike_slab_lpdf(tau, self.spec)
        value += lp
        grad_tau = grad_tau + g

        fixed = self.model.dispersion_fixed
        phi_hist = np.ones(self.H)
        grad_phi = np.zeros(1)
        grad_phi_hist = np.zeros(self.H)
        if not fixed:
            phi_hist = values['dispersion_hist']
            lp, grad_phi = half_normal_lpdf(values[DISPERSION], self.spec.disp_mean, self.spec.disp_sd)
            value += lp
            lp, grad_phi_hist = half_normal_lpdf(phi_hist, self.spec.disp_mean_hist, self.spec.disp_sd_hist)
            value += lp

        for h, dataset in enumerate(self.history):
            lik, g_beta, g_phi = self.loglik(beta0, phi_hist[h], dataset)
            value += lik
            grad_beta0 = grad_beta0 + g_beta
            grad_phi_hist[h] += g_phi
        if current:
            lik, g_beta, g_phi = self.loglik(beta, self.phi(values), self.current)
            value += lik
            grad_beta = grad_beta + g_beta
            grad_phi = grad_phi + g_phi

        grads = dict(beta=grad_beta, beta0=grad_beta0, comm=grad_tau)
        if not fixed:
            grads[DISPERSION] = grad_phi
            grads['dispersion_hist'] = grad_phi_hist
        return value, grads


def cp_log_density(model: ModelSpec, beta, beta0, taus, data: Sequence[Dataset], spec: CPSpec = CPSpec(),
                   phi: float = 1.0, phi_hist: Optional[Sequence[float]] = None, current: bool = True) -> float:
    prior = CommensuratePrior(spec, model, data)
    values = dict(
        beta=np.asarray(beta, dtype=float),
        beta0=np.asarray(beta0, dtype=float),
        comm=np.asarray(taus, dtype=float),
    )
    if not model.dispersion_fixed:
        values[DISPERSION] = np.array([phi])
        values['dispersion_hist'] = np.ones(prior.H) if phi_hist is None else np.asarray(phi_hist, dtype=float)
    return prior.kernel(values, current=current)[0]
