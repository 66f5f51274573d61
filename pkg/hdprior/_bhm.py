# built-in
from functools import cached_property
from typing import Optional, Sequence

# external
import numpy as np

# app
from ._base import BasePrior, Block, Identity, Log, ParameterSpace, half_normal_lpdf, normal_lpdf
from ._constants import DISPERSION
from ._glm import Dataset, ModelSpec, log_likelihood
from ._specs import BHMSpec


class HierarchicalPrior(BasePrior):
    """Current and historical coefficients drawn around shared meta means.

    Sampled non-centred: beta_h = meta_mean + meta_sd * z_h with z_h standard
    normal, for the current set (h = 0) and each historical set.
    """
    kind = 'bhm'
    needs_history = True

    def __init__(self, spec: BHMSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        self.mu0, self.sigma0, self.m, self.s = spec.resolve(len(self.names))

    def _hist_block_labels(self, template: str):
        return tuple(
            template.format(name=name, h=h) for h in range(1, self.H + 1) for name in self.names
        )

    @cached_property
    def space(self) -> ParameterSpace:
        blocks = [
            Block('z', tuple('{}_raw'.format(n) for n in self.names), Identity()),
            Block('z_hist', self._hist_block_labels('{name}_hist_{h}_raw'), Identity()),
            Block('meta_mean', self.hist_labels('meta_mean'), Identity()),
            Block('meta_sd', self.hist_labels('meta_sd'), Log()),
        ]
        if not self.model.dispersion_fixed:
            blocks.append(Block(DISPERSION, (DISPERSION, ), Log()))
            labels = tuple('dispersion_hist_{}'.format(h) for h in range(1, self.H + 1))
            blocks.append(Block('dispersion_hist', labels, Log()))
        return ParameterSpace(blocks)

    def report_labels(self):
        labels = [
            ('beta', self.names),
            ('beta_hist', self._hist_block_labels('{name}_hist_{h}')),
            ('meta_mean', self.hist_labels('meta_mean')),
            ('meta_sd', self.hist_labels('meta_sd')),
        ]
        if not self.model.dispersion_fixed:
            labels.append((DISPERSION, (DISPERSION, )))
            labels.append(('dispersion_hist', tuple('dispersion_hist_{}'.format(h) for h in range(1, self.H + 1))))
        return labels

    def _z_hist(self, values) -> np.ndarray:
        return np.asarray(values['z_hist']).reshape(self.H, -1)

    def report(self, values):
        mu, sigma = values['meta_mean'], values['meta_sd']
        result = dict(
            beta=mu + sigma * values['z'],
            beta_hist=(mu + sigma * self._z_hist(values)).ravel(),
            meta_mean=mu,
            meta_sd=sigma,
        )
        if not self.model.dispersion_fixed:
            result[DISPERSION] = values[DISPERSION]
            result['dispersion_hist'] = values['dispersion_hist']
        return result

    def kernel(self, values, current=True):
        mu, sigma = values['meta_mean'], values['meta_sd']
        z, z_hist = values['z'], self._z_hist(values)

        value, grad_z = normal_lpdf(z, 0.0, 1.0)
        lp, grad_z_hist = normal_lpdf(z_hist, 0.0, 1.0)
        value += lp
        lp, grad_mu = normal_lpdf(mu, self.mu0, self.sigma0)
        value += lp
        lp, grad_sigma = half_normal_lpdf(sigma, self.m, self.s)
        value += lp

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
            lik, g_beta, g_phi = self.loglik(mu + sigma * z_hist[h], phi_hist[h], dataset)
            value += lik
            grad_z_hist[h] += sigma * g_beta
            grad_mu = grad_mu + g_beta
            grad_sigma = grad_sigma + g_beta * z_hist[h]
            grad_phi_hist[h] += g_phi
        if current:
            lik, g_beta, g_phi = self.loglik(mu + sigma * z, self.phi(values), self.current)
            value += lik
            grad_z = grad_z + sigma * g_beta
            grad_mu = grad_mu + g_beta
            grad_sigma = grad_sigma + g_beta * z
            grad_phi = grad_phi + g_phi

        grads = dict(z=grad_z, z_hist=grad_z_hist.ravel(), meta_mean=grad_mu, meta_sd=grad_sigma)
        if not fixed:
            grads[DISPERSION] = grad_phi
            grads['dispersion_hist'] = grad_phi_hist
        return value, grads


def bhm_log_density(model: ModelSpec, beta, beta_hist, meta_mean, meta_sd, data: Sequence[Dataset],
                    spec: BHMSpec = BHMSpec(), phi: float = 1.0, phi_hist: Optional[Sequence[float]] = None,
                    current: bool = True) -> float:
    """Hierarchical-model log density on the natural (centred) parameterisation."""
    prior = HierarchicalPrior(spec, model, data)
    beta_hist = np.asarray(beta_hist, dtype=float).reshape(prior.H, -1)
    phi_hist = np.ones(prior.H) if phi_hist is None else np.asarray(phi_hist, dtype=float)
    family, link = model.family, model.link

    value = normal_lpdf(meta_mean, prior.mu0, prior.sigma0)[0]
    value += half_normal_lpdf(meta_sd, prior.m, prior.s)[0]
    value += normal_lpdf(beta, meta_mean, meta_sd)[0]
    value += sum(normal_lpdf(b, meta_mean, meta_sd)[0] for b in beta_hist)
    if not model.dispersion_fixed:
        value += half_normal_lpdf(np.array([phi]), spec.disp_mean, spec.disp_sd)[0]
        value += half_normal_lpdf(phi_hist, spec.disp_mean_hist, spec.disp_sd_hist)[0]
    for h, dataset in enumerate(prior.history):
        value += log_likelihood(family, link, beta_hist[h], phi_hist[h], dataset)
    if current:
        value += log_likelihood(family, link, beta, phi, prior.current)
    return float(value)
