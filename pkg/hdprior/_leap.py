# built-in
from functools import cached_property
from typing import Optional, Sequence, Tuple

# external
import numpy as np
from scipy import special

# app
from ._base import BasePrior, Block, Identity, Log, ParameterSpace, StickBreaking
from ._constants import DISPERSION
from ._glm import Dataset, ModelSpec
from ._pp import initial_log_prior
from ._specs import LEAPSpec


def _mixture(model: ModelSpec, betas: np.ndarray, phis: np.ndarray, log_probs: np.ndarray, data: Dataset):
    family, link = model.family, model.link
    K = betas.shape[0]
    eta = data.X @ betas.T + data.offset[:, None]
    terms = np.column_stack([family.loglik_terms(data.y, eta[:, k], phis[k], link) for k in range(K)])
    joint = terms + log_probs[None, :]
    lse = special.logsumexp(joint, axis=1)
    resp = np.exp(joint - lse[:, None])
    return float(np.sum(lse)), resp, eta


def leap_mixture_loglik(model: ModelSpec, betas, phis, probs, data: Dataset) -> float:
    """sum_i log sum_k probs_k f(y_i | beta_k, phi_k)"""
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    with np.errstate(divide='ignore'):
        log_probs = np.log(np.asarray(probs, dtype=float))
    return _mixture(model, betas, np.asarray(phis, dtype=float), log_probs, data)[0]


class LatentExchangeabilityPrior(BasePrior):
    """Each historical row comes from one of K parameter sets; set 1 is the
    current data's. The historical sets are stacked into one."""
    kind = 'leap'
    needs_history = True

    def __init__(self, spec: LEAPSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        self.K = spec.K
        self.conc = spec.concentration
        self.stacked = Dataset.stack(self.history)

    def _comp_labels(self, template: str) -> Tuple[str, ...]:
        return tuple(template.format(name=name, k=k) for k in range(2, self.K + 1) for name in self.names)

    @cached_property
    def space(self) -> ParameterSpace:
        blocks = self.current_blocks()
        blocks.append(Block('beta_comp', self._comp_labels('{name}_comp_{k}'), Identity()))
        if not self.model.dispersion_fixed:
            labels = tuple('dispersion_comp_{}'.format(k) for k in range(2, self.K + 1))
            blocks.append(Block('dispersion_comp', labels, Log()))
        blocks.append(Block('probs', tuple('probs_{}'.format(k) for k in range(1, self.K + 1)), StickBreaking()))
        return ParameterSpace(blocks)

    def kernel(self, values, current=True):
        fixed = self.model.dispersion_fixed
        p = len(self.names)
        betas = np.vstack([values['beta'], np.asarray(values['beta_comp']).reshape(self.K - 1, p)])
        phis = np.ones(self.K)
        if not fixed:
            phis = np.concatenate([values[DISPERSION], values['dispersion_comp']])
        log_probs = np.log(values['probs'])

        value = float(special.gammaln(np.sum(self.conc)) - np.sum(special.gammaln(self.conc)))
        value += float(np.sum((self.conc - 1.0) * log_probs))
        grad_log_probs = self.conc - 1.0

        grad_betas = np.zeros_like(betas)
        grad_phis = np.zeros(self.K)
        for k in range(self.K):
            lp, g_beta, g_phi = initial_log_prior(betas[k], phis[k], self.spec.hyper, fixed)
            value += lp
            grad_betas[k] += g_beta
            grad_phis[k] += g_phi

        family, link, data = self.model.family, self.model.link, self.stacked
        lse, resp, eta = _mixture(self.model, betas, phis, log_probs, data)
        value += lse
        grad_log_probs = grad_log_probs + resp.sum(axis=0)
        for k in range(self.K):
            grad_betas[k] += data.X.T @ (resp[:, k] * family.eta_scores(data.y, eta[:, k], phis[k], link))
            if not fixed:
                grad_phis[k] += np.sum(resp[:, k] * family.tau_scores(data.y, eta[:, k], phis[k], link)) / phis[k]

        if current:
            lik, g_beta, g_phi = self.loglik(betas[0], phis[0], self.current)
            value += lik
            grad_betas[0] += g_beta
            grad_phis[0] += g_phi

        grads = dict(beta=grad_betas[0], beta_comp=grad_betas[1:].ravel(), probs=grad_log_probs)
        if not fixed:
            grads[DISPERSION] = grad_phis[:1]
            grads['dispersion_comp'] = grad_phis[1:]
        return value, grads


def leap_log_density(model: ModelSpec, beta, beta_comp, probs, data: Sequence[Dataset], spec: LEAPSpec = LEAPSpec(),
                     phi: float = 1.0, phi_comp: Optional[Sequence[float]] = None, current: bool = True) -> float:
    prior = LatentExchangeabilityPrior(spec, model, data)
    values = dict(
        beta=np.asarray(beta, dtype=float),
        beta_comp=np.asarray(beta_comp, dtype=float).ravel(),
        probs=np.asarray(probs, dtype=float),
    )
    if not model.dispersion_fixed:
        values[DISPERSION] = np.array([phi])
        values['dispersion_comp'] = np.ones(prior.K - 1) if phi_comp is None else np.asarray(phi_comp, dtype=float)
    return prior.kernel(values, current=current)[0]
