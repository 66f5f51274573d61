# built-in
from functools import cached_property
from typing import List, Sequence, Tuple

# external
import numpy as np
from scipy import special

# app
from ._base import Block, Logit, ParameterSpace, beta_lpdf
from ._constants import DISPERSION
from ._exceptions import ConfigError
from ._glm import Dataset, ModelSpec
from ._pp import InitialPrior
from ._smooth import Interpolant
from ._specs import InitialPriorHyper, NPPSpec


def grid_interpolant(grid) -> Interpolant:
    """Interpolant over the smoothed lognc values of a grid covering [0, 1]."""
    if isinstance(grid, Interpolant):
        itp = grid
    else:
        itp = Interpolant(grid.a0_values, grid.lognc_smooth)
    if itp.x[0] != 0 or itp.x[-1] != 1:
        raise ConfigError('lognc grid must cover a0 in [0, 1], got [{}, {}]'.format(itp.x[0], itp.x[-1]))
    return itp


class NormalizedPowerPrior(InitialPrior):
    """Power prior with random a0, each historical term divided by its Z_h(a0)."""
    kind = 'npp'
    needs_history = True
    normalized = False

    def __init__(self, spec: NPPSpec, model: ModelSpec, data: Sequence[Dataset]):
        super().__init__(spec, model, data)
        if not spec.grids:
            raise ConfigError('normalized power prior needs a lognc grid per historical data set')
        if len(spec.grids) != self.H:
            raise ConfigError('{} lognc grids for {} historical data sets'.format(len(spec.grids), self.H))
        self.lognc = [grid_interpolant(g) for g in spec.grids]     # type: List[Interpolant]

    @cached_property
    def space(self) -> ParameterSpace:
        labels = tuple('a0_hist_{}'.format(h) for h in range(1, self.H + 1))
        return ParameterSpace(self.current_blocks() + [Block('a0', labels, Logit())])

    def kernel(self, values, current=True):
        value, grads = super().kernel(values, current=current)
        beta, phi, a0 = values['beta'], self.phi(values), values['a0']
        lp, grad_a0 = beta_lpdf(a0, self.spec.a0_shape1, self.spec.a0_shape2)
        value += lp
        grad_a0 = np.array(grad_a0, dtype=float)
        for h, dataset in enumerate(self.history):
            lik, g_beta, g_phi = self.loglik(beta, phi, dataset)
            itp = self.lognc[h]
            value += a0[h] * lik - itp(a0[h])
            grad_a0[h] += lik - itp.slope(a0[h])
            grads['beta'] = grads['beta'] + a0[h] * g_beta
            if DISPERSION in grads:
                grads[DISPERSION] = grads[DISPERSION] + a0[h] * g_phi
        grads['a0'] = grad_a0
        return value, grads


def npp_log_kernel(model: ModelSpec, beta, tau: float, a0_unconstrained, data: Sequence[Dataset], grids,
                   beta_prior: Tuple[float, float] = (1.0, 1.0),
                   hyper: InitialPriorHyper = InitialPriorHyper()) -> float:
    """NPP kernel with a0 on the logit scale, Jacobian of that scale included."""
    spec = NPPSpec(grids=tuple(grids), a0_shape1=beta_prior[0], a0_shape2=beta_prior[1], hyper=hyper)
    prior = NormalizedPowerPrior(spec, model, data)
    u = np.atleast_1d(np.asarray(a0_unconstrained, dtype=float))
    values = dict(beta=np.asarray(beta, dtype=float), a0=special.expit(u))
    if not model.dispersion_fixed:
        values[DISPERSION] = np.array([np.exp(tau)])
    log_jac = np.sum(-np.logaddexp(0.0, -u) - np.logaddexp(0.0, u))
    return prior.kernel(values, current=False)[0] + float(log_jac)
