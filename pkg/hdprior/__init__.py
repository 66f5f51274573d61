"""Bayesian GLMs with priors that borrow from historical data.
"""
# app
from ._base import LogTarget, ParameterSpace
from ._bhm import HierarchicalPrior, bhm_log_density
from ._bridge import BridgeResult, bridge_sample
from ._cfg import ConfigReader, RunConfig, build_prior_spec, read_config
from ._cli import main
from ._cp import CommensuratePrior, cp_log_density, spike_slab_lpdf
from ._data import (
    ColumnScale, load_dataset, load_datasets, standardize, to_original_scale, write_dataset,
)
from ._diagnostics import Diagnostics, diagnostics, summarize
from ._evidence import (
    Evidence, LogNCGrid, RmapResult, bayes_factor, build_lognc_grid, evidence_label, link_selection,
    marginal_likelihood, npp_lognc, read_lognc_grid, rmap_posterior, rmap_weight, solve_beta_hyper,
    write_lognc_grid,
)
from ._exceptions import (
    BoundaryError, ConfigError, DataError, DomainError, EvidenceError, HdpriorError, InterpolationRangeError,
    NonConvergenceError, SamplerError, ShapeError, SingularityError,
)
from ._formula import Formula, parse_formula
from ._glm import (
    Dataset, MleFit, ModelSpec, expected_information, fit_mle, get_family, get_link, log_likelihood,
    log_likelihood_grad, simulate,
)
from ._leap import LatentExchangeabilityPrior, leap_log_density
from ._manager import build_prior, build_target, prior_target
from ._napp import NormalizedAsymptoticPowerPrior, napp_log_density
from ._npp import NormalizedPowerPrior, npp_log_kernel
from ._pp import InitialPrior, PowerPrior, pp_log_kernel
from ._rmap import RobustMapPrior
from ._sampler import Draws, SamplerConfig, sample
from ._smooth import Interpolant, interp_linear, loess_fit
from ._specs import (
    BHMSpec, CPSpec, InitialPriorHyper, InitialSpec, LEAPSpec, NAPPSpec, NPPSpec, PPSpec, RMAPSpec, auto_a0,
)
from ._survival import (
    Breaks, SurvivalRecord, choose_breaks, expand_poisson, expansion_table, piecewise_loglik, risk_time,
)


__version__ = '0.1.0'


__all__ = [
    'main',

    # glm
    'Dataset',
    'MleFit',
    'ModelSpec',
    'expected_information',
    'fit_mle',
    'get_family',
    'get_link',
    'log_likelihood',
    'log_likelihood_grad',
    'simulate',

    # priors
    'BHMSpec',
    'CPSpec',
    'InitialPriorHyper',
    'InitialSpec',
    'LEAPSpec',
    'NAPPSpec',
    'NPPSpec',
    'PPSpec',
    'RMAPSpec',
    'auto_a0',
    'CommensuratePrior',
    'HierarchicalPrior',
    'InitialPrior',
    'LatentExchangeabilityPrior',
    'NormalizedAsymptoticPowerPrior',
    'NormalizedPowerPrior',
    'PowerPrior',
    'RobustMapPrior',
    'LogTarget',
    'ParameterSpace',
    'build_prior',
    'build_target',
    'prior_target',
    'bhm_log_density',
    'cp_log_density',
    'leap_log_density',
    'napp_log_density',
    'npp_log_kernel',
    'pp_log_kernel',
    'spike_slab_lpdf',

    # sampling
    'Diagnostics',
    'Draws',
    'SamplerConfig',
    'diagnostics',
    'sample',
    'summarize',

    # evidence
    'BridgeResult',
    'Evidence',
    'LogNCGrid',
    'RmapResult',
    'bayes_factor',
    'bridge_sample',
    'build_lognc_grid',
    'evidence_label',
    'link_selection',
    'marginal_likelihood',
    'npp_lognc',
    'read_lognc_grid',
    'rmap_posterior',
    'rmap_weight',
    'solve_beta_hyper',
    'write_lognc_grid',

    # smoothing
    'Interpolant',
    'interp_linear',
    'loess_fit',

    # survival
    'Breaks',
    'SurvivalRecord',
    'choose_breaks',
    'expand_poisson',
    'expansion_table',
    'piecewise_loglik',
    'risk_time',

    # cli
    'ColumnScale',
    'ConfigReader',
    'Formula',
    'RunConfig',
    'build_prior_spec',
    'load_dataset',
    'load_datasets',
    'parse_formula',
    'read_config',
    'standardize',
    'to_original_scale',
    'write_dataset',

    # errors
    'BoundaryError',
    'ConfigError',
    'DataError',
    'DomainError',
    'EvidenceError',
    'HdpriorError',
    'InterpolationRangeError',
    'NonConvergenceError',
    'SamplerError',
    'ShapeError',
    'SingularityError',
]
