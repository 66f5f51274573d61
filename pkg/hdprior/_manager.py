# built-in
from logging import getLogger
from typing import Any, Sequence, Union

# app
from ._base import BasePrior, LogTarget
from ._bhm import HierarchicalPrior
from ._cp import CommensuratePrior
from ._exceptions import ConfigError
from ._glm import Dataset, ModelSpec
from ._leap import LatentExchangeabilityPrior
from ._napp import NormalizedAsymptoticPowerPrior
from ._npp import NormalizedPowerPrior
from ._pp import InitialPrior, PowerPrior
from ._rmap import RmapTargets, RobustMapPrior


logger = getLogger('hdprior')
ALL_PRIORS = (
    InitialPrior,
    PowerPrior,
    NormalizedPowerPrior,
    NormalizedAsymptoticPowerPrior,
    HierarchicalPrior,
    CommensuratePrior,
    RobustMapPrior,
    LatentExchangeabilityPrior,
)


def build_prior(spec: Any, model: ModelSpec, data: Sequence[Dataset]) -> Union[BasePrior, RobustMapPrior]:
    for prior in ALL_PRIORS:
        if prior.kind == spec.kind:
            logger.debug('building %s prior over %d data sets', spec.kind, len(data))
            return prior(spec, model, data)
    raise ConfigError('unknown prior kind {!r}'.format(spec.kind))


def build_target(spec: Any, model: ModelSpec, data: Sequence[Dataset]) -> Union[LogTarget, RmapTargets]:
    """Unnormalised log posterior; for RMAP the pair of targets it mixes."""
    return build_prior(spec, model, data).target


def prior_target(spec: Any, model: ModelSpec, data: Sequence[Dataset]) -> LogTarget:
    """The prior's own density, without the current-data likelihood."""
    prior = build_prior(spec, model, data)
    if isinstance(prior, RobustMapPrior):
        return prior.informative.prior_target
    return prior.prior_target
