# built-in
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

# app
from ._base import LogTarget, split_data
from ._bhm import HierarchicalPrior
from ._glm import Dataset, ModelSpec
from ._pp import InitialPrior
from ._specs import InitialSpec, RMAPSpec


@dataclass(frozen=True)
class RmapTargets:
    """informative: BHM on current and historical data; vague: current data under
    the initial prior; historical: BHM on the historical data alone."""
    informative: LogTarget
    vague: LogTarget
    historical: LogTarget
    w: float


class RobustMapPrior:
    kind = 'rmap'
    normalized = False

    def __init__(self, spec: RMAPSpec, model: ModelSpec, data: Sequence[Dataset]):
        current, _ = split_data(data)
        self.spec = spec
        self.model = model
        self.informative = HierarchicalPrior(spec.bhm, model, data)
        self.vague = InitialPrior(InitialSpec(hyper=spec.vague), model, [current])

    @property
    def w(self) -> float:
        return self.spec.w

    @cached_property
    def target(self) -> RmapTargets:
        return RmapTargets(
            informative=self.informative.target,
            vague=self.vague.target,
            historical=self.informative.prior_target,
            w=self.w,
        )
