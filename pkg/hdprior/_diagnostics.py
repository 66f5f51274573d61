# built-in
from dataclasses import dataclass
from logging import getLogger
from typing import Any, Dict, Sequence

# external
import arviz as az
import numpy as np
import pandas as pd

# app
from ._constants import RHAT_WARN
from ._exceptions import DataError
from ._sampler import Draws


logger = getLogger('hdprior')


def _check(draws: Draws) -> None:
    if draws.n_draws == 0:
        raise DataError('no draws to diagnose')
    if draws.iterations // 2 < 4:
        raise DataError('need at least 4 draws per half chain, got {} iterations'.format(draws.iterations))


def split_rhat(chains: np.ndarray) -> float:
    """Rank-normalised split R-hat of a (chain, draw) array."""
    return float(az.rhat(np.atleast_2d(np.asarray(chains, dtype=float)), method='rank'))


def ess_bulk(chains: np.ndarray) -> float:
    return float(az.ess(np.atleast_2d(np.asarray(chains, dtype=float)), method='bulk'))


def mcse_mean(chains: np.ndarray) -> float:
    return float(az.mcse(np.atleast_2d(np.asarray(chains, dtype=float)), method='mean'))


@dataclass
class Diagnostics:
    rhat: pd.Series
    ess_bulk: pd.Series
    num_divergent: int
    accept_stat: np.ndarray
    step_size: np.ndarray
    max_depth_hits: int

    @property
    def max_rhat(self) -> float:
        return float(self.rhat.max())

    @property
    def min_ess_bulk(self) -> float:
        return float(self.ess_bulk.min())

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            rhat={k: _json_float(v) for k, v in self.rhat.items()},
            ess_bulk={k: _json_float(v) for k, v in self.ess_bulk.items()},
            max_rhat=_json_float(self.max_rhat),
            min_ess_bulk=_json_float(self.min_ess_bulk),
            num_divergent=self.num_divergent,
            accept_stat=[float(v) for v in self.accept_stat],
            step_size=[float(v) for v in self.step_size],
            max_depth_hits=self.max_depth_hits,
        )


def _json_float(value: float):
    return None if not np.isfinite(value) else float(value)


def diagnostics(draws: Draws, max_tree_depth: int = 10) -> Diagnostics:
    _check(draws)
    rhat, ess = dict(), dict()
    for j, name in enumerate(draws.names):
        column = draws.values[:, :, j]
        if np.ptp(column) == 0:
            # constant draws carry no mixing information
            rhat[name], ess[name] = 1.0, float(draws.n_draws)
            continue
        rhat[name] = split_rhat(column)
        ess[name] = ess_bulk(column)
    result = Diagnostics(
        rhat=pd.Series(rhat, dtype=float),
        ess_bulk=pd.Series(ess, dtype=float),
        num_divergent=draws.num_divergent,
        accept_stat=draws.accept_stat.mean(axis=1),
        step_size=draws.step_size,
        max_depth_hits=int(np.sum(draws.tree_depth >= max_tree_depth)),
    )
    if result.max_rhat > RHAT_WARN:
        logger.warning('max R-hat %.3f exceeds %.2f', result.max_rhat, RHAT_WARN)
    return result


def _quantile_label(prob: float) -> str:
    return 'q{}'.format(format(100 * prob, 'g'))


def summarize(draws: Draws, probs: Sequence[float] = (0.025, 0.5, 0.975)) -> pd.DataFrame:
    """Posterior mean, sd and type-7 quantiles per parameter."""
    if draws.n_draws == 0:
        raise DataError('no draws to summarise')
    flat = draws.flat()
    frame = pd.DataFrame(dict(
        variable=draws.names,
        mean=flat.mean(axis=0),
        sd=flat.std(axis=0, ddof=1) if draws.n_draws > 1 else np.zeros(len(draws.names)),
    ))
    quantiles = np.quantile(flat, probs, axis=0)
    for prob, row in zip(probs, np.atleast_2d(quantiles)):
        frame[_quantile_label(prob)] = row
    return frame
