# built-in
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from logging import getLogger
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

# external
import numpy as np
import pandas as pd
from scipy import special

# app
from ._bridge import BridgeResult, bridge_sample
from ._constants import GRID_SIZE, LOESS_SPAN, RHAT_WARN
from ._diagnostics import diagnostics
from ._exceptions import ConfigError, DataError
from ._glm import Dataset, ModelSpec
from ._manager import build_prior
from ._pp import PowerPrior
from ._rmap import RobustMapPrior
from ._sampler import Draws, SamplerConfig, sample
from ._smooth import loess_fit
from ._specs import InitialPriorHyper, PPSpec, RMAPSpec


logger = getLogger('hdprior')
GRID_COLUMNS = ('a0', 'lognc_raw', 'lognc_smooth', 'min_ess_bulk', 'max_rhat')
EVIDENCE_TIERS = (
    (np.log(100.0), 'decisive'),
    (np.log(30.0), 'very strong'),
    (np.log(10.0), 'strong'),
    (np.log(3.0), 'substantial'),
    (0.0, 'weak'),
)


def _child_seeds(seed: Optional[int], count: int) -> List[int]:
    """Independent integer seeds for sub-runs, fixed by the parent seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def _sample_and_bridge(target, config: SamplerConfig, seed: int) -> Tuple[Draws, BridgeResult]:
    draws = sample(target, replace(config, seed=seed))
    return draws, bridge_sample(draws, target).check()


# lognc grid


@dataclass
class LogNCPoint:
    a0: float
    lognc: float
    min_ess_bulk: float = np.nan
    max_rhat: float = np.nan


@dataclass
class LogNCGrid:
    """Estimated log Z(a0) of one historical data set's power prior."""
    a0_values: np.ndarray
    lognc_raw: np.ndarray
    lognc_smooth: np.ndarray
    min_ess_bulk: np.ndarray
    max_rhat: np.ndarray

    def __post_init__(self):
        for name in GRID_COLUMNS:
            attr = 'a0_values' if name == 'a0' else name
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float))
        n = self.a0_values.shape[0]
        if any(getattr(self, a).shape != (n, ) for a in ('lognc_raw', 'lognc_smooth', 'min_ess_bulk', 'max_rhat')):
            raise DataError('lognc grid columns must have equal length')
        _check_a0_grid(self.a0_values, min_points=2)
        if self.lognc_raw[0] != 0 or self.lognc_smooth[0] != 0:
            raise DataError('lognc at a0 = 0 must be exactly 0')

    @property
    def reliable(self) -> bool:
        rhat = self.max_rhat[np.isfinite(self.max_rhat)]
        return bool(np.all(rhat <= RHAT_WARN))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(dict(
            a0=self.a0_values,
            lognc_raw=self.lognc_raw,
            lognc_smooth=self.lognc_smooth,
            min_ess_bulk=self.min_ess_bulk,
            max_rhat=self.max_rhat,
        ))

    def plot_frame(self) -> pd.DataFrame:
        return pd.DataFrame(dict(a0=self.a0_values, value=self.lognc_smooth))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> 'LogNCGrid':
        missing = [c for c in GRID_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError('lognc grid is missing columns: {}'.format(', '.join(missing)))
        return cls(*(frame[c].to_numpy(dtype=float) for c in GRID_COLUMNS))


def _check_a0_grid(a0: np.ndarray, min_points: int) -> None:
    if a0.shape[0] < min_points:
        raise ConfigError('a0 grid needs at least {} points'.format(min_points))
    if a0[0] != 0 or a0[-1] != 1:
        raise ConfigError('a0 grid must start at 0 and end at 1')
    if not np.all(np.diff(a0) > 0):
        raise ConfigError('a0 grid must be strictly increasing')


def read_lognc_grid(path: Union[str, Path]) -> LogNCGrid:
    path = Path(path)
    if not path.exists():
        raise DataError('lognc grid file not found: {}'.format(path))
    return LogNCGrid.from_frame(pd.read_csv(path))


def write_lognc_grid(grid: LogNCGrid, path: Union[str, Path]) -> None:
    grid.to_frame().to_csv(path, index=False)


def npp_lognc(model: ModelSpec, hist_data: Dataset, a0: float, config: SamplerConfig = SamplerConfig(),
              hyper: InitialPriorHyper = InitialPriorHyper()) -> LogNCPoint:
    """log Z(a0) of the power prior L(beta, phi | D0)^a0 pi0(beta, phi)."""
    a0 = float(a0)
    if not 0 <= a0 <= 1:
        raise ConfigError('a0 must lie in [0, 1], got {}'.format(a0))
    if a0 == 0:
        return LogNCPoint(a0, 0.0)
    prior = PowerPrior(PPSpec(a0=(a0, ), hyper=hyper), model, [hist_data.as_current(), hist_data])
    config = config.resolved()
    draws = sample(prior.prior_target, config)
    result = diagnostics(draws, config.max_tree_depth)
    bridge = bridge_sample(draws, prior.prior_target).check()
    logger.info('a0 = %.4f: lognc = %.4f (min ESS %.0f, max R-hat %.3f)', a0, bridge.log_evidence,
                result.min_ess_bulk, result.max_rhat)
    return LogNCPoint(a0, bridge.log_evidence, result.min_ess_bulk, result.max_rhat)


def default_a0_grid(size: int = GRID_SIZE) -> np.ndarray:
    return np.linspace(0.0, 1.0, size)


def smooth_lognc(a0_values, lognc_raw, span: float = LOESS_SPAN) -> np.ndarray:
    smooth = loess_fit(a0_values, lognc_raw, span=span, degree=1)
    smooth[0] = 0.0
    return smooth


def build_lognc_grid(model: ModelSpec, hist_data: Sequence[Dataset], a0_grid=None,
                     config: SamplerConfig = SamplerConfig(), span: float = LOESS_SPAN,
                     hyper: InitialPriorHyper = InitialPriorHyper(), threads: Optional[int] = None) -> List[LogNCGrid]:
    """One smoothed lognc grid per historical data set, grid points run in parallel."""
    a0 = default_a0_grid() if a0_grid is None else np.asarray(a0_grid, dtype=float)
    _check_a0_grid(a0, min_points=5)
    if not hist_data:
        raise DataError('no historical data sets given')
    config = config.resolved()
    jobs = [(h, value) for h in range(len(hist_data)) for value in a0]
    seeds = _child_seeds(config.seed, len(jobs))

    def run(job, seed):
        h, value = job
        return npp_lognc(model, hist_data[h], value, replace(config, seed=seed, parallel_chains=1), hyper)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        points = list(pool.map(run, jobs, seeds))

    grids = []
    for h in range(len(hist_data)):
        part = points[h * a0.shape[0]:(h + 1) * a0.shape[0]]
        raw = np.array([p.lognc for p in part])
        grid = LogNCGrid(
            a0_values=a0,
            lognc_raw=raw,
            lognc_smooth=smooth_lognc(a0, raw, span),
            min_ess_bulk=np.array([p.min_ess_bulk for p in part]),
            max_rhat=np.array([p.max_rhat for p in part]),
        )
        if not grid.reliable:
            logger.warning('lognc grid for historical data set %d is unreliable: max R-hat %.3f', h + 1,
                           np.nanmax(grid.max_rhat))
        grids.append(grid)
    return grids


# robust MAP


def rmap_weight(w: float, log_z_informative: float, log_z_vague: float) -> float:
    """Posterior weight of the informative component, w Z_I / (w Z_I + (1 - w) Z_V)."""
    if not 0 <= w <= 1:
        raise ConfigError('mixture weight w must lie in [0, 1], got {}'.format(w))
    if w == 0 or w == 1:
        return float(w)
    return float(special.expit(np.log(w) - np.log1p(-w) + log_z_informative - log_z_vague))


@dataclass
class RmapResult:
    draws: Draws
    weight: float
    prior_weight: float
    log_z_informative: float = np.nan
    log_z_vague: float = np.nan
    picks: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=bool))
    informative: Optional[Draws] = None
    vague: Optional[Draws] = None

    @property
    def informative_fraction(self) -> float:
        return float(np.mean(self.picks))


def mix_draws(informative: Draws, vague: Draws, names: Sequence[str], picks: np.ndarray) -> Draws:
    """Draw (c, m) from `informative` where picks[c, m], else from `vague`; only `names` are kept."""
    if informative.values.shape[:2] != vague.values.shape[:2] or picks.shape != informative.values.shape[:2]:
        raise DataError('mixed draws must share chains and iterations')
    names = list(names)
    a = informative.values[:, :, [informative.names.index(n) for n in names]]
    b = vague.values[:, :, [vague.names.index(n) for n in names]]

    def pick(x, y):
        return np.where(picks, x, y)

    chains, iterations = picks.shape
    return Draws(
        names=names,
        values=np.where(picks[:, :, None], a, b),
        unconstrained=np.zeros((chains, iterations, 0)),
        log_density=np.full((chains, iterations), np.nan),
        divergent=pick(informative.divergent, vague.divergent),
        accept_stat=pick(informative.accept_stat, vague.accept_stat),
        tree_depth=pick(informative.tree_depth, vague.tree_depth),
        n_leapfrog=pick(informative.n_leapfrog, vague.n_leapfrog),
        energy=pick(informative.energy, vague.energy),
        step_size=np.full(chains, np.nan),
        inv_metric=np.zeros((chains, 0)),
        seed=informative.seed,
    )


def rmap_posterior(spec: RMAPSpec, model: ModelSpec, data: Sequence[Dataset],
                   config: SamplerConfig = SamplerConfig()) -> RmapResult:
    """Mix the BHM posterior with the vague-prior posterior at the updated weight."""
    prior = RobustMapPrior(spec, model, data)
    targets = prior.target
    config = config.resolved()
    seed_i, seed_v, seed_h, seed_mix = _child_seeds(config.seed, 4)

    draws_i = sample(targets.informative, replace(config, seed=seed_i))
    draws_v = sample(targets.vague, replace(config, seed=seed_v))
    log_z_i = log_z_v = np.nan
    if 0 < spec.w < 1:
        log_z_i = (bridge_sample(draws_i, targets.informative).check().log_evidence
                   - _sample_and_bridge(targets.historical, config, seed_h)[1].log_evidence)
        log_z_v = bridge_sample(draws_v, targets.vague).check().log_evidence
    weight = rmap_weight(spec.w, log_z_i, log_z_v)
    logger.info('robust MAP: prior weight %.3f updated to %.3f', spec.w, weight)

    rng = np.random.default_rng(seed_mix)
    picks = rng.random((config.chains, config.iter_sampling)) < weight
    mixed = mix_draws(draws_i, draws_v, targets.vague.names, picks)
    mixed.seed = config.seed
    return RmapResult(mixed, weight, spec.w, float(log_z_i), float(log_z_v), picks, draws_i, draws_v)


# marginal likelihood


@dataclass
class Evidence:
    log_evidence: float
    log_posterior_constant: float
    log_prior_constant: float = 0.0


def marginal_likelihood(spec, model: ModelSpec, data: Sequence[Dataset],
                        config: SamplerConfig = SamplerConfig()) -> Evidence:
    """log Z(D): the posterior's constant minus the prior's own constant.

    Priors that are normalised by construction skip the second pass; the
    robust MAP evidence mixes the informative and vague evidences.
    """
    config = config.resolved()
    prior = build_prior(spec, model, data)
    if isinstance(prior, RobustMapPrior):
        return _rmap_evidence(prior, config)

    post_seed, prior_seed = _child_seeds(config.seed, 2)
    log_post = _sample_and_bridge(prior.target, config, post_seed)[1].log_evidence
    log_prior = 0.0
    if not prior.normalized:
        log_prior = _sample_and_bridge(prior.prior_target, config, prior_seed)[1].log_evidence
    logger.info('%s prior: log Z = %.4f (posterior %.4f, prior %.4f)', prior.kind, log_post - log_prior,
                log_post, log_prior)
    return Evidence(log_post - log_prior, log_post, log_prior)


def _rmap_evidence(prior: RobustMapPrior, config: SamplerConfig) -> Evidence:
    targets = prior.target
    seed_i, seed_v, seed_h = _child_seeds(config.seed, 3)
    parts = []
    log_hist = 0.0
    if targets.w > 0:
        log_post = _sample_and_bridge(targets.informative, config, seed_i)[1].log_evidence
        log_hist = _sample_and_bridge(targets.historical, config, seed_h)[1].log_evidence
        parts.append(np.log(targets.w) + log_post - log_hist)
    if targets.w < 1:
        log_vague = _sample_and_bridge(targets.vague, config, seed_v)[1].log_evidence
        parts.append(np.log1p(-targets.w) + log_vague)
    log_z = float(special.logsumexp(parts))
    return Evidence(log_z, log_z + log_hist, log_hist)


# bayes factors


def bayes_factor(log_z1: float, log_z2: float) -> float:
    return float(np.exp(log_z1 - log_z2))


def evidence_label(log_bf: float) -> str:
    if log_bf < 0:
        return 'negative'
    for threshold, label in EVIDENCE_TIERS:
        if log_bf >= threshold:
            return label
    return 'weak'


def link_selection(model_a: ModelSpec, model_b: ModelSpec, data: Sequence[Dataset], a0_grid=None,
                   config: SamplerConfig = SamplerConfig(),
                   hyper: InitialPriorHyper = InitialPriorHyper()) -> pd.DataFrame:
    """Log Bayes factor of model_a over model_b under the power prior, per a0."""
    a0_values = np.linspace(0.0, 1.0, 11) if a0_grid is None else np.asarray(a0_grid, dtype=float)
    config = config.resolved()
    seeds = _child_seeds(config.seed, 2 * a0_values.shape[0])
    rows = []
    for i, a0 in enumerate(a0_values):
        spec = PPSpec(a0=(float(a0), ), hyper=hyper)
        z_a = marginal_likelihood(spec, model_a, data, replace(config, seed=seeds[2 * i])).log_evidence
        z_b = marginal_likelihood(spec, model_b, data, replace(config, seed=seeds[2 * i + 1])).log_evidence
        rows.append(dict(a0=float(a0), log_z_a=z_a, log_z_b=z_b, log_bf=z_a - z_b, label=evidence_label(z_a - z_b)))
        logger.info('a0 = %.3f: log BF = %.4f', a0, z_a - z_b)
    return pd.DataFrame(rows, columns=['a0', 'log_z_a', 'log_z_b', 'log_bf', 'label'])


def solve_beta_hyper(mean: float, cv: float) -> Tuple[float, float]:
    """Beta shapes with the given mean and coefficient of variation."""
    if not 0 < mean < 1:
        raise ConfigError('mean must lie in (0, 1), got {}'.format(mean))
    if not cv > 0:
        raise ConfigError('coefficient of variation must be positive, got {}'.format(cv))
    total = mean * (1.0 - mean) / (cv * mean) ** 2 - 1.0
    shape1, shape2 = mean * total, (1.0 - mean) * total
    if shape1 <= 0 or shape2 <= 0:
        raise ConfigError('no beta distribution has mean {} and coefficient of variation {}'.format(mean, cv))
    return float(shape1), float(shape2)
