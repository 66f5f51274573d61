# built-in
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from logging import getLogger
from typing import List, Optional, Sequence, Tuple

# external
import numpy as np
import pandas as pd

# app
from ._base import LogTarget
from ._constants import DIVERGENCE_THRESHOLD, INIT_ATTEMPTS
from ._exceptions import ConfigError, SamplerError


logger = getLogger('hdprior')


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    iter_warmup: int = 1000
    iter_sampling: int = 2500
    seed: Optional[int] = None
    target_accept: float = 0.8
    max_tree_depth: int = 10
    init_radius: float = 2.0
    parallel_chains: Optional[int] = None

    def __post_init__(self):
        for name in ('chains', 'iter_sampling', 'max_tree_depth'):
            if getattr(self, name) < 1:
                raise ConfigError('{} must be at least 1'.format(name))
        if self.iter_warmup < 0:
            raise ConfigError('iter_warmup must not be negative')
        if not 0 < self.target_accept < 1:
            raise ConfigError('target_accept must lie in (0, 1)')
        if self.init_radius < 0:
            raise ConfigError('init_radius must not be negative')
        if self.parallel_chains is not None and self.parallel_chains < 1:
            raise ConfigError('parallel_chains must be at least 1')

    def resolved(self) -> 'SamplerConfig':
        if self.seed is not None:
            return self
        return replace(self, seed=int(np.random.SeedSequence().entropy % (2 ** 32)))


@dataclass
class Draws:
    """Post-warmup draws, indexed (chain, iteration, parameter)."""
    names: List[str]
    values: np.ndarray
    unconstrained: np.ndarray
    log_density: np.ndarray
    divergent: np.ndarray
    accept_stat: np.ndarray
    tree_depth: np.ndarray
    n_leapfrog: np.ndarray
    energy: np.ndarray
    step_size: np.ndarray
    inv_metric: np.ndarray
    seed: Optional[int] = None
    free_names: List[str] = field(default_factory=list)

    @property
    def chains(self) -> int:
        return self.values.shape[0]

    @property
    def iterations(self) -> int:
        return self.values.shape[1]

    @property
    def n_draws(self) -> int:
        return self.chains * self.iterations

    @property
    def num_divergent(self) -> int:
        return int(np.sum(self.divergent))

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise KeyError(name)
        return self.values[:, :, self.names.index(name)]

    def flat(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        values = self.values if names is None else self.values[:, :, [self.names.index(n) for n in names]]
        return values.reshape(self.n_draws, -1)

    def flat_unconstrained(self) -> np.ndarray:
        return self.unconstrained.reshape(self.n_draws, -1)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.flat(), columns=self.names)
        frame.insert(0, 'iteration', np.tile(np.arange(1, self.iterations + 1), self.chains))
        frame.insert(0, 'chain', np.repeat(np.arange(1, self.chains + 1), self.iterations))
        return frame


# adaptation


class DualAveraging:
    def __init__(self, step_size: float, target: float, gamma: float = 0.05, t0: float = 10.0, kappa: float = 0.75):
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.restart(step_size)

    def restart(self, step_size: float) -> None:
        self.mu = math.log(10 * step_size)
        self.counter = 0
        self.s_bar = 0.0
        self.x_bar = 0.0

    def learn(self, accept_stat: float) -> float:
        self.counter += 1
        accept_stat = min(1.0, accept_stat)
        eta = 1.0 / (self.counter + self.t0)
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - accept_stat)
        x = self.mu - self.s_bar * math.sqrt(self.counter) / self.gamma
        x_eta = self.counter ** (-self.kappa)
        self.x_bar = x_eta * x + (1.0 - x_eta) * self.x_bar
        return math.exp(x)

    def final(self) -> float:
        return math.exp(self.x_bar)


def warmup_windows(num_warmup: int) -> List[Tuple[int, int]]:
    """Metric adaptation windows: 75 fast iterations, doubling slow windows
    from 25, 50 terminal fast iterations; short warmups scale 15% / 75% / 10%."""
    if num_warmup < 20:
        return []
    init, term, base = 75, 50, 25
    if init + base + term > num_warmup:
        init = int(0.15 * num_warmup)
        term = int(0.1 * num_warmup)
        base = num_warmup - init - term
    windows = []
    start, size, end_middle = init, base, num_warmup - term
    while start < end_middle:
        end = start + size
        if end + 2 * size > end_middle:
            end = end_middle
        windows.append((start, end))
        start, size = end, 2 * size
    return windows


def regularized_variance(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    var = np.var(samples, axis=0, ddof=1) if n > 1 else np.ones(samples.shape[1])
    return (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))


# trajectories


@dataclass
class _State:
    q: np.ndarray
    p: np.ndarray
    logp: float
    grad: np.ndarray


@dataclass
class _Subtree:
    valid: bool
    propose: Optional[_State] = None
    p_sharp_beg: Optional[np.ndarray] = None
    p_sharp_end: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    p_beg: Optional[np.ndarray] = None
    p_end: Optional[np.ndarray] = None
    log_sum_weight: float = -np.inf


def _criterion(p_sharp_minus: np.ndarray, p_sharp_plus: np.ndarray, rho: np.ndarray) -> bool:
    return float(p_sharp_plus @ rho) > 0 and float(p_sharp_minus @ rho) > 0


class _Trajectory:
    """One NUTS transition with multinomial sampling over the trajectory."""

    def __init__(self, target: LogTarget, inv_metric: np.ndarray, step_size: float, rng: np.random.Generator):
        self.target = target
        self.inv_metric = inv_metric
        self.step_size = step_size
        self.rng = rng
        self.n_leapfrog = 0
        self.sum_metro_prob = 0.0
        self.divergent = False

    def hamiltonian(self, z: _State) -> float:
        h = -z.logp + 0.5 * float(np.sum(self.inv_metric * z.p * z.p))
        return np.inf if math.isnan(h) else h

    def leapfrog(self, z: _State, eps: float) -> _State:
        p = z.p + 0.5 * eps * z.grad
        q = z.q + eps * self.inv_metric * p
        logp, grad = self.target(q)
        if not np.isfinite(logp):
            return _State(q, p, -np.inf, np.zeros_like(q))
        return _State(q, p + 0.5 * eps * grad, logp, grad)

    def build(self, z: _State, depth: int, sign: int, H0: float) -> Tuple[_Subtree, _State]:
        if depth == 0:
            z = self.leapfrog(z, sign * self.step_size)
            self.n_leapfrog += 1
            h = self.hamiltonian(z)
            if h - H0 > DIVERGENCE_THRESHOLD:
                self.divergent = True
            log_weight = H0 - h
            self.sum_metro_prob += 1.0 if log_weight > 0 else math.exp(log_weight)
            p_sharp = self.inv_metric * z.p
            leaf = _Subtree(
                valid=not self.divergent, propose=z, p_sharp_beg=p_sharp, p_sharp_end=p_sharp,
                rho=z.p.copy(), p_beg=z.p, p_end=z.p, log_sum_weight=log_weight,
            )
            return leaf, z

        init, z = self.build(z, depth - 1, sign, H0)
        if not init.valid:
            return _Subtree(False), z
        final, z = self.build(z, depth - 1, sign, H0)
        if not final.valid:
            return _Subtree(False), z

        log_sum_weight = np.logaddexp(init.log_sum_weight, final.log_sum_weight)
        propose = init.propose
        if final.log_sum_weight > log_sum_weight:
            propose = final.propose
        elif self.rng.uniform() < math.exp(final.log_sum_weight - log_sum_weight):
            propose = final.propose

        rho = init.rho + final.rho
        persist = _criterion(init.p_sharp_beg, final.p_sharp_end, rho)
        persist &= _criterion(init.p_sharp_beg, final.p_sharp_beg, init.rho + final.p_beg)
        persist &= _criterion(init.p_sharp_end, final.p_sharp_end, final.rho + init.p_end)
        tree = _Subtree(
            valid=persist, propose=propose, p_sharp_beg=init.p_sharp_beg, p_sharp_end=final.p_sharp_end,
            rho=rho, p_beg=init.p_beg, p_end=final.p_end, log_sum_weight=log_sum_weight,
        )
        return tree, z

    def transition(self, z: _State, max_depth: int) -> Tuple[_State, dict]:
        z = _State(z.q, self.rng.normal(size=z.q.shape[0]) / np.sqrt(self.inv_metric), z.logp, z.grad)
        H0 = self.hamiltonian(z)
        # edges of the whole trajectory: (p_sharp, p) at its backward and forward ends
        p_sharp = self.inv_metric * z.p
        left, right = (p_sharp, z.p), (p_sharp, z.p)
        z_left = z_right = z
        rho = z.p.copy()
        log_sum_weight = 0.0
        sample = z
        depth = 0

        while depth < max_depth:
            forward = self.rng.uniform() > 0.5
            if forward:
                subtree, z_right = self.build(z_right, depth, 1, H0)
                outer, inner = left, right
            else:
                subtree, z_left = self.build(z_left, depth, -1, H0)
                outer, inner = right, left
            if not subtree.valid:
                break
            depth += 1

            if subtree.log_sum_weight > log_sum_weight:
                sample = subtree.propose
            elif self.rng.uniform() < math.exp(subtree.log_sum_weight - log_sum_weight):
                sample = subtree.propose
            log_sum_weight = np.logaddexp(log_sum_weight, subtree.log_sum_weight)

            # outer: far end of the old trajectory; inner: its end next to the subtree
            merged = rho + subtree.rho
            persist = _criterion(outer[0], subtree.p_sharp_end, merged)
            persist &= _criterion(outer[0], subtree.p_sharp_beg, rho + subtree.p_beg)
            persist &= _criterion(inner[0], subtree.p_sharp_end, subtree.rho + inner[1])
            rho = merged
            if forward:
                right = (subtree.p_sharp_end, subtree.p_end)
            else:
                left = (subtree.p_sharp_end, subtree.p_end)
            if not persist:
                break

        stats = dict(
            accept_stat=self.sum_metro_prob / max(self.n_leapfrog, 1),
            divergent=self.divergent,
            tree_depth=depth,
            n_leapfrog=self.n_leapfrog,
            energy=self.hamiltonian(sample),
        )
        return sample, stats


# chains


def _initialize(target: LogTarget, rng: np.random.Generator, radius: float) -> _State:
    for _ in range(INIT_ATTEMPTS):
        q = rng.uniform(-radius, radius, size=target.dim)
        logp, grad = target(q)
        if np.isfinite(logp) and np.all(np.isfinite(grad)):
            return _State(q, np.zeros(target.dim), logp, grad)
    raise SamplerError('log density not finite at any of {} initial points'.format(INIT_ATTEMPTS))


def _initial_step_size(target: LogTarget, z: _State, inv_metric: np.ndarray, step_size: float,
                       rng: np.random.Generator) -> float:
    """Double or halve the step until one leapfrog step crosses acceptance 0.8."""
    log_target = math.log(0.8)

    def delta_h(eps: float) -> float:
        trajectory = _Trajectory(target, inv_metric, eps, rng)
        start = _State(z.q, rng.normal(size=z.q.shape[0]) / np.sqrt(inv_metric), z.logp, z.grad)
        h0 = trajectory.hamiltonian(start)
        return h0 - trajectory.hamiltonian(trajectory.leapfrog(start, eps))

    direction = 1 if delta_h(step_size) > log_target else -1
    while True:
        step_size = step_size * 2.0 if direction == 1 else step_size / 2.0
        if step_size > 1e7:
            raise SamplerError('posterior is improper; step size grew without bound')
        if step_size < 1e-12:
            raise SamplerError('no acceptable step size found')
        dh = delta_h(step_size)
        if direction == 1 and not dh > log_target:
            return step_size / 2.0
        if direction == -1 and not dh < log_target:
            return step_size


@dataclass
class _ChainResult:
    q: np.ndarray
    values: np.ndarray
    logp: np.ndarray
    stats: dict
    step_size: float
    inv_metric: np.ndarray


def run_chain(target: LogTarget, config: SamplerConfig, chain: int, seed: np.random.SeedSequence) -> _ChainResult:
    rng = np.random.default_rng(seed)
    dim = target.dim
    z = _initialize(target, rng, config.init_radius)
    inv_metric = np.ones(dim)
    step_size = _initial_step_size(target, z, inv_metric, 1.0, rng)
    adapter = DualAveraging(step_size, config.target_accept)
    windows = warmup_windows(config.iter_warmup)
    ends = {end: start for start, end in windows}
    window_draws = []   # type: List[np.ndarray]
    logger.info('chain %d: warmup', chain)

    for it in range(config.iter_warmup):
        z, stats = _Trajectory(target, inv_metric, step_size, rng).transition(z, config.max_tree_depth)
        step_size = adapter.learn(stats['accept_stat'])
        if windows and windows[0][0] <= it < windows[-1][1]:
            window_draws.append(z.q)
        if it + 1 in ends:
            inv_metric = regularized_variance(np.array(window_draws))
            window_draws = []
            step_size = _initial_step_size(target, z, inv_metric, step_size, rng)
            adapter.restart(step_size)
            logger.debug('chain %d: metric updated after window %s, step size %.4g', chain,
                         (ends[it + 1], it + 1), step_size)
    if config.iter_warmup > 0:
        step_size = adapter.final()
    logger.debug('chain %d: adapted step size %.4g', chain, step_size)

    n = config.iter_sampling
    q = np.empty((n, dim))
    values = np.empty((n, len(target.names)))
    logp = np.empty(n)
    keys = ('accept_stat', 'divergent', 'tree_depth', 'n_leapfrog', 'energy')
    stats_all = {key: [] for key in keys}     # type: dict
    for it in range(n):
        z, stats = _Trajectory(target, inv_metric, step_size, rng).transition(z, config.max_tree_depth)
        q[it] = z.q
        values[it] = target.constrain_flat(z.q)
        logp[it] = z.logp
        for key in keys:
            stats_all[key].append(stats[key])
    stats_all = {key: np.array(v) for key, v in stats_all.items()}

    divergent = int(np.sum(stats_all['divergent']))
    if divergent:
        logger.warning('chain %d: %d divergent transitions after warmup', chain, divergent)
    saturated = int(np.sum(stats_all['tree_depth'] >= config.max_tree_depth))
    if saturated:
        logger.warning('chain %d: %d transitions hit the maximum tree depth %d', chain, saturated,
                       config.max_tree_depth)
    logger.info('chain %d: done', chain)
    return _ChainResult(q, values, logp, stats_all, step_size, inv_metric)


def sample(target: LogTarget, config: SamplerConfig = SamplerConfig()) -> Draws:
    """Multi-chain NUTS; chain c runs on the c-th spawned stream of the seed."""
    if target.dim < 1:
        raise SamplerError('target has no free parameters')
    config = config.resolved()
    streams = np.random.SeedSequence(config.seed).spawn(config.chains)
    workers = min(config.parallel_chains or config.chains, config.chains)
    logger.info('sampling %d chains (%d warmup, %d draws) over %d parameters', config.chains,
                config.iter_warmup, config.iter_sampling, target.dim)
    if workers == 1:
        results = [run_chain(target, config, c + 1, s) for c, s in enumerate(streams)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_chain, target, config, c + 1, s) for c, s in enumerate(streams)]
            results = [f.result() for f in futures]

    return Draws(
        names=list(target.names),
        values=np.stack([r.values for r in results]),
        unconstrained=np.stack([r.q for r in results]),
        log_density=np.stack([r.logp for r in results]),
        divergent=np.stack([r.stats['divergent'] for r in results]).astype(bool),
        accept_stat=np.stack([r.stats['accept_stat'] for r in results]),
        tree_depth=np.stack([r.stats['tree_depth'] for r in results]),
        n_leapfrog=np.stack([r.stats['n_leapfrog'] for r in results]),
        energy=np.stack([r.stats['energy'] for r in results]),
        step_size=np.array([r.step_size for r in results]),
        inv_metric=np.stack([r.inv_metric for r in results]),
        seed=config.seed,
        free_names=list(target.space.free_labels),
    )
