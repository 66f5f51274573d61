# built-in
from dataclasses import replace

# external
import numpy as np
import pytest
from scipy import stats

# project
from hdprior import ConfigError, LogTarget, ParameterSpace, SamplerConfig, SamplerError, diagnostics, sample
from hdprior._base import Block, Identity
from hdprior._diagnostics import mcse_mean, split_rhat
from hdprior._sampler import warmup_windows


CONFIG = SamplerConfig(chains=4, iter_warmup=500, iter_sampling=1000, seed=42)


def normal_target(dim):
    labels = tuple('x{}'.format(j) for j in range(1, dim + 1))

    def kernel(values):
        x = values['x']
        return -0.5 * float(x @ x), dict(x=-x)

    return LogTarget(ParameterSpace([Block('x', labels, Identity())]), kernel)


def test_standard_normal_moments():
    draws = sample(normal_target(5), CONFIG)
    assert draws.values.shape == (4, 1000, 5)
    for j in range(5):
        column = draws.values[:, :, j]
        assert abs(column.mean()) < 4 * mcse_mean(column)
        assert column.std() == pytest.approx(1.0, rel=0.05)
    result = diagnostics(draws)
    assert result.max_rhat < 1.02
    assert result.num_divergent == 0
    assert np.all(draws.accept_stat.mean(axis=1) > 0.6)


def test_fixed_seed_is_reproducible():
    config = SamplerConfig(chains=2, iter_warmup=100, iter_sampling=100, seed=7)
    first = sample(normal_target(2), config)
    second = sample(normal_target(2), replace(config, parallel_chains=1))
    assert first.values.tobytes() == second.values.tobytes()
    assert first.seed == 7
    assert first.free_names == ['x1', 'x2']


def test_different_seeds_differ():
    config = SamplerConfig(chains=1, iter_warmup=50, iter_sampling=50, seed=1)
    first = sample(normal_target(1), config)
    second = sample(normal_target(1), replace(config, seed=2))
    assert not np.array_equal(first.values, second.values)


def test_draws_frame():
    draws = sample(normal_target(2), SamplerConfig(chains=2, iter_warmup=20, iter_sampling=10, seed=3))
    frame = draws.to_frame()
    assert list(frame.columns) == ['chain', 'iteration', 'x1', 'x2']
    assert frame['chain'].tolist() == [1] * 10 + [2] * 10
    assert frame['iteration'].tolist()[:3] == [1, 2, 3]


def test_initialization_error():
    space = ParameterSpace([Block('x', ('x', ), Identity())])
    target = LogTarget(space, lambda values: (-np.inf, dict(x=np.zeros(1))))
    with pytest.raises(SamplerError):
        sample(target, SamplerConfig(chains=1, iter_warmup=10, iter_sampling=10, seed=0))


def test_config_validation():
    with pytest.raises(ConfigError):
        SamplerConfig(chains=0)
    with pytest.raises(ConfigError):
        SamplerConfig(target_accept=1.0)
    assert SamplerConfig(seed=None).resolved().seed is not None


def test_warmup_windows():
    assert warmup_windows(1000) == [(75, 100), (100, 150), (150, 250), (250, 450), (450, 950)]
    windows = warmup_windows(100)
    assert windows[0][0] == 15
    assert windows[-1][1] == 90
    assert warmup_windows(10) == []


def test_standard_normal_marginals():
    draws = sample(normal_target(5), replace(CONFIG, iter_sampling=10000, seed=43))
    for j in range(5):
        column = draws.values[:, :, j]
        assert stats.kstest(column.ravel(), 'norm').statistic < 0.02
        assert split_rhat(column) < 1.01
