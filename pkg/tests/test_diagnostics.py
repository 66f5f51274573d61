# external
import numpy as np
import pytest

# project
from hdprior import DataError, diagnostics, summarize
from hdprior._diagnostics import ess_bulk, split_rhat

# app
from .helpers import make_draws


def ar1(rho, chains, n, seed=0):
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((chains, n)) * np.sqrt(1 - rho * rho)
    x = np.empty((chains, n))
    x[:, 0] = rng.standard_normal(chains)
    for t in range(1, n):
        x[:, t] = rho * x[:, t - 1] + noise[:, t]
    return x


def test_iid_chains():
    chains = np.random.default_rng(1).standard_normal((4, 10000))
    assert split_rhat(chains) < 1.01
    assert ess_bulk(chains) >= 0.9 * chains.size


def test_shifted_chain():
    chains = np.random.default_rng(2).standard_normal((4, 1000))
    chains[0] += 10
    assert split_rhat(chains) > 2


def test_ar1_ess():
    rho = 0.9
    chains = ar1(rho, 4, 10000)
    expected = chains.size * (1 - rho) / (1 + rho)
    assert ess_bulk(chains) == pytest.approx(expected, rel=0.25)


def test_diagnostics_record():
    values = np.random.default_rng(3).standard_normal((4, 500, 2))
    values[:, :, 1] = 7.0
    draws = make_draws(values, names=['a', 'b'])
    draws.divergent[0, :3] = True
    draws.tree_depth[1, :5] = 10
    result = diagnostics(draws, max_tree_depth=10)
    assert result.rhat['b'] == 1.0
    assert result.ess_bulk['b'] == 2000
    assert result.max_rhat < 1.05
    assert result.num_divergent == 3
    assert result.max_depth_hits == 5
    record = result.to_dict()
    assert set(record['rhat']) == {'a', 'b'}
    assert record['accept_stat'] == pytest.approx([0.8] * 4)


def test_diagnostics_needs_draws():
    with pytest.raises(DataError):
        diagnostics(make_draws(np.zeros((2, 6, 1))))


def test_summarize_constant():
    frame = summarize(make_draws(np.full((2, 50, 1), 3.25), names=['c']))
    row = frame.iloc[0]
    assert row['variable'] == 'c'
    assert row['mean'] == 3.25
    assert row['sd'] == 0
    assert row['q2.5'] == row['q50'] == row['q97.5'] == 3.25


def test_summarize_median():
    values = (np.arange(1, 10001) / 10000).reshape(1, -1, 1)
    frame = summarize(make_draws(values))
    assert frame['q50'].iloc[0] == pytest.approx(0.5, abs=1e-4)
    assert list(frame.columns) == ['variable', 'mean', 'sd', 'q2.5', 'q50', 'q97.5']
