# external
import numpy as np
import pandas as pd
import pytest

# project
from hdprior import (
    Breaks, ConfigError, DataError, SurvivalRecord, choose_breaks, expand_poisson, expansion_table, fit_mle,
    get_family, get_link, log_likelihood, piecewise_loglik, risk_time,
)
from hdprior._survival import records_from_frame


BREAKS = Breaks((0.0, 1.0, 2.0))


def test_risk_time():
    assert risk_time(1.5, 1, BREAKS) == 1.0
    assert risk_time(1.5, 2, BREAKS) == 0.5
    assert risk_time(1.0, 2, BREAKS) == 0.0
    assert risk_time(7.0, 3, BREAKS) == 5.0


def test_expand_event_record():
    data = expand_poisson([SurvivalRecord(1.5, 1)], BREAKS)
    assert data.y.tolist() == [0.0, 1.0]
    assert data.X.tolist() == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    np.testing.assert_allclose(data.offset, [0.0, np.log(0.5)])
    assert data.names == ('dummy_1', 'dummy_2', 'dummy_3')


def test_expand_censored_record():
    data = expand_poisson([SurvivalRecord(1.5, 0)], BREAKS)
    assert data.y.tolist() == [0.0, 0.0]
    assert data.n == 2


def test_expand_on_cut_point():
    data = expand_poisson([SurvivalRecord(1.0, 1)], BREAKS)
    assert data.n == 1
    assert data.y.tolist() == [1.0]
    assert data.offset.tolist() == [0.0]


def test_expand_partitions_follow_up():
    rng = np.random.default_rng(2)
    records = [SurvivalRecord(float(t), int(e), (float(x), )) for t, e, x in
               zip(rng.exponential(1.5, 30), rng.integers(0, 2, 30), rng.normal(size=30))]
    table = expansion_table(records, BREAKS, ['age'])
    totals = table.assign(risk=np.exp(table['log_risk'])).groupby('id')['risk'].sum()
    np.testing.assert_allclose(totals.to_numpy(), [r.time for r in records])
    assert table.groupby('id')['delta'].sum().tolist() == [r.event for r in records]
    assert list(table.columns) == ['id', 'interval', 'delta', 'dummy_1', 'dummy_2', 'dummy_3', 'age', 'log_risk']


def test_poisson_likelihood_matches_piecewise():
    rng = np.random.default_rng(4)
    records = [SurvivalRecord(float(t), int(e), (float(x), )) for t, e, x in
               zip(rng.exponential(1.0, 25), rng.integers(0, 2, 25), rng.normal(size=25))]
    data = expand_poisson(records, BREAKS)
    family, link = get_family('poisson'), get_link('log')
    gaps = []
    for log_hazards, beta in (([-0.2, 0.1, 0.3], [0.4]), ([0.5, -1.0, 0.0], [-0.7])):
        poisson = log_likelihood(family, link, np.array(log_hazards + beta), 1.0, data)
        gaps.append(poisson - piecewise_loglik(records, BREAKS, log_hazards, beta))
    # the gap is the sum of log risk times over event rows
    assert gaps[0] == pytest.approx(gaps[1], abs=1e-9)
    assert gaps[0] == pytest.approx(float(np.sum(data.y * data.offset)), abs=1e-9)


def test_single_interval_rate():
    records = [SurvivalRecord(t, e) for t, e in ((0.5, 1), (2.0, 0), (1.5, 1), (3.0, 1))]
    data = expand_poisson(records, choose_breaks([r.time for r in records], 1))
    fit = fit_mle(get_family('poisson'), get_link('log'), data)
    assert np.exp(fit.beta_hat[0]) == pytest.approx(3 / 7.0)


def test_choose_breaks_quantiles():
    breaks = choose_breaks(np.arange(1, 101), 4)
    np.testing.assert_allclose(breaks.cuts, (0.0, 25.75, 50.5, 75.25))
    assert choose_breaks(np.arange(1, 101), 1).cuts == (0.0, )


def test_choose_breaks_uses_events_only():
    times = np.arange(1.0, 11.0)
    events = np.array([1, 0] * 5)
    breaks = choose_breaks(times, 2, events)
    assert breaks.cuts == (0.0, 5.0)


def test_choose_breaks_errors():
    with pytest.raises(ConfigError):
        choose_breaks([1.0, 2.0], 0)
    with pytest.raises(DataError):
        choose_breaks([1.0, 1.0, 1.0], 3)


def test_records_validation():
    with pytest.raises(DataError):
        SurvivalRecord(0.0, 1)
    with pytest.raises(DataError):
        SurvivalRecord(1.0, 2)
    with pytest.raises(ConfigError):
        Breaks((0.0, 2.0, 1.0))


def test_records_from_frame():
    frame = pd.DataFrame(dict(time=[1.0, 2.5], event=[1, 0], trt=[0.0, 1.0]))
    records = records_from_frame(frame)
    assert records[1] == SurvivalRecord(2.5, 0, (1.0, ))
    frame.loc[1, 'trt'] = np.nan
    with pytest.raises(DataError, match='rows 2'):
        records_from_frame(frame)


def test_records_from_frame_text_covariate():
    frame = pd.DataFrame(dict(time=[1.0, 2.5], event=[1, 0], arm=['control', 'treated']))
    with pytest.raises(DataError, match="'arm' must be numeric"):
        records_from_frame(frame)
    records = records_from_frame(frame, covariates=[])
    assert records[0].x == ()
