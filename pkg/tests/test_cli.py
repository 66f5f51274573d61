# built-in
import json
from pathlib import Path

# external
import numpy as np
import pandas as pd
import pytest

# project
from hdprior import DataError, main
from hdprior._cli import staged_output


CONFIGS = Path(__file__).parent / 'configs'


def run_config(tmp_path: Path, text: str) -> Path:
    text = text.replace('current.csv', str(CONFIGS / 'current.csv')).replace('hist.csv', str(CONFIGS / 'hist.csv'))
    path = tmp_path / 'run.ini'
    path.write_text(text)
    return path


def test_survexpand(tmp_path):
    code = main(['survexpand', '--config', str(CONFIGS / 'surv.ini'), '--out', str(tmp_path)])
    assert code == 0
    frame = pd.read_csv(tmp_path / 'expanded.csv')
    assert len(frame) == 16
    assert list(frame.columns[:5]) == ['id', 'interval', 'delta', 'dummy_1', 'dummy_2']
    assert frame['delta'].sum() == 7
    record = json.loads((tmp_path / 'diagnostics.json').read_text())
    assert record['command'] == 'survexpand'
    assert record['breaks'] == [0.0, 1.2]
    assert record['rows'] == [16]
    assert not list(tmp_path.glob('.staging-*'))


def test_fit(tmp_path):
    code = main(['fit', '--config', str(CONFIGS / 'fit.ini'), '--out', str(tmp_path), '--seed', '3'])
    assert code == 0
    draws = pd.read_csv(tmp_path / 'draws.csv')
    assert list(draws.columns) == ['chain', 'iteration', '(Intercept)', 'x', 'trt:b']
    assert len(draws) == 200
    summary = pd.read_csv(tmp_path / 'summary.csv')
    assert summary['variable'].tolist() == ['(Intercept)', 'x', 'trt:b']
    record = json.loads((tmp_path / 'diagnostics.json').read_text())
    assert record['command'] == 'fit'
    assert record['seed'] == 3
    assert record['config']['sampler']['seed'] == 3
    assert record['config']['prior'] == dict(type='pp', a0='0.5')
    assert set(record['rhat']) == {'(Intercept)', 'x', 'trt:b'}


def test_bad_family(tmp_path):
    text = (CONFIGS / 'fit.ini').read_text().replace('binomial', 'tweedie')
    out = tmp_path / 'out'
    assert main(['fit', '--config', str(run_config(tmp_path, text)), '--out', str(out)]) == 2
    assert not list(out.glob('*'))


def test_missing_column(tmp_path):
    text = (CONFIGS / 'fit.ini').read_text().replace('y ~ x + trt', 'y ~ x + dose')
    out = tmp_path / 'out'
    assert main(['fit', '--config', str(run_config(tmp_path, text)), '--out', str(out)]) == 3
    assert not list(out.glob('*'))


def test_staged_output_discards_on_error(tmp_path):
    with pytest.raises(DataError):
        with staged_output(tmp_path) as stage:
            (stage / 'draws.csv').write_text('partial')
            raise DataError('boom')
    assert not list(tmp_path.iterdir())

    with staged_output(tmp_path) as stage:
        (stage / 'draws.csv').write_text('done')
    assert [p.name for p in tmp_path.iterdir()] == ['draws.csv']


BRIDGE_SAMPLER = '[sampler]\nchains = 2\niter_warmup = 150\niter_sampling = 500\nseed = 7\n'


def write_run(tmp_path: Path, prior: str = '', extra: str = '') -> str:
    text = '[model]\nformula = y ~ x\nfamily = binomial\ncurrent = current.csv\nhistorical = hist.csv\n\n'
    text += BRIDGE_SAMPLER + '\n[prior]\n' + prior + '\n' + extra
    return str(run_config(tmp_path, text))


def test_evidence(tmp_path):
    out = tmp_path / 'out'
    assert main(['evidence', '--config', write_run(tmp_path, 'type = pp\na0 = 0.5\n'), '--out', str(out)]) == 0
    frame = pd.read_csv(out / 'evidence.csv')
    assert frame['prior'].tolist() == ['pp']
    row = frame.iloc[0]
    assert row['log_evidence'] == pytest.approx(row['log_posterior_constant'] - row['log_prior_constant'])
    record = json.loads((out / 'diagnostics.json').read_text())
    assert record['command'] == 'evidence'
    assert record['evidence']['log_evidence'] == pytest.approx(row['log_evidence'])


def test_rmap(tmp_path):
    out = tmp_path / 'out'
    config = write_run(tmp_path, 'type = rmap\n', '[rmap]\nw = 0.5\n')
    assert main(['rmap', '--config', config, '--out', str(out)]) == 0
    draws = pd.read_csv(out / 'draws.csv')
    assert list(draws.columns) == ['chain', 'iteration', '(Intercept)', 'x']
    assert len(draws) == 1000
    assert pd.read_csv(out / 'summary.csv')['variable'].tolist() == ['(Intercept)', 'x']
    record = json.loads((out / 'diagnostics.json').read_text())
    assert record['command'] == 'rmap'
    assert record['prior_weight'] == 0.5
    assert 0 < record['weight'] < 1
    assert 0 <= record['informative_fraction'] <= 1


def test_lognc_feeds_npp_fit(tmp_path):
    out = tmp_path / 'grid'
    config = write_run(tmp_path, extra='[lognc]\na0_grid = 0, 0.25, 0.5, 0.75, 1\n')
    assert main(['lognc', '--config', config, '--out', str(out), '--threads', '2']) == 0
    grid = pd.read_csv(out / 'lognc_grid_1.csv')
    assert grid['a0'].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert grid['lognc_raw'][0] == grid['lognc_smooth'][0] == 0.0
    assert np.all(np.diff(grid['lognc_raw']) < 0)
    assert list(pd.read_csv(out / 'lognc_plot_1.csv').columns) == ['a0', 'value']
    assert json.loads((out / 'diagnostics.json').read_text())['command'] == 'lognc'

    prior = 'type = npp\ngrids = {}\na0_shape1 = 2\na0_shape2 = 2\n'.format(out / 'lognc_grid_1.csv')
    fitted = tmp_path / 'fit'
    assert main(['fit', '--config', write_run(tmp_path, prior), '--out', str(fitted)]) == 0
    draws = pd.read_csv(fitted / 'draws.csv')
    assert 'a0_hist_1' in draws.columns
    assert draws['a0_hist_1'].between(0, 1).all()


def test_bf(tmp_path):
    out = tmp_path / 'out'
    config = write_run(tmp_path, extra='[bf]\na0_grid = 0, 0.5, 1\n')
    assert main(['bf', '--config', config, '--out', str(out)]) == 0
    table = pd.read_csv(out / 'bf.csv')
    assert list(table.columns) == ['a0', 'log_z_a', 'log_z_b', 'log_bf', 'label']
    assert table['a0'].tolist() == [0.0, 0.5, 1.0]
    np.testing.assert_allclose(table['log_bf'], table['log_z_a'] - table['log_z_b'])
    plot = pd.read_csv(out / 'bf_plot.csv')
    assert list(plot.columns) == ['a0', 'value']
    record = json.loads((out / 'diagnostics.json').read_text())
    assert (record['link_a'], record['link_b']) == ('logit', 'probit')


def test_unknown_prior_type(tmp_path):
    out = tmp_path / 'out'
    assert main(['fit', '--config', write_run(tmp_path, 'type = horseshoe\n'), '--out', str(out)]) == 2
    assert not out.exists() or not list(out.glob('*'))


def test_survexpand_text_covariate(tmp_path):
    (tmp_path / 'surv.csv').write_text('time,event,arm\n0.4,1,control\n1.2,0,treated\n2.0,1,control\n')
    config = tmp_path / 'surv.ini'
    config.write_text('[survexpand]\ndata = surv.csv\nintervals = 1\n')
    out = tmp_path / 'out'
    assert main(['survexpand', '--config', str(config), '--out', str(out)]) == 3
    assert not out.exists() or not list(out.glob('*'))
