# external
import numpy as np
import pandas as pd
import pytest

# project
from hdprior import (
    ColumnScale, ConfigError, DataError, load_dataset, load_datasets, standardize, to_original_scale, write_dataset,
)
from hdprior._data import continuous_columns, frame_to_dataset

# app
from .helpers import make_dataset, make_draws


def trial_frame():
    return pd.DataFrame(dict(
        y=[0, 1, 1, 0, 1],
        dose=[0.5, 1.0, 1.5, 2.0, 2.5],
        trt=['b', 'a', 'c', 'a', 'b'],
        days=[10, 12, 9, 11, 14],
    ))


def test_dummy_coding():
    dataset = frame_to_dataset(trial_frame(), 'y ~ dose + trt')
    assert dataset.names == ('(Intercept)', 'dose', 'trt:b', 'trt:c')
    np.testing.assert_array_equal(dataset.X[:, 2], [1, 0, 0, 0, 1])
    np.testing.assert_array_equal(dataset.X[:, 3], [0, 0, 1, 0, 0])
    np.testing.assert_array_equal(dataset.y, [0, 1, 1, 0, 1])


def test_forced_categorical_and_offset():
    frame = trial_frame().assign(site=[1, 2, 1, 3, 2])
    dataset = frame_to_dataset(frame, 'y ~ 0 + site', categorical=['site'], offset='days')
    assert dataset.names == ('site:2', 'site:3')
    np.testing.assert_array_equal(dataset.offset, [10, 12, 9, 11, 14])


def test_missing_values_reported_by_row():
    frame = trial_frame()
    frame.loc[1, 'dose'] = np.nan
    with pytest.raises(DataError, match='missing values in rows 2'):
        frame_to_dataset(frame, 'y ~ dose')


def test_missing_column():
    with pytest.raises(DataError, match='age'):
        frame_to_dataset(trial_frame(), 'y ~ dose + age')


def test_non_numeric_value():
    frame = trial_frame().assign(dose=['0.5', '1.0', 'high', '2.0', '2.5'])
    with pytest.raises(DataError, match='column dose at row 3'):
        frame_to_dataset(frame, 'y ~ dose')


def test_levels_shared_across_files(tmp_path):
    current = trial_frame().iloc[[0, 1, 3]]
    history = trial_frame()
    current.to_csv(tmp_path / 'current.csv', index=False)
    history.to_csv(tmp_path / 'hist.csv', index=False)
    datasets = load_datasets([tmp_path / 'current.csv', tmp_path / 'hist.csv'], 'y ~ trt')
    assert datasets[0].names == datasets[1].names == ('(Intercept)', 'trt:b', 'trt:c')
    assert datasets[0].is_current
    assert datasets[1].role == 'historical'
    assert datasets[1].index == 1
    np.testing.assert_array_equal(datasets[0].X[:, 2], [0, 0, 0])


def test_unknown_level():
    with pytest.raises(DataError, match='unknown levels'):
        frame_to_dataset(trial_frame(), 'y ~ trt', levels=dict(trt=('a', 'b')))


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match='not found'):
        load_dataset(tmp_path / 'nope.csv', 'y ~ x')


def test_write_dataset(tmp_path):
    dataset = frame_to_dataset(trial_frame(), 'y ~ dose + trt', offset='days')
    write_dataset(dataset, tmp_path / 'out.csv')
    frame = pd.read_csv(tmp_path / 'out.csv')
    assert list(frame.columns) == ['y', 'dose', 'trt:b', 'trt:c', 'offset']
    assert frame['offset'].tolist() == [10, 12, 9, 11, 14]


def test_standardize():
    frame = trial_frame()
    current = frame_to_dataset(frame, 'y ~ dose + trt')
    history = frame_to_dataset(frame.assign(dose=frame['dose'] * 2), 'y ~ dose + trt')
    assert continuous_columns(current) == ['dose']
    cur, (hist, ), scales = standardize(current, [history])
    assert scales['dose'].mean == pytest.approx(1.5)
    assert scales['dose'].sd == pytest.approx(np.std([0.5, 1.0, 1.5, 2.0, 2.5], ddof=1))
    assert np.mean(cur.X[:, 1]) == pytest.approx(0.0)
    assert np.std(cur.X[:, 1], ddof=1) == pytest.approx(1.0)
    # historical columns use the current data's centre and scale
    np.testing.assert_allclose(hist.X[:, 1], (history.X[:, 1] - 1.5) / scales['dose'].sd)
    np.testing.assert_array_equal(cur.X[:, 2:], current.X[:, 2:])
    np.testing.assert_array_equal(cur.X[:, 0], 1.0)


def test_standardize_constant_column():
    frame = trial_frame().assign(dose=1.5)
    with pytest.raises(DataError, match='zero standard deviation'):
        standardize(frame_to_dataset(frame, 'y ~ dose'))


def test_original_scale_keeps_linear_predictor():
    raw = make_dataset('gaussian', n=30, beta=(0.3, 0.5, -0.2), seed=3)
    scaled, _, scales = standardize(raw)
    rng = np.random.default_rng(0)
    values = rng.normal(size=(2, 4, 3))
    draws = make_draws(values, names=raw.names)
    back = to_original_scale(draws, scales)
    for c in range(2):
        for i in range(4):
            np.testing.assert_allclose(raw.X @ back.values[c, i], scaled.X @ values[c, i], atol=1e-10)


def test_original_scale_needs_intercept():
    draws = make_draws(np.ones((1, 2, 1)), names=['x1'])
    with pytest.raises(ConfigError):
        to_original_scale(draws, dict(x1=ColumnScale(0.0, 2.0)))
