# built-in
from dataclasses import dataclass, replace
from logging import getLogger
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

# external
import numpy as np
import pandas as pd

# app
from ._constants import INTERCEPT
from ._exceptions import ConfigError, DataError
from ._formula import Formula, parse_formula
from ._glm import Dataset
from ._sampler import Draws


logger = getLogger('hdprior')
Levels = Dict[str, Tuple[str, ...]]


def read_frame(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError('data file not found: {}'.format(path))
    try:
        return pd.read_csv(path, float_precision='round_trip')
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError('cannot read {}: {}'.format(path, exc)) from exc


def _is_text(column: pd.Series) -> bool:
    """Text columns hold values none of which parse as numbers."""
    if pd.api.types.is_numeric_dtype(column):
        return False
    values = column.dropna()
    return bool(pd.to_numeric(values, errors='coerce').isna().all())


def _numeric(column: pd.Series, name: str) -> np.ndarray:
    converted = pd.to_numeric(column, errors='coerce')
    bad = converted.isna() & column.notna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0]) + 1
        raise DataError('non-numeric value {!r} in column {} at row {}'.format(column[bad].iloc[0], name, row))
    return converted.to_numpy(dtype=float)


def _used_columns(formula: Formula, offset: Optional[str]) -> List[str]:
    columns = [formula.response] + list(formula.terms)
    if offset:
        columns.append(offset)
    return columns


def categorical_levels(frames: Sequence[pd.DataFrame], formula: Formula,
                       categorical: Sequence[str] = ()) -> Levels:
    """Sorted levels of every categorical term, pooled over all frames."""
    levels = dict()     # type: Levels
    for term in formula.terms:
        found = set()
        forced = term in categorical
        for frame in frames:
            if term in frame.columns and (forced or _is_text(frame[term])):
                found.update(str(v) for v in frame[term].dropna())
        if found:
            levels[term] = tuple(sorted(found))
    return levels


def frame_to_dataset(frame: pd.DataFrame, formula: Union[str, Formula], levels: Optional[Levels] = None,
                     categorical: Sequence[str] = (), offset: Optional[str] = None) -> Dataset:
    """Design from a frame: numeric columns as they are, categorical ones as
    dummies against their first level."""
    if isinstance(formula, str):
        formula = parse_formula(formula)
    missing = [c for c in _used_columns(formula, offset) if c not in frame.columns]
    if missing:
        raise DataError('columns named in the formula are missing from the data: {}'.format(', '.join(missing)))
    used = frame[_used_columns(formula, offset)]
    empty = used.isna().any(axis=1).to_numpy()
    if empty.any():
        rows = ', '.join(str(i + 1) for i in np.flatnonzero(empty))
        raise DataError('missing values in rows {}'.format(rows))
    if levels is None:
        levels = categorical_levels([frame], formula, categorical)

    names = [INTERCEPT] if formula.intercept else []
    columns = [np.ones(len(frame))] if formula.intercept else []
    for term in formula.terms:
        if term in levels:
            values = frame[term].astype(str).to_numpy()
            unknown = set(values) - set(levels[term])
            if unknown:
                raise DataError('column {} has unknown levels {}'.format(term, sorted(unknown)))
            for level in levels[term][1:]:
                names.append('{}:{}'.format(term, level))
                columns.append((values == level).astype(float))
        else:
            names.append(term)
            columns.append(_numeric(frame[term], term))

    y = _numeric(frame[formula.response], formula.response)
    X = np.column_stack(columns) if columns else np.zeros((len(frame), 0))
    offset_values = _numeric(frame[offset], offset) if offset else None
    return Dataset(y=y, X=X, offset=offset_values, names=tuple(names))


def load_dataset(path: Union[str, Path], formula: Union[str, Formula], categorical: Sequence[str] = (),
                 offset: Optional[str] = None, levels: Optional[Levels] = None) -> Dataset:
    return frame_to_dataset(read_frame(path), formula, levels, categorical, offset)


def load_datasets(paths: Sequence[Union[str, Path]], formula: Union[str, Formula], categorical: Sequence[str] = (),
                  offset: Optional[str] = None) -> List[Dataset]:
    """Current data set first; dummy coding is shared across all files."""
    if isinstance(formula, str):
        formula = parse_formula(formula)
    frames = [read_frame(p) for p in paths]
    levels = categorical_levels(frames, formula, categorical)
    datasets = []
    for i, frame in enumerate(frames):
        dataset = frame_to_dataset(frame, formula, levels, categorical, offset)
        datasets.append(dataset.as_historical(i) if i else dataset)
        logger.debug('loaded %s: %d rows, %d columns', paths[i], dataset.n, dataset.p)
    return datasets


def write_dataset(dataset: Dataset, path: Union[str, Path], response: str = 'y', offset: str = 'offset') -> None:
    """Response, non-intercept design columns and offset as one CSV."""
    frame = pd.DataFrame({response: dataset.y})
    for j, name in enumerate(dataset.names):
        if name != INTERCEPT:
            frame[name] = dataset.X[:, j]
    frame[offset] = dataset.offset
    frame.to_csv(path, index=False)


# standardisation


@dataclass(frozen=True)
class ColumnScale:
    mean: float
    sd: float


def continuous_columns(dataset: Dataset) -> List[str]:
    """Columns with values other than 0 and 1; the intercept never counts."""
    result = []
    for j, name in enumerate(dataset.names):
        if name == INTERCEPT:
            continue
        if not np.all(np.isin(dataset.X[:, j], (0.0, 1.0))):
            result.append(name)
    return result


def standardize(current: Dataset, historical: Sequence[Dataset] = ()) -> Tuple[Dataset, List[Dataset],
                                                                               Dict[str, ColumnScale]]:
    """Center and scale continuous columns by the current data's mean and sd."""
    scales = dict()     # type: Dict[str, ColumnScale]
    for name in continuous_columns(current):
        column = current.X[:, current.names.index(name)]
        sd = float(np.std(column, ddof=1)) if current.n > 1 else 0.0
        if not sd > 0:
            raise DataError('column {} has zero standard deviation in the current data'.format(name))
        scales[name] = ColumnScale(float(np.mean(column)), sd)

    def apply(dataset: Dataset) -> Dataset:
        if dataset.names != current.names:
            raise DataError('data set {} has columns {}, current has {}'.format(
                dataset.index, dataset.names, current.names))
        X = dataset.X.copy()
        for name, scale in scales.items():
            j = dataset.names.index(name)
            X[:, j] = (X[:, j] - scale.mean) / scale.sd
        return replace(dataset, X=X)

    return apply(current), [apply(d) for d in historical], scales


def to_original_scale(draws: Draws, scales: Mapping[str, ColumnScale]) -> Draws:
    """Coefficients on the unstandardised covariates.

    beta_j / sd_j for scaled columns, with the intercept absorbing
    sum_j beta_j mean_j / sd_j.
    """
    if not scales:
        return draws
    present = [name for name in scales if name in draws.names]
    if not present:
        return draws
    if INTERCEPT not in draws.names:
        raise ConfigError('coefficients of centred covariates cannot be back-transformed without an intercept')
    values = draws.values.copy()
    intercept = draws.names.index(INTERCEPT)
    for name in present:
        j = draws.names.index(name)
        scale = scales[name]
        values[:, :, intercept] -= draws.values[:, :, j] * scale.mean / scale.sd
        values[:, :, j] = draws.values[:, :, j] / scale.sd
    return replace(draws, values=values)
