# built-in
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

# external
import numpy as np
import pandas as pd

# app
from ._exceptions import ConfigError, DataError
from ._glm import Dataset


@dataclass(frozen=True)
class SurvivalRecord:
    time: float
    event: int
    x: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.time > 0:
            raise DataError('survival times must be positive, got {}'.format(self.time))
        if self.event not in (0, 1):
            raise DataError('event indicator must be 0 or 1, got {}'.format(self.event))
        object.__setattr__(self, 'x', tuple(float(v) for v in self.x))


@dataclass(frozen=True)
class Breaks:
    """Cut points 0 = s_0 < s_1 < ... < s_{J-1}; the last interval is open.

    Intervals are left-open and right-closed, interval j (1-based) being
    (s_{j-1}, s_j].
    """
    cuts: Tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cuts)
        if not cuts or cuts[0] != 0:
            raise ConfigError('breaks must start at 0')
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConfigError('breaks must be strictly increasing')
        object.__setattr__(self, 'cuts', cuts)

    @property
    def J(self) -> int:
        return len(self.cuts)

    def interval(self, time: float) -> int:
        return int(np.searchsorted(self.cuts, time, side='left'))

    def bounds(self, j: int) -> Tuple[float, float]:
        if not 1 <= j <= self.J:
            raise ConfigError('interval {} outside 1..{}'.format(j, self.J))
        upper = self.cuts[j] if j < self.J else np.inf
        return self.cuts[j - 1], upper


def risk_time(y: float, j: int, breaks: Breaks) -> float:
    lower, upper = breaks.bounds(j)
    return max(min(y, upper) - lower, 0.0)


def choose_breaks(times, J: int, events=None) -> Breaks:
    """Cut points at type-7 quantiles k/J of the event times."""
    times = np.asarray(times, dtype=float)
    if events is not None:
        times = times[np.asarray(events) == 1]
    if J < 1:
        raise ConfigError('need at least one interval')
    if J == 1:
        return Breaks((0.0, ))
    if np.unique(times).shape[0] < J:
        raise DataError('{} distinct event times cannot support {} intervals'.format(np.unique(times).shape[0], J))
    cuts = np.quantile(times, np.arange(1, J) / J)
    return Breaks((0.0, ) + tuple(np.unique(cuts[cuts > 0])))


def _rows(records: Sequence[SurvivalRecord], breaks: Breaks):
    for i, record in enumerate(records, start=1):
        last = breaks.interval(record.time)
        for j in range(1, last + 1):
            delta = record.event if j == last else 0
            yield i, j, delta, risk_time(record.time, j, breaks), record.x


def expand_poisson(records: Sequence[SurvivalRecord], breaks: Breaks, names: Sequence[str] = ()) -> Dataset:
    """Long-format Poisson data set with interval dummies and log risk-time offsets."""
    if not records:
        raise DataError('no survival records given')
    p = len(records[0].x)
    if any(len(r.x) != p for r in records):
        raise DataError('records have differing numbers of covariates')
    names = tuple(names) or tuple('x{}'.format(k + 1) for k in range(p))
    if len(names) != p:
        raise DataError('{} covariate names for {} covariates'.format(len(names), p))

    y, X, offset = [], [], []
    for _, j, delta, risk, x in _rows(records, breaks):
        dummies = np.zeros(breaks.J)
        dummies[j - 1] = 1.0
        y.append(delta)
        X.append(np.concatenate([dummies, x]))
        offset.append(np.log(risk))
    dummy_names = tuple('dummy_{}'.format(j) for j in range(1, breaks.J + 1))
    return Dataset(y=np.array(y, dtype=float), X=np.array(X), offset=np.array(offset), names=dummy_names + names)


def expansion_table(records: Sequence[SurvivalRecord], breaks: Breaks, names: Sequence[str] = ()) -> pd.DataFrame:
    dataset = expand_poisson(records, breaks, names)
    ids, intervals = [], []
    for i, j, *_ in _rows(records, breaks):
        ids.append(i)
        intervals.append(j)
    frame = pd.DataFrame(dataset.X, columns=list(dataset.names))
    frame.insert(0, 'delta', dataset.y.astype(int))
    frame.insert(0, 'interval', intervals)
    frame.insert(0, 'id', ids)
    frame['log_risk'] = dataset.offset
    return frame


def piecewise_loglik(records: Iterable[SurvivalRecord], breaks: Breaks, log_hazards, beta) -> float:
    """Piecewise-exponential log-likelihood: hazard^event times survivor function."""
    log_hazards = np.asarray(log_hazards, dtype=float)
    beta = np.asarray(beta, dtype=float)
    total = 0.0
    for record in records:
        xb = float(np.dot(record.x, beta)) if beta.size else 0.0
        last = breaks.interval(record.time)
        cumulative = sum(
            np.exp(log_hazards[j - 1]) * risk_time(record.time, j, breaks) for j in range(1, last + 1)
        )
        total += record.event * (log_hazards[last - 1] + xb) - np.exp(xb) * cumulative
    return float(total)


def records_from_frame(frame: pd.DataFrame, time: str = 'time', event: str = 'event',
                       covariates: Optional[Sequence[str]] = None) -> List[SurvivalRecord]:
    for column in (time, event):
        if column not in frame.columns:
            raise DataError('missing column {!r}'.format(column))
    if covariates is None:
        covariates = [c for c in frame.columns if c not in (time, event)]
    missing = frame[[time, event, *covariates]].isna().any(axis=1)
    if missing.any():
        rows = ', '.join(str(i + 1) for i in np.flatnonzero(missing.to_numpy()))
        raise DataError('missing values in rows {}'.format(rows))
    for column in (time, event, *covariates):
        if not pd.api.types.is_numeric_dtype(frame[column]):
            raise DataError('column {!r} must be numeric'.format(column))
    return [
        SurvivalRecord(time=float(row[time]), event=int(row[event]), x=tuple(row[c] for c in covariates))
        for _, row in frame.iterrows()
    ]
