# built-in
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from argparse import ArgumentParser
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

# external
import numpy as np
import pandas as pd

# app
from ._cfg import (
    RunConfig, build_prior_spec, get_float, get_floats, get_int, get_list, initial_hyper, read_config, resolve_path,
)
from ._constants import ADMISSIBLE_LINKS, COMMANDS, GRID_SIZE, LOESS_SPAN
from ._data import ColumnScale, load_datasets, read_frame, standardize, to_original_scale
from ._diagnostics import diagnostics, summarize
from ._evidence import build_lognc_grid, default_a0_grid, link_selection, marginal_likelihood, rmap_posterior
from ._exceptions import ConfigError, HdpriorError
from ._glm import Dataset, ModelSpec
from ._manager import build_target
from ._sampler import Draws, sample
from ._survival import Breaks, choose_breaks, expansion_table, records_from_frame


logger = logging.getLogger('hdprior')
Command = Callable[[RunConfig, Path], Dict[str, Any]]


def _parser() -> ArgumentParser:
    parser = ArgumentParser(prog='hdprior', description='Bayesian GLMs with historical-data borrowing priors.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', required=True, help='INI run configuration')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--threads', type=int, default=None, help='cap on concurrent chains and grid points')
    parser.add_argument('--out', type=Path, default=None, help='output directory')
    parser.add_argument('--a0', default=None, help='a0 values, comma separated, or auto-half-ratio')
    parser.add_argument('--report-original-scale', action='store_true')
    parser.add_argument('--log-level', default='WARNING', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    return parser


@contextmanager
def staged_output(out: Path) -> Iterator[Path]:
    """Files written to the yielded directory reach `out` only on success."""
    out.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix='.staging-', dir=str(out)))
    try:
        yield stage
        for path in sorted(stage.iterdir()):
            os.replace(str(path), str(out / path.name))
    finally:
        shutil.rmtree(str(stage), ignore_errors=True)


def _write_json(path: Path, data: Dict[str, Any]) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2, default=_json_default) + '\n')


def _json_default(value):
    if isinstance(value, (np.integer, )):
        return int(value)
    if isinstance(value, (np.floating, )):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(type(value))


# shared steps


def _load(config: RunConfig) -> Tuple[ModelSpec, List[Dataset], Dict[str, ColumnScale]]:
    if not config.formula:
        raise ConfigError('[model] formula is required')
    datasets = load_datasets(config.data_paths, config.formula, config.categorical, config.offset)
    scales = dict()     # type: Dict[str, ColumnScale]
    if config.standardize:
        current, history, scales = standardize(datasets[0], datasets[1:])
        datasets = [current] + history
    model = ModelSpec.create(config.family, config.link, names=datasets[0].names)
    return model, datasets, scales


def _report(draws: Draws, config: RunConfig, scales: Dict[str, ColumnScale], stage: Path) -> Dict[str, Any]:
    """draws.csv and summary.csv; returns the diagnostics record."""
    if config.report_original_scale:
        draws = to_original_scale(draws, scales)
    draws.to_frame().to_csv(stage / 'draws.csv', index=False)
    summarize(draws).to_csv(stage / 'summary.csv', index=False)
    result = diagnostics(draws, config.sampler.max_tree_depth).to_dict()
    result['scales'] = {name: dict(mean=s.mean, sd=s.sd) for name, s in scales.items()}
    result['original_scale'] = config.report_original_scale
    return result


def _a0_grid(values: Dict[str, str], section: str, size: int) -> np.ndarray:
    grid = get_floats(values, section, 'a0_grid')
    if grid is not None:
        return np.asarray(grid, dtype=float)
    return default_a0_grid(get_int(values, section, 'grid_size', size))


# commands


def run_fit(config: RunConfig, stage: Path) -> Dict[str, Any]:
    if config.prior.get('type') == 'rmap':
        return run_rmap(config, stage)
    model, datasets, scales = _load(config)
    spec = build_prior_spec(config, datasets)
    draws = sample(build_target(spec, model, datasets), config.sampler)
    result = _report(draws, config, scales, stage)
    result['seed'] = draws.seed
    return result


def run_rmap(config: RunConfig, stage: Path) -> Dict[str, Any]:
    model, datasets, scales = _load(config)
    spec = build_prior_spec(config, datasets, kind='rmap')
    mixed = rmap_posterior(spec, model, datasets, config.sampler.resolved())
    result = _report(mixed.draws, config, scales, stage)
    result.update(
        seed=mixed.draws.seed,
        prior_weight=mixed.prior_weight,
        weight=mixed.weight,
        log_z_informative=mixed.log_z_informative,
        log_z_vague=mixed.log_z_vague,
        informative_fraction=mixed.informative_fraction,
    )
    return result


def run_lognc(config: RunConfig, stage: Path) -> Dict[str, Any]:
    model, datasets, _ = _load(config)
    values = config.section('lognc')
    grids = build_lognc_grid(
        model, datasets[1:],
        a0_grid=_a0_grid(values, 'lognc', GRID_SIZE),
        config=config.sampler.resolved(),
        span=get_float(values, 'lognc', 'span', LOESS_SPAN),
        hyper=initial_hyper(config),
        threads=config.threads,
    )
    for h, grid in enumerate(grids, start=1):
        grid.to_frame().to_csv(stage / 'lognc_grid_{}.csv'.format(h), index=False)
        grid.plot_frame().to_csv(stage / 'lognc_plot_{}.csv'.format(h), index=False)
    return dict(reliable=[g.reliable for g in grids], seed=config.sampler.seed)


def run_evidence(config: RunConfig, stage: Path) -> Dict[str, Any]:
    model, datasets, _ = _load(config)
    spec = build_prior_spec(config, datasets)
    evidence = marginal_likelihood(spec, model, datasets, config.sampler.resolved())
    row = dict(
        prior=spec.kind,
        log_evidence=evidence.log_evidence,
        log_posterior_constant=evidence.log_posterior_constant,
        log_prior_constant=evidence.log_prior_constant,
    )
    pd.DataFrame([row]).to_csv(stage / 'evidence.csv', index=False)
    return dict(evidence=row, seed=config.sampler.seed)


def run_bf(config: RunConfig, stage: Path) -> Dict[str, Any]:
    model, datasets, _ = _load(config)
    values = config.section('bf')
    links = ADMISSIBLE_LINKS[config.family]
    link_a = values.get('link_a', links[0])
    link_b = values.get('link_b', links[1] if len(links) > 1 else links[0])
    model_a = ModelSpec.create(config.family, link_a, model.names)
    model_b = ModelSpec.create(config.family, link_b, model.names)
    table = link_selection(model_a, model_b, datasets, _a0_grid(values, 'bf', 11), config.sampler.resolved(),
                           initial_hyper(config))
    table.to_csv(stage / 'bf.csv', index=False)
    table[['a0', 'log_bf']].rename(columns=dict(log_bf='value')).to_csv(stage / 'bf_plot.csv', index=False)
    return dict(link_a=link_a, link_b=link_b, seed=config.sampler.seed)


def run_survexpand(config: RunConfig, stage: Path) -> Dict[str, Any]:
    values = config.section('survexpand')
    if 'data' not in values:
        raise ConfigError('[survexpand] data is required')
    paths = [resolve_path(config.base_dir, values['data'])]
    paths += [resolve_path(config.base_dir, p) for p in get_list(values, 'survexpand', 'historical')]
    time_col = values.get('time', 'time')
    event_col = values.get('event', 'event')
    covariates = list(get_list(values, 'survexpand', 'covariates')) or None
    frames = [read_frame(p) for p in paths]
    records = [records_from_frame(frame, time_col, event_col, covariates) for frame in frames]
    names = covariates or [c for c in frames[0].columns if c not in (time_col, event_col)]

    cuts = get_floats(values, 'survexpand', 'breaks')
    if cuts is not None:
        breaks = Breaks(cuts)
    else:
        current = records[0]
        breaks = choose_breaks([r.time for r in current], get_int(values, 'survexpand', 'intervals', 5),
                               [r.event for r in current])
    for h, part in enumerate(records):
        name = 'expanded.csv' if h == 0 else 'expanded_hist_{}.csv'.format(h)
        expansion_table(part, breaks, names).to_csv(stage / name, index=False)
    return dict(breaks=list(breaks.cuts), rows=[sum(breaks.interval(r.time) for r in part) for part in records])


HANDLERS = dict(
    fit=run_fit,
    lognc=run_lognc,
    rmap=run_rmap,
    evidence=run_evidence,
    bf=run_bf,
    survexpand=run_survexpand,
)     # type: Dict[str, Command]


def main(argv: Optional[List[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = _parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format='%(levelname)s %(name)s: %(message)s')
    started = time.monotonic()
    try:
        config = read_config(args.config).override(
            seed=args.seed,
            threads=args.threads,
            out=args.out,
            a0=args.a0,
            report_original_scale=args.report_original_scale,
        )
        config = config.override(seed=config.sampler.resolved().seed)
        with staged_output(config.out) as stage:
            result = HANDLERS[args.command](config, stage)
            result.update(command=args.command, config=config.to_dict(), wall_time=time.monotonic() - started)
            _write_json(stage / 'diagnostics.json', result)
    except HdpriorError as exc:
        logger.error('%s', exc)
        return exc.exit_code
    logger.info('%s finished in %.1f s', args.command, time.monotonic() - started)
    return 0
