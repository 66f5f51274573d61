# built-in
from configparser import ConfigParser, Error as ParserError
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

# app
from ._constants import ADMISSIBLE_LINKS, PRIOR_KINDS
from ._evidence import read_lognc_grid, solve_beta_hyper
from ._exceptions import ConfigError
from ._glm import Dataset
from ._sampler import SamplerConfig
from ._specs import (
    BHMSpec, CPSpec, InitialPriorHyper, InitialSpec, LEAPSpec, NAPPSpec, NPPSpec, PPSpec, RMAPSpec, auto_a0,
)


AUTO_A0 = 'auto-half-ratio'
Section = Mapping[str, str]


# typed values


def _label(section: str, key: str) -> str:
    return '[{}] {}'.format(section, key)


def _convert(values: Section, section: str, key: str, convert: Callable[[str], Any], default: Any = None) -> Any:
    raw = values.get(key)
    if raw is None or raw.strip() == '':
        return default
    try:
        return convert(raw.strip())
    except ValueError:
        raise ConfigError('{} has an invalid value {!r}'.format(_label(section, key), raw)) from None


def split_list(raw: str) -> List[str]:
    return [item.strip() for item in raw.replace('\n', ',').split(',') if item.strip()]


def _floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in split_list(raw))


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ('1', 'yes', 'true', 'on'):
        return True
    if lowered in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError(raw)


def get_int(values: Section, section: str, key: str, default: Optional[int] = None) -> Optional[int]:
    return _convert(values, section, key, int, default)


def get_float(values: Section, section: str, key: str, default: Optional[float] = None) -> Optional[float]:
    return _convert(values, section, key, float, default)


def get_floats(values: Section, section: str, key: str, default=None) -> Optional[Tuple[float, ...]]:
    return _convert(values, section, key, _floats, default)


def get_bool(values: Section, section: str, key: str, default: bool = False) -> bool:
    return _convert(values, section, key, _bool, default)


def get_list(values: Section, section: str, key: str) -> Tuple[str, ...]:
    return tuple(_convert(values, section, key, split_list, []))


def _check_keys(values: Section, section: str, allowed: Sequence[str]) -> None:
    unknown = sorted(set(values) - set(allowed))
    if unknown:
        raise ConfigError('unknown keys in [{}]: {}'.format(section, ', '.join(unknown)))


def resolve_path(base: Path, raw: str) -> Path:
    """Paths in a config file are relative to the file."""
    path = Path(raw.strip())
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError('file not found: {}'.format(path))
    return path


# run configuration


SAMPLER_KEYS = ('chains', 'iter_warmup', 'iter_sampling', 'seed', 'target_accept', 'max_tree_depth', 'init_radius',
                'parallel_chains')
MODEL_KEYS = ('formula', 'family', 'link', 'current', 'historical', 'categorical', 'offset', 'standardize')
OUTPUT_KEYS = ('dir', 'report_original_scale')


@dataclass
class RunConfig:
    """Everything a command needs; data paths are absolute once read."""
    path: Optional[Path] = None
    formula: Optional[str] = None
    family: str = 'gaussian'
    link: Optional[str] = None
    current: Optional[Path] = None
    historical: Tuple[Path, ...] = ()
    categorical: Tuple[str, ...] = ()
    offset: Optional[str] = None
    standardize: bool = False
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    prior: Dict[str, str] = field(default_factory=dict)
    sections: Dict[str, Dict[str, str]] = field(default_factory=dict)
    out: Path = Path('hdprior-out')
    report_original_scale: bool = False
    threads: Optional[int] = None
    a0: Optional[str] = None

    @property
    def data_paths(self) -> List[Path]:
        if self.current is None:
            raise ConfigError('[model] current is required')
        return [self.current] + list(self.historical)

    @property
    def base_dir(self) -> Path:
        return self.path.parent if self.path else Path('.')

    def section(self, name: str) -> Dict[str, str]:
        return dict(self.sections.get(name, dict()))

    def override(self, seed: Optional[int] = None, threads: Optional[int] = None, out: Optional[Path] = None,
                 a0: Optional[str] = None, report_original_scale: bool = False) -> 'RunConfig':
        sampler = self.sampler
        if seed is not None:
            sampler = replace(sampler, seed=seed)
        if threads is not None:
            sampler = replace(sampler, parallel_chains=threads)
        return replace(
            self,
            sampler=sampler,
            threads=threads if threads is not None else self.threads,
            out=out if out is not None else self.out,
            a0=a0 if a0 is not None else self.a0,
            report_original_scale=self.report_original_scale or report_original_scale,
        )

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            config=str(self.path) if self.path else None,
            model=dict(
                formula=self.formula,
                family=self.family,
                link=self.link or ADMISSIBLE_LINKS[self.family][0],
                current=str(self.current) if self.current else None,
                historical=[str(p) for p in self.historical],
                categorical=list(self.categorical),
                offset=self.offset,
                standardize=self.standardize,
            ),
            sampler=asdict(self.sampler),
            prior=dict(self.prior, a0=self.a0) if self.a0 is not None else dict(self.prior),
            sections={k: dict(v) for k, v in self.sections.items()},
            output=dict(dir=str(self.out), report_original_scale=self.report_original_scale),
            threads=self.threads,
        )


def read_sampler(values: Section, section: str = 'sampler') -> SamplerConfig:
    _check_keys(values, section, SAMPLER_KEYS)
    kwargs = dict()     # type: Dict[str, Any]
    for key in ('chains', 'iter_warmup', 'iter_sampling', 'seed', 'max_tree_depth', 'parallel_chains'):
        value = get_int(values, section, key)
        if value is not None:
            kwargs[key] = value
    for key in ('target_accept', 'init_radius'):
        value = get_float(values, section, key)
        if value is not None:
            kwargs[key] = value
    return SamplerConfig(**kwargs)


class ConfigReader:
    """Reads a run configuration from an INI file."""

    def __init__(self, path: Union[str, Path]):
        self.path = self._normalize_path(path, default_name='hdprior.ini')

    @staticmethod
    def _normalize_path(path: Union[str, Path], default_name: str) -> Path:
        if isinstance(path, str):
            path = Path(path)
        if path.is_dir():
            path /= default_name
        if not path.exists():
            raise ConfigError('config file not found: {}'.format(path))
        return path.resolve()

    def _resolve(self, raw: str) -> Path:
        return resolve_path(self.path.parent, raw)

    @cached_property
    def parser(self) -> ConfigParser:
        parser = ConfigParser(interpolation=None)
        try:
            parser.read(str(self.path))
        except ParserError as exc:
            raise ConfigError('cannot parse {}: {}'.format(self.path, exc)) from exc
        return parser

    @cached_property
    def content(self) -> RunConfig:
        sections = {name: dict(self.parser[name]) for name in self.parser.sections()}
        model = sections.pop('model', dict())
        _check_keys(model, 'model', MODEL_KEYS)
        family = model.get('family', 'gaussian').strip()
        if family not in ADMISSIBLE_LINKS:
            raise ConfigError('[model] family {!r} is not one of {}'.format(family, ', '.join(ADMISSIBLE_LINKS)))
        current = model.get('current')
        output = sections.pop('output', dict())
        _check_keys(output, 'output', OUTPUT_KEYS)
        prior = sections.pop('prior', dict())
        if prior and prior.get('type') not in PRIOR_KINDS:
            raise ConfigError('[prior] type must be one of {}'.format(', '.join(PRIOR_KINDS)))

        out = Path(output.get('dir', 'hdprior-out'))
        if not out.is_absolute():
            out = self.path.parent / out
        return RunConfig(
            path=self.path,
            formula=model.get('formula'),
            family=family,
            link=model.get('link') or None,
            current=self._resolve(current) if current else None,
            historical=tuple(self._resolve(p) for p in get_list(model, 'model', 'historical')),
            categorical=get_list(model, 'model', 'categorical'),
            offset=model.get('offset') or None,
            standardize=get_bool(model, 'model', 'standardize'),
            sampler=read_sampler(sections.pop('sampler', dict())),
            prior=prior,
            sections=sections,
            out=out,
            report_original_scale=get_bool(output, 'output', 'report_original_scale'),
        )


def read_config(path: Union[str, Path]) -> RunConfig:
    return ConfigReader(path).content


# prior specs


HYPER_KEYS = ('mu0', 'sigma0', 'alpha0', 'gamma0')
BHM_KEYS = ('meta_mean_mean', 'meta_mean_sd', 'meta_sd_mean', 'meta_sd_sd', 'disp_mean', 'disp_sd',
            'disp_mean_hist', 'disp_sd_hist')
CP_KEYS = ('p_spike', 'spike_mean', 'spike_sd', 'slab_mean', 'slab_sd', 'beta0_mean', 'beta0_sd', 'disp_mean',
           'disp_sd', 'disp_mean_hist', 'disp_sd_hist')
SHAPE_KEYS = ('a0_shape1', 'a0_shape2', 'a0_mean', 'a0_cv')
PRIOR_KEYS = dict(
    initial=HYPER_KEYS,
    pp=HYPER_KEYS + ('a0', ),
    npp=HYPER_KEYS + SHAPE_KEYS + ('grids', ),
    napp=SHAPE_KEYS,
    bhm=BHM_KEYS,
    cp=CP_KEYS,
    leap=HYPER_KEYS + ('components', 'prob_conc'),
    rmap=BHM_KEYS + ('w', ) + tuple('vague_' + k for k in HYPER_KEYS),
)
VECTOR_KEYS = ('mu0', 'sigma0', 'meta_mean_mean', 'meta_mean_sd', 'meta_sd_mean', 'meta_sd_sd', 'beta0_mean',
               'beta0_sd', 'prob_conc')


def _typed(values: Section, keys: Sequence[str], prefix: str = '') -> Dict[str, Any]:
    result = dict()     # type: Dict[str, Any]
    for key in keys:
        getter = get_floats if key in VECTOR_KEYS else get_float
        value = getter(values, 'prior', prefix + key)
        if value is not None:
            result[key] = value
    return result


def _hyper(values: Section, prefix: str = '') -> InitialPriorHyper:
    return InitialPriorHyper(**_typed(values, HYPER_KEYS, prefix))


def _auto_a0s(datasets: Sequence[Dataset]) -> Tuple[float, ...]:
    current, history = datasets[0], datasets[1:]
    if not history:
        raise ConfigError('{} needs historical data'.format(AUTO_A0))
    return tuple(auto_a0(current.n, d.n) for d in history)


def _beta_shapes(values: Section, datasets: Sequence[Dataset]) -> Dict[str, float]:
    mean = values.get('a0_mean', '').strip()
    if not mean:
        return _typed(values, ('a0_shape1', 'a0_shape2'))
    cv = get_float(values, 'prior', 'a0_cv', 1.0)
    if mean == AUTO_A0:
        a0s = _auto_a0s(datasets)
        mean_value = a0s[0]
    else:
        mean_value = get_float(values, 'prior', 'a0_mean')
    shape1, shape2 = solve_beta_hyper(mean_value, cv)
    return dict(a0_shape1=shape1, a0_shape2=shape2)


def build_prior_spec(config: RunConfig, datasets: Sequence[Dataset], kind: Optional[str] = None):
    """Typed prior specification from the [prior] section; `config.a0` overrides a0."""
    values = dict(config.prior)
    kind = kind or values.pop('type', None)
    values.pop('type', None)
    if kind not in PRIOR_KINDS:
        raise ConfigError('[prior] type must be one of {}'.format(', '.join(PRIOR_KINDS)))
    _check_keys(values, 'prior', PRIOR_KEYS[kind])
    if config.a0 is not None:
        values['a0'] = config.a0

    if kind == 'initial':
        return InitialSpec(hyper=_hyper(values))
    if kind == 'pp':
        raw = values.get('a0', '').strip()
        if not raw:
            raise ConfigError('[prior] a0 is required for the power prior')
        a0 = _auto_a0s(datasets) if raw == AUTO_A0 else get_floats(values, 'prior', 'a0')
        return PPSpec(a0=a0, hyper=_hyper(values))
    if kind == 'npp':
        grids = tuple(read_lognc_grid(resolve_path(config.base_dir, p))
                      for p in get_list(values, 'prior', 'grids'))
        return NPPSpec(grids=grids, hyper=_hyper(values), **_beta_shapes(values, datasets))
    if kind == 'napp':
        return NAPPSpec(**_beta_shapes(values, datasets))
    if kind == 'bhm':
        return BHMSpec(**_typed(values, BHM_KEYS))
    if kind == 'cp':
        return CPSpec(**_typed(values, CP_KEYS))
    if kind == 'leap':
        K = get_int(values, 'prior', 'components', 2)
        return LEAPSpec(K=K, prob_conc=get_floats(values, 'prior', 'prob_conc'), hyper=_hyper(values))
    rmap = config.section('rmap')
    w = get_float(rmap, 'rmap', 'w', get_float(values, 'prior', 'w', 0.1))
    return RMAPSpec(w=w, bhm=BHMSpec(**_typed(values, BHM_KEYS)), vague=_hyper(values, prefix='vague_'))


def initial_hyper(config: RunConfig) -> InitialPriorHyper:
    """Initial prior hyperparameters from the [prior] section, whatever its type."""
    return _hyper({k: v for k, v in config.prior.items() if k in HYPER_KEYS})
