# built-in
import re
from dataclasses import dataclass
from typing import Iterator, List, Tuple

# app
from ._exceptions import ConfigError


TOKENS = re.compile(r'(?P<name>[A-Za-z_.][A-Za-z0-9_.]*)|(?P<number>[0-9]+)|(?P<op>[~+])|(?P<space>\s+)|(?P<bad>.)')


@dataclass(frozen=True)
class Formula:
    response: str
    terms: Tuple[str, ...]
    intercept: bool = True

    def __post_init__(self):
        if not self.response:
            raise ConfigError('formula has an empty response')
        if self.response in self.terms:
            raise ConfigError('response {!r} also appears as a term'.format(self.response))
        if len(set(self.terms)) != len(self.terms):
            raise ConfigError('formula terms must be distinct')
        if not self.terms and not self.intercept:
            raise ConfigError('formula has neither terms nor an intercept')

    def __str__(self) -> str:
        rhs = list(self.terms)
        if not self.intercept:
            rhs.insert(0, '0')
        elif not rhs:
            rhs = ['1']
        return '{} ~ {}'.format(self.response, ' + '.join(rhs))


def _tokenize(text: str) -> Iterator[Tuple[str, str, int]]:
    for match in TOKENS.finditer(text):
        kind = match.lastgroup
        if kind == 'space':
            continue
        if kind == 'bad':
            raise ConfigError('unexpected {!r} at position {} in formula {!r}'.format(
                match.group(), match.start() + 1, text))
        yield kind, match.group(), match.start() + 1


def parse_formula(text: str) -> Formula:
    """Parse `response ~ term + term ...`; a leading `0 +` drops the intercept, `1` keeps it."""
    tokens = list(_tokenize(text))
    end = len(text) + 1
    if not any(kind == 'op' and value == '~' for kind, value, _ in tokens):
        raise ConfigError('formula {!r} has no ~'.format(text))
    if not tokens or tokens[0][0] != 'name':
        position = tokens[0][2] if tokens else end
        raise ConfigError('expected a response name at position {} in formula {!r}'.format(position, text))
    response = tokens[0][1]
    if tokens[1][1] != '~':
        raise ConfigError('expected ~ at position {} in formula {!r}'.format(tokens[1][2], text))

    rest = tokens[2:]
    intercept = True
    terms = []     # type: List[str]
    expect_term = True
    for i, (kind, value, position) in enumerate(rest):
        if expect_term:
            if kind == 'name':
                if value in terms:
                    raise ConfigError('duplicate term {!r} at position {} in formula {!r}'.format(
                        value, position, text))
                terms.append(value)
            elif kind == 'number' and value in ('0', '1') and i == 0:
                intercept = value == '1'
            else:
                raise ConfigError('unexpected {!r} at position {} in formula {!r}'.format(value, position, text))
        elif value != '+':
            raise ConfigError('expected + at position {} in formula {!r}'.format(position, text))
        expect_term = not expect_term
    if expect_term:
        position = rest[-1][2] + len(rest[-1][1]) if rest else end
        raise ConfigError('expected a term at position {} in formula {!r}'.format(position, text))
    return Formula(response=response, terms=tuple(terms), intercept=intercept)
