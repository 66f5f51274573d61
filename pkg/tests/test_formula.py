# built-in
import re

# external
import pytest

# project
from hdprior import ConfigError, Formula, parse_formula


@pytest.mark.parametrize('text, response, terms, intercept', [
    ('y ~ x1 + x2', 'y', ('x1', 'x2'), True),
    ('y~x', 'y', ('x', ), True),
    ('cases ~ 0 + age + trt', 'cases', ('age', 'trt'), False),
    ('y ~ 1 + dose', 'y', ('dose', ), True),
    ('y ~ 1', 'y', (), True),
    ('resp.rate ~ log_dose', 'resp.rate', ('log_dose', ), True),
])
def test_parse(text, response, terms, intercept):
    formula = parse_formula(text)
    assert formula.response == response
    assert formula.terms == terms
    assert formula.intercept is intercept


@pytest.mark.parametrize('text, message', [
    ('y x1 + x2', 'has no ~'),
    ('~ x1', 'position 1'),
    ('y ~ x1 x2', 'expected + at position 8'),
    ('y ~ x1 +', 'expected a term at position 9'),
    ('y ~', 'expected a term'),
    ('y ~ x1 + x1', "duplicate term 'x1' at position 10"),
    ('y ~ x1 * x2', "unexpected '*' at position 8"),
    ('y ~ x1 + 0', "unexpected '0' at position 10"),
    ('y ~ 0', 'neither terms nor an intercept'),
    ('y ~ y', 'also appears as a term'),
])
def test_parse_errors(text, message):
    with pytest.raises(ConfigError, match=re.escape(message)):
        parse_formula(text)


def test_str():
    assert str(parse_formula('y ~ x1 + x2')) == 'y ~ x1 + x2'
    assert str(parse_formula('y ~ 0 + x1')) == 'y ~ 0 + x1'
    assert str(Formula('y', ())) == 'y ~ 1'
