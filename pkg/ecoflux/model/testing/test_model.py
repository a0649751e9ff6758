import math

import numpy as np
import pytest

from ecoflux.errors import EvaluationError, ModelSyntaxError, ModelValidationError
from ecoflux.model import (
    ERROR,
    MAX_HEIGHT,
    MAX_NESTING,
    BinaryOp,
    Number,
    eval_state,
    fixture_path,
    load_fixture,
    load_model,
    net_balance,
    parse_expr,
    parse_model,
    register_function,
    serialize_model,
    validate_model,
)

MINIMAL = """
[model]
n = 2

[flows]
2<-1 = 0.5

[initial]
1 = 1
"""


def test_precedence_and_power():
    expr = parse_expr('1 + 2*3^2')
    assert expr.evaluate({}) == 19
    assert parse_expr('-2^2').evaluate({}) == -4
    assert parse_expr('2^-1').evaluate({}) == 0.5
    sum_ = BinaryOp('+', Number(1.0), Number(2.0))
    assert parse_expr('(1 + 2)*3') == BinaryOp('*', sum_, Number(3.0))


def test_hallam_flow_expression():
    expr = parse_expr('1*x2*x1/(0.098+x1)')
    assert expr.symbols() == {'x1', 'x2'}
    value = expr.evaluate({'x1': 1.0, 'x2': 1.0, 'x3': 1.0})
    assert value == pytest.approx(0.9107, abs=1e-4)


def test_printed_expressions_reparse_identically():
    for src in ['exp(-(t - 15)^2/2) + 0.1', 'a - (b - c)', '(a/b)/c', '2^3^2', '-x1*x2']:
        expr = parse_expr(src)
        assert parse_expr(str(expr)) == expr


@pytest.mark.parametrize(
    'src, column',
    [('1 + $', 5), ('foo(1)', 1), ('(1 + 2', 7), ('1 +', 4)],
)
def test_syntax_errors_carry_position(src, column):
    with pytest.raises(ModelSyntaxError) as info:
        parse_expr(src, line=3)
    assert info.value.line == 3
    assert info.value.column == column


def random_source(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return f'{rng.uniform(0.5, 2.0):.3f}'
        return str(rng.choice(['x1', 'x2', 't']))
    a = random_source(rng, depth - 1)
    b = random_source(rng, depth - 1)
    form = rng.choice(['+', '-', '*', '/', '^', 'neg', 'call', 'paren'])
    if form in ('+', '-'):
        return f'{a} {form} {b}'
    if form == '*':
        return f'{a}*{b}'
    if form == '/':
        return f'{a}/(1 + abs({b}))'
    if form == '^':
        return f'({a})^2'
    if form == 'neg':
        return f'-{a}'
    if form == 'call':
        return f"{rng.choice(['sin', 'cos', 'abs'])}({a})"
    return f'({a})'


def test_random_expressions_reparse_and_evaluate_identically():
    rng = np.random.default_rng(20261019)
    for _ in range(50):
        expr = parse_expr(random_source(rng, 6))
        again = parse_expr(str(expr))
        assert again == expr
        for _ in range(100):
            env = {
                'x1': rng.uniform(0, 5),
                'x2': rng.uniform(0, 5),
                't': rng.uniform(0, 10),
            }
            assert again.evaluate(env) == expr.evaluate(env)


@pytest.mark.parametrize(
    'src',
    [
        '(' * 5000 + '1' + ')' * 5000,
        '-' * 5000 + '1',
        '2^' * 5000 + '2',
        'sin(' * 5000 + '1' + ')' * 5000,
        ' + '.join(['1'] * 5000),
        '*'.join(['x1'] * 5000),
    ],
)
def test_deep_expressions_are_syntax_errors(src):
    with pytest.raises(ModelSyntaxError, match='levels'):
        parse_expr(src)


def test_nesting_limit():
    inside = MAX_NESTING
    assert parse_expr('(' * inside + '1' + ')' * inside).evaluate({}) == 1
    src = '(' * (inside + 1) + '1' + ')' * (inside + 1)
    with pytest.raises(ModelSyntaxError) as info:
        parse_expr(src, line=4)
    assert info.value.line == 4
    assert info.value.column == inside + 1
    terms = MAX_HEIGHT - 1
    assert parse_expr(' + '.join(['1'] * terms)).evaluate({}) == terms


def test_evaluation_errors():
    with pytest.raises(EvaluationError):
        parse_expr('1/x1').evaluate({'x1': 0.0})
    with pytest.raises(EvaluationError):
        parse_expr('(-1)^0.5').evaluate({})
    with pytest.raises(EvaluationError):
        parse_expr('sqrt(-1)').evaluate({})
    with pytest.raises(EvaluationError):
        parse_expr('y').evaluate({})


def test_registered_function():
    register_function('double', lambda v: 2 * v)
    assert parse_expr('double(x1) + 1').evaluate({'x1': 3.0}) == 7


def test_hippe_fixture():
    model = load_fixture('hippe')
    assert model.n == 2
    assert model.x0 == (3.0, 3.0)
    s = eval_state(model, 0.0, [3.0, 3.0])
    np.testing.assert_allclose(s.F, [[0, 2], [4, 0]])
    np.testing.assert_allclose(s.y, [1, 5])
    np.testing.assert_allclose(s.tau_out, [5, 7])
    np.testing.assert_allclose(net_balance(s), [0, 0], atol=1e-12)
    assert validate_model(model) == []


def test_hallam_fixture():
    model = load_fixture('hallam')
    assert model.n == 3
    assert model.params['d1'] == 2.7
    assert model.params['d2'] == 2.025
    assert model.params['alpha2'] == 0.098
    assert model.params['beta1'] == 2
    assert model.params['beta2'] == 20
    s = eval_state(model, 0.0, [1.0, 1.0, 1.0])
    assert s.F[1, 0] == pytest.approx(1 / 1.098)
    assert model.simulate.t1 == 25
    assert model.simulate.samples == 2001


def test_serialized_model_parses_to_equal_model():
    model = load_fixture('hallam')
    assert parse_model(serialize_model(model)) == model


def test_defaults_and_names():
    src = MINIMAL.replace('n = 2', 'n = 2\nnames = prey, predator')
    model = parse_model(src)
    assert model.names == ('prey', 'predator')
    assert model.x0 == (1.0, 0.0)
    assert model.inputs[0].is_zero()
    assert model.connected(1, 0)
    assert not model.connected(0, 1)
    assert model.simulate.samples == 1001


def test_flows_by_name_and_params():
    src = """
[model]
n = 2
names = a, b

[params]
k = 2
half = k/4

[flows]
b<-a = half*xa_unused
"""
    with pytest.raises(ModelSyntaxError):
        # no [initial] section
        parse_model(src)
    with pytest.raises(ModelValidationError) as info:
        parse_model(src + "\n[initial]\na = 1\n")
    assert any("xa_unused" in str(d) for d in info.value.diagnostics)
    model = parse_model(src.replace('half*xa_unused', 'half*x1') + "\n[initial]\na = k\n")
    assert model.params == {'k': 2.0, 'half': 0.5}
    assert model.x0 == (2.0, 0.0)


@pytest.mark.parametrize(
    'text, line',
    [
        (MINIMAL + "\n[flows]\n1<-2 = 1\n", 11),
        (MINIMAL.replace('2<-1 = 0.5', '2<-1 = 0.5\n2<-1 = 1'), 7),
        (MINIMAL + "\n[extras]\n", 11),
        (MINIMAL.replace('1 = 1', '3 = 1'), 9),
        ("n = 2\n" + MINIMAL, 1),
    ],
)
def test_structural_errors_report_line(text, line):
    with pytest.raises(ModelSyntaxError) as info:
        parse_model(text)
    assert info.value.line == line


def test_validation_diagnostics():
    src = MINIMAL.replace('2<-1 = 0.5', '2<-1 = 0.5\n1<-1 = 1')
    with pytest.raises(ModelValidationError) as info:
        parse_model(src)
    (diagnostic,) = info.value.diagnostics
    assert diagnostic.severity == ERROR
    assert 'self' in diagnostic.message
    assert 'line 7' in diagnostic.location

    negative = MINIMAL.replace('2<-1 = 0.5', '2<-1 = -0.5')
    with pytest.raises(ModelValidationError):
        parse_model(negative)


def test_simulate_section():
    model = parse_model(MINIMAL + "\n[simulate]\nt1 = 5\nsamples = 11\nclip = true\n")
    assert model.simulate.t1 == 5.0
    assert model.simulate.samples == 11
    assert model.simulate.clip is True
    assert math.isinf(model.simulate.max_step)
    with pytest.raises(ModelSyntaxError):
        parse_model(MINIMAL + "\n[simulate]\nsamples = many\n")


def test_fixture_lookup(tmp_path):
    with pytest.raises(ValueError, match='hallam'):
        fixture_path('nonexistent')
    path = tmp_path / 'bad.model'
    path.write_bytes(b'[model]\nn = \xff\n')
    with pytest.raises(ModelSyntaxError):
        load_model(path)
    with pytest.raises(OSError):
        load_model(tmp_path / 'missing.model')
