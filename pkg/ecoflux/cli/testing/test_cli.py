import json

import numpy as np
import pytest

from ecoflux.cli import (
    RunConfig,
    SteadySnapshots,
    Table,
    parse_pair,
    parse_window,
    read_csv,
    running_sum,
    write_csv,
)
from ecoflux.cli.commands import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    EXIT_SOLVER,
    build_parser,
    main,
)
from ecoflux.cli.export import sha256
from ecoflux.model import fixture_path

HIPPE = str(fixture_path('hippe'))

STEADY_HIPPE = {
    'x_1': 3.0,
    'x_2': 3.0,
    'z_1': 3.0,
    'z_2': 3.0,
    'y_1': 1.0,
    'y_2': 5.0,
    'f_1_2': 2.0,
    'f_2_1': 4.0,
}


def run_cli(*args):
    return main([*args, '--quiet'])


def test_csv_format(tmp_path):
    table = Table('example')
    table.add('t', [0.0, 0.1])
    table.add('value', [1 / 3, np.nan])
    table.add('label', np.array(['a,b', 'c'], dtype=object))
    path = write_csv(table, tmp_path)
    assert path.read_bytes() == (
        b't,value,label\r\n0,0.33333333333333331,"a,b"\r\n0.10000000000000001,,c\r\n'
    )
    with pytest.raises(ValueError, match='already'):
        table.add('t', [0.0, 1.0])
    with pytest.raises(ValueError, match='rows'):
        table.add('short', [0.0])


def test_simulate_writes_substorages(tmp_path):
    code = run_cli('simulate', HIPPE, '--output', str(tmp_path), '--samples', '11')
    assert code == EXIT_OK
    text = (tmp_path / 'substorages.csv').read_bytes()
    header = text.split(b'\r\n')[0].decode()
    assert header == 't,x_1_0,x_1_1,x_1_2,x_2_0,x_2_1,x_2_2'
    columns = read_csv(tmp_path / 'substorages.csv')
    np.testing.assert_allclose(columns['t'], np.linspace(0, 10, 11))
    np.testing.assert_allclose(columns['x_1_0'], 3 * np.exp(-columns['t']), atol=1e-6)
    storages = read_csv(tmp_path / 'storages.csv')
    np.testing.assert_allclose(storages['y_2'], 5.0, rtol=1e-8)
    assert not (tmp_path / 'manifest.json').exists()


def test_report_manifest_is_deterministic(tmp_path):
    manifests = []
    for name in ('first', 'second'):
        output = tmp_path / name
        code = run_cli('report', HIPPE, '--output', str(output), '--samples', '101')
        assert code == EXIT_OK
        manifests.append((output / 'manifest.json').read_text())
    assert manifests[0] == manifests[1]
    manifest = json.loads(manifests[0])
    listed = {entry['path'] for entry in manifest['files']}
    written = {p.name for p in (tmp_path / 'first').iterdir()} - {'manifest.json'}
    assert listed == written
    for entry in manifest['files']:
        assert sha256(tmp_path / 'first' / entry['path']) == entry['sha256']
    assert manifest['config']['samples'] == 101
    assert 'output' not in manifest['config']
    assert 'interaction_summary.csv' in listed
    assert 'recovery.csv' in listed


def test_validate_writes_nothing(tmp_path):
    output = tmp_path / 'out'
    assert run_cli('validate', HIPPE, '--output', str(output)) == EXIT_OK
    assert not output.exists()


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / 'bad.model'
    bad.write_text('[model]\nn = 2\n\n[flows]\n2<-1 = 1 +\n')
    assert run_cli('validate', str(bad)) == EXIT_INVALID
    assert 'ecoflux: error:' in capsys.readouterr().err

    assert run_cli('validate', str(tmp_path / 'missing.model')) == EXIT_IO

    output = str(tmp_path / 'out')
    code = run_cli('simulate', HIPPE, '--output', output, '--samples', '2')
    assert code == EXIT_INVALID
    code = run_cli('transient', HIPPE, '--output', output, '--path', '1: 1 -> 1')
    assert code == EXIT_INVALID

    # x1 falls through 0.5, where its output intensity is undefined
    undefined = tmp_path / 'undefined.model'
    undefined.write_text(
        '[model]\nn = 2\n\n[flows]\n2<-1 = 1\n\n'
        '[outputs]\n1 = sqrt(x1 - 0.5)\n2 = 1\n\n[initial]\n1 = 1\n'
    )
    assert run_cli('simulate', str(undefined), '--output', output) == EXIT_SOLVER

    deep = tmp_path / 'deep.model'
    nested = '(' * 5000 + '1' + ')' * 5000
    deep.write_text(
        f'[model]\nn = 2\n\n[flows]\n2<-1 = 1\n\n[outputs]\n1 = {nested}\n\n'
        '[initial]\n1 = 1\n'
    )
    assert run_cli('validate', str(deep)) == EXIT_INVALID


@pytest.mark.parametrize(
    'args',
    [
        ['simulate', HIPPE, '--samples', 'many'],
        ['simulate', HIPPE, '--unknown'],
        ['interactions', HIPPE, '--induction', 'some-inputs'],
        ['transient', HIPPE],
        [],
    ],
)
def test_usage_errors_are_invalid_configuration(args, capsys):
    assert main(args) == EXIT_INVALID
    assert 'usage:' in capsys.readouterr().err


@pytest.mark.parametrize('induction', ['all-inputs', 'initial-stocks', 'single-input'])
@pytest.mark.parametrize('basis', ['flow', 'storage'])
def test_interactions_for_every_induction(tmp_path, induction, basis):
    code = run_cli(
        'interactions',
        HIPPE,
        '--induction',
        induction,
        '--basis',
        basis,
        '--samples',
        '101',
        '--output',
        str(tmp_path),
    )
    assert code == EXIT_OK
    header = (tmp_path / 'interactions_1_2.csv').read_bytes().split(b'\r\n')[0]
    assert header.startswith(b't,verdict,strength,shared_donor')
    assert (tmp_path / 'interaction_summary.csv').exists()


def test_discrete_snapshots_of_steady_state():
    grid = np.arange(6.0)
    columns = {'t': grid, **{k: np.full(6, v) for k, v in STEADY_HIPPE.items()}}
    system = SteadySnapshots.from_columns(columns, ('1', '2'))
    expected = np.array([[0, 7 / 3, 2 / 3], [0, 4 / 3, 5 / 3]])
    np.testing.assert_allclose(system.X, np.broadcast_to(expected, system.X.shape))
    np.testing.assert_allclose(system.x, 3.0)
    np.testing.assert_allclose(system.window('system_totals', 1.0, 4.0), [36, 36, 18])
    with pytest.raises(ValueError, match='snapshot time'):
        system.sample_index(0.5)
    with pytest.raises(ValueError, match='no compartment'):
        SteadySnapshots.from_columns({**columns, 'f_3_1': grid}, ('1', '2'))
    with pytest.raises(ValueError, match='negative'):
        SteadySnapshots.from_columns({**columns, 'y_1': -grid}, ('1', '2'))


def test_running_sum_is_left_riemann():
    np.testing.assert_allclose(running_sum([1.0, 2.0, 4.0], [0.0, 1.0, 3.0]), [0, 1, 5])


def test_discrete_indices(tmp_path):
    snapshots = tmp_path / 'snapshots.csv'
    table = Table('snapshots')
    table.add('t', np.arange(6.0))
    for label, value in STEADY_HIPPE.items():
        table.add(label, np.full(6, value))
    write_csv(table, tmp_path)
    output = tmp_path / 'out'
    code = run_cli(
        'indices', HIPPE, '--discrete', str(snapshots), '--output', str(output)
    )
    assert code == EXIT_OK
    effects = read_csv(output / 'effects_d_composite_flow.csv')
    np.testing.assert_allclose(effects['E_2_1'], 1 / 3)
    np.testing.assert_allclose(effects['dE_2_1'][:-1], 0.0, atol=1e-12)
    assert np.isnan(effects['dE_2_1'][-1])
    assert not (output / 'recovery.csv').exists()


def test_config_layers():
    parser = build_parser()
    args = parser.parse_args(
        ['indices', HIPPE, '--pair', '2,1', '--window', '1,2', '--variant', 'd']
    )
    config = RunConfig.from_args(args, environ={'ECOFLUX_THREADS': '3'})
    assert config.threads == 3
    assert config.pairs == ((1, 0),)
    assert config.windows == ((1.0, 2.0),)
    assert config.variants == ('d',)
    settings = config.canonical()
    assert settings['pairs'] == [[2, 1]]
    assert settings['max_step'] == 'inf'
    assert 'threads' not in settings
    with pytest.raises(ValueError, match='ECOFLUX_THREADS'):
        RunConfig.from_args(args, environ={'ECOFLUX_THREADS': 'many'})
    with pytest.raises(ValueError, match='discrete'):
        RunConfig('simulate', HIPPE, discrete='table.csv')


@pytest.mark.parametrize('text', ['1', '1,2,3', '0,1', 'a,b'])
def test_bad_pairs(text):
    with pytest.raises(ValueError):
        parse_pair(text)


def test_windows():
    assert parse_window('12.5, 17.5') == (12.5, 17.5)
    with pytest.raises(ValueError, match='after'):
        parse_window('2,1')
