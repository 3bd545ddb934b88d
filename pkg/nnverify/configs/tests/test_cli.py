"""
Tests the command line through click's CliRunner
"""
import json
import logging

from fractions import Fraction

import pytest

from click.testing import CliRunner

from nnverify import __version__
from nnverify.configs import cli
from nnverify.graph import (
    dense_network,
    dump_graph,
    load_graph
)


ShiftNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '1', 'inputs': [1]}
    ],
    'outputs': [2]
}

DifferenceNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '0', 'inputs': [1]},
        {'id': 3, 'op': 'affine', 'coeffs': ['1'], 'bias': '0', 'inputs': [1]},
        {'id': 4, 'op': 'affine', 'coeffs': ['1', '-1'], 'bias': '0', 'inputs': [2, 3]}
    ],
    'outputs': [4]
}

AdderNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'input'},
        {'id': 3, 'op': 'affine', 'coeffs': ['1', '1'], 'bias': '0', 'inputs': [1, 2]}
    ],
    'outputs': [3]
}


@pytest.fixture(autouse=True)
def restore_logging():
    """
    The commands attach handlers to the root logger, which point at the
    runner's streams
    """
    root     = logging.getLogger()
    handlers = list(root.handlers)
    level    = root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def files(tmp_path):
    """
    Networks, properties and a config written to a temporary directory
    """
    paths = {}
    for name, net in [('shift', ShiftNet), ('difference', DifferenceNet), ('adder', AdderNet)]:
        paths[name] = str(tmp_path / f'{name}.json')
        with open(paths[name], 'w') as file:
            json.dump(net, file)

    paths['separated'] = str(tmp_path / 'separated.json')
    dump_graph(dense_network([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [[0, 0], [0, 0]]), paths['separated'])

    properties = {
        'shift.prop': {
            'inputs': [{'name': 'x', 'dim': 1}],
            'pre'   : [{'coeffs': {'x': '1'}, 'bias': '-1/10', 'rel': '<='}],
            'assign': [{'out': 'r', 'net': 'shift.json', 'in': 'x'}],
            'post'  : [{'coeffs': {'r': '1'}, 'bias': '-1', 'rel': '<='}]
        },
        'difference.prop': {
            'inputs': [{'name': 'x', 'dim': 1}],
            'pre'   : [
                {'coeffs': {'x': '1'}, 'bias': '0', 'rel': '>='},
                {'coeffs': {'x': '1'}, 'bias': '-1', 'rel': '<='}
            ],
            'assign': [{'out': 'r', 'net': 'difference.json', 'in': 'x'}],
            'post'  : [{'coeffs': {'r': '1'}, 'bias': '0', 'rel': '='}]
        }
    }
    for name, data in properties.items():
        paths[name] = str(tmp_path / f'{name}.json')
        with open(paths[name], 'w') as file:
            json.dump(data, file)

    paths['config'] = str(tmp_path / 'config.yml')
    with open(paths['config'], 'w') as file:
        file.write('verify:\n  method: zonotope\n')

    paths['dir'] = tmp_path
    return paths


def invoke(*args):
    return CliRunner().invoke(cli.CLI.group, [str(arg) for arg in args])


def outputs(result):
    """
    JSON documents printed by a command, one per line
    """
    return [json.loads(line) for line in result.output.splitlines() if line.startswith('{')]


#%%
def test_version():
    result = invoke('--version')
    assert result.exit_code == 0 and result.output.strip() == __version__


def test_verify_refuted(files):
    """
    Tests {x <= 0.1} r <- x + 1 {r <= 1} is refuted with a counterexample
    """
    result = invoke('verify', '-p', files['shift.prop'], '--method', 'smt')
    assert result.exit_code == 1, result.output

    verdict, = outputs(result)
    assert verdict['verdict'] == 'refuted' and verdict['property'] == files['shift.prop']
    x = Fraction(verdict['counterexample']['x'][0])
    assert 0 < x <= Fraction(1, 10), f'Counterexample x = {x} is not in (0, 1/10]'


@pytest.mark.parametrize('method, code', [
    ('interval',   2),
    ('zonotope',   0),
    ('polyhedron', 0),
    ('smt',        0),
    ('reluplex',   0)
])
def test_verify_difference(files, method, code):
    """
    Tests x - x = 0 is only proven by the relational domains and the solvers
    """
    result = invoke('verify', '-p', files['difference.prop'], '--method', method)
    assert result.exit_code == code, result.output
    verdict, = outputs(result)
    assert verdict['method'] == method


@pytest.mark.parametrize('method', ['smt', 'reluplex'])
def test_verify_within_margin(files, method):
    """
    Tests a violation smaller than the default delta still exits with 1
    """
    dump_graph(dense_network([[[1]], [[1]]], [[0], [0]]), str(files['dir'] / 'relu.json'))
    prop = files['dir'] / 'near.prop.json'
    prop.write_text(json.dumps({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [
            {'coeffs': {'x': '1'}, 'bias': '0', 'rel': '>='},
            {'coeffs': {'x': '1'}, 'bias': '-1', 'rel': '<='}
        ],
        'assign': [{'out': 'r', 'net': 'relu.json', 'in': 'x'}],
        'post'  : [{'coeffs': {'r': '1'}, 'bias': '-9999999/10000000', 'rel': '<='}]
    }))

    result = invoke('verify', '-p', prop, '--method', method)
    assert result.exit_code == 1, result.output
    verdict, = outputs(result)
    assert verdict['verdict'] == 'refuted', f'r = 1 at x = 1 violates r <= 1 - 1/10^7, got {verdict}'


def test_verify_several(files):
    """
    Tests one refuted property makes the combined exit code 1
    """
    out    = str(files['dir'] / 'out' / 'verdicts.json')
    result = invoke('verify', '-p', files['difference.prop'], '-p', files['shift.prop'], '--method', 'smt', '-o', out)
    assert result.exit_code == 1, result.output
    assert [v['verdict'] for v in outputs(result)] == ['proven', 'refuted']

    with open(out) as file:
        assert [v['verdict'] for v in json.load(file)] == ['proven', 'refuted']


def test_verify_fallback(files):
    """
    Tests an abstract method falls back to the solver on a postcondition over
    the inputs it cannot check
    """
    result = invoke('verify', '-p', files['shift.prop'], '--method', 'interval')
    assert result.exit_code == 3, 'The interval path cannot handle an input without lower bound'

    result = invoke('verify', '-p', files['shift.prop'], '--method', 'interval', '--fallback')
    assert result.exit_code == 1, result.output
    assert outputs(result)[0]['method'] == 'smt'


def test_verify_config(files):
    """
    Tests the config file sets the method and a flag overrides it
    """
    result = invoke('verify', '-c', files['config'], '-p', files['difference.prop'])
    assert result.exit_code == 0, result.output
    assert outputs(result)[0]['method'] == 'zonotope'

    result = invoke('verify', '-c', files['config'], '-p', files['difference.prop'], '--method', 'interval')
    assert result.exit_code == 2
    assert outputs(result)[0]['method'] == 'interval'


def test_verify_robustness(files):
    """
    Tests a robustness query on r = (relu(x0), relu(x1)) around (1, 0)
    """
    result = invoke('verify', '-m', files['separated'], '--center', '1,0', '--eps', '1/4', '--method', 'interval')
    assert result.exit_code == 0, result.output
    verdict, = outputs(result)
    assert verdict['bounds'] == [['3/4', '5/4'], ['0', '1/4']]

    result = invoke('verify', '-m', files['separated'], '--center', '1,0', '--eps', '1/2', '--method', 'interval')
    assert result.exit_code == 2, 'A tie at eps = 1/2 is not a proof'

    result = invoke('verify', '-m', files['separated'], '--center', '1,0', '--eps', '1/4', '--method', 'smt')
    assert result.exit_code == 0, result.output


def test_verify_eps_sweep(files):
    result = invoke('verify', '-m', files['separated'], '--center', '1,0', '--method', 'interval', '--eps-sweep')
    assert result.exit_code == 0, result.output
    found, = outputs(result)
    eps = Fraction(found['eps'])
    assert Fraction(1, 2) - Fraction(32, 100) / 256 <= eps < Fraction(1, 2), f'Largest radius {eps} should approach 1/2'
    assert found['verdict']['verdict'] == 'proven'


def test_verify_usage_errors(files):
    """
    Tests bad invocations exit with 3, leaving 2 to unknown verdicts
    """
    assert invoke('verify', '--method', 'smt').exit_code == 3
    assert invoke('verify', '-p', str(files['dir'] / 'missing.json')).exit_code == 3
    assert invoke('verify', '-p', files['shift.prop'], '-m', files['shift']).exit_code == 3
    assert invoke('verify', '-m', files['separated'], '--center', '1,0').exit_code == 3, '--eps is required'
    assert invoke('verify', '-m', files['separated'], '--center', '1,x', '--eps', '1').exit_code == 3
    assert invoke('verify', '-p', files['shift.prop'], '--delta', '-1').exit_code == 3, 'delta must be positive'


def test_verify_bad_property(files):
    bad = files['dir'] / 'bad.json'
    bad.write_text('{"inputs": [{"name": "x", "dim": 1}], "post": [{"coeffs": {"y": "1"}}]}')
    result = invoke('verify', '-p', str(bad))
    assert result.exit_code == 3
    assert 'Error:' in result.output and 'unbound variable y' in result.output


#%%
def test_eval(files):
    """
    Tests the adder network on (11, 79)
    """
    result = invoke('eval', '-m', files['adder'], '-i', '11,79')
    assert result.exit_code == 0, result.output
    assert outputs(result) == [{'outputs': ['90'], 'class': 1}]

    result = invoke('eval', '-m', files['adder'], '-i', '1/2,1/3', '--all')
    assert outputs(result) == [{'valuation': {'1': '1/2', '2': '1/3', '3': '5/6'}}]


def test_eval_errors(files, monkeypatch):
    result = invoke('eval', '-m', files['adder'], '-i', '1')
    assert result.exit_code == 3, 'Dimension mismatch is an input error'

    def boom(path):
        raise RuntimeError('boom')

    monkeypatch.setattr(cli, 'load_graph', boom)
    result = invoke('eval', '-m', files['adder'], '-i', '1,2')
    assert result.exit_code == 4, 'Unexpected failures exit with 4'


#%%
def test_train_ibp(files):
    """
    Tests training writes a network that loads and verifies, and that the
    run is deterministic for a seed
    """
    model = str(files['dir'] / 'model.json')
    log   = str(files['dir'] / 'train.csv')
    args  = ['train-ibp', '--moons', 60, '--hidden', '4', '--epochs', 3, '--eps', 0.05, '--seed', 2]
    result = invoke(*args, '--out', model, '--log', log, '--robust')
    assert result.exit_code == 0, result.output

    summary, = outputs(result)
    assert summary['epochs'] == 3 and summary['objective'] == 'ibp'
    assert summary['loss_hi'] >= summary['loss'] and 0 <= summary['robust_fraction'] <= 1

    net = load_graph(model)
    assert len(net.inputs) == 2 and len(net.outputs) == 1

    again = str(files['dir'] / 'again.json')
    assert invoke(*args, '--out', again).exit_code == 0
    with open(model) as a, open(again) as b:
        assert json.load(a) == json.load(b), 'Same seed should train the same network'

    result = invoke('verify', '-m', model, '--center', '0,0', '--eps', '1/10', '--method', 'interval')
    assert result.exit_code == 0, 'A single output is trivially its own class'


def test_train_ibp_data(files):
    data = files['dir'] / 'data.csv'
    data.write_text('x0,y\n-1,0\n-0.8,0\n0.9,1\n1.1,1\n')
    model  = str(files['dir'] / 'linear.json')
    result = invoke('train-ibp', '-d', str(data), '--hidden', '', '--epochs', 2, '--batches', 2, '--out', model)
    assert result.exit_code == 3, 'An empty width list does not validate'

    result = invoke('train-ibp', '-d', str(data), '--hidden', '2', '--epochs', 2, '--batches', 2, '--out', model)
    assert result.exit_code == 0, result.output
    assert len(load_graph(model).inputs) == 1


def test_train_ibp_errors(files):
    model = str(files['dir'] / 'model.json')
    assert invoke('train-ibp', '--out', model).exit_code == 3, 'A dataset is required'
    assert invoke('train-ibp', '--moons', 20, '--lr', -1, '--out', model).exit_code == 3
    assert invoke('train-ibp', '--moons', 20, '--hidden', 'a,b', '--out', model).exit_code == 3

    bad = files['dir'] / 'bad.csv'
    bad.write_text('1,2,0\n3,4,5\n')
    assert invoke('train-ibp', '-d', str(bad), '--out', model).exit_code == 3


#%%
def test_config_template():
    result = invoke('config', 'template')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert any(line.startswith('verify:') for line in lines)
    assert any(line.startswith('  method: smt') for line in lines)
    assert any(line.startswith('  sigmoid_cuts: [-4, -2, -1, 0, 1, 2, 4]') for line in lines)


def test_config_validate(files):
    result = invoke('config', 'validate', '-f', files['config'])
    assert result.exit_code == 0 and 'No errors' in result.output

    bad = files['dir'] / 'bad.yml'
    bad.write_text('verify:\n  method: bisection\n  colour: blue\n')
    result = invoke('config', 'validate', '-f', str(bad))
    assert result.exit_code == 3
    assert 'verify.method' in result.output and 'verify.colour: unknown key' in result.output
