"""
Tests the property language: parsing, region shorthands and concrete
counterexample checking
"""
import dataclasses
import json
import random

from fractions import Fraction

import pytest

from nnverify.errors import (
    PropertyError,
    PropertyParseError
)
from nnverify.graph import (
    dense_network,
    dump_graph
)
from nnverify.lra import (
    Atom,
    LinConstraint
)
from nnverify.props import (
    ClassEquals,
    check_counterexample,
    Counterexample,
    dump_property,
    holds_concretely,
    L2Ball,
    LinfBall,
    parse_property,
    property_from_dict,
    property_to_dict,
    robustness_property,
    run_property,
    SynonymSets
)
from nnverify.sat import (
    And,
    Const
)


F = Fraction

ShiftNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '1', 'inputs': [1]}
    ],
    'outputs': [2]
}

IdentityNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '0', 'inputs': [1]}
    ],
    'outputs': [2]
}


def classifier():
    """
    3 inputs, 2 outputs
    """
    return dense_network([[[1, 0, -1], [0, 1, 1]]], [[0, F(1, 2)]])


def shift_property():
    """
    {x <= 0.1} r <- x + 1 {r <= 1}
    """
    return property_from_dict({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [{'coeffs': {'x': '1'}, 'bias': '-1/10', 'rel': '<='}],
        'assign': [{'out': 'r', 'net': ShiftNet, 'in': 'x'}],
        'post'  : [{'coeffs': {'r': '1'}, 'bias': '-1', 'rel': '<='}]
    })


def near_one_property():
    """
    {|x - 1| <= 0.1} r <- x {r >= 1}
    """
    return property_from_dict({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [{'abs': {'center': ['1'], 'eps': '1/10'}}],
        'assign': [{'out': 'r', 'net': IdentityNet, 'in': 'x'}],
        'post'  : [{'coeffs': {'r': '1'}, 'bias': '-1', 'rel': '>='}]
    })


def test_parse_shift():
    p = shift_property()
    assert p.pre == (LinConstraint.of({'x[0]': 1}, '<=', F(1, 10)), ), f'Unexpected precondition {p.pre}'
    assert p.post == Atom(LinConstraint.of({'r[0]': 1}, '<=', 1)), f'Unexpected postcondition {p.post}'
    assert p.dims == {'x': 1, 'r': 1}


def test_parse_robustness():
    """
    Tests an ℓ∞ ball expands into two atoms per dimension
    """
    p = property_from_dict({
        'inputs': [{'name': 'x', 'dim': 3}],
        'pre'   : [{'linf': {'var': 'x', 'center': ['0', '1/2', '1'], 'eps': '1/10'}}],
        'assign': [{'out': 'r', 'net': 'f', 'in': 'x'}],
        'post'  : [{'class': {'of': 'r', 'label': 2}}]
    }, networks={'f': classifier()})

    assert len(p.pre) == 6, f'Expected 2n = 6 atoms, got {len(p.pre)}'
    assert LinConstraint.of({'x[1]': 1}, '>=', F(2, 5)) in p.pre
    assert LinConstraint.of({'x[1]': 1}, '<=', F(3, 5)) in p.pre
    assert p.post == ClassEquals('r', 2, 2)
    assert p.assign[0].source == 'f'
    assert p.input_box('x') == [(F(-1, 10), F(1, 10)), (F(2, 5), F(3, 5)), (F(9, 10), F(11, 10))]


def test_parse_two_calls():
    """
    Tests a property calling the same network on two inputs
    """
    g = dense_network([[[1, 1]]], [[0]])
    p = property_from_dict({
        'inputs': [{'name': 'x', 'dim': 2}, {'name': 'c', 'dim': 2}],
        'pre'   : [{'linf': {'var': 'x', 'center': ['0', '0'], 'eps': '1'}},
                   {'coeffs': {'c[0]': '1'}, 'rel': '='},
                   {'coeffs': {'c[1]': '1'}, 'rel': '='}],
        'assign': [{'out': 'r1', 'net': 'f', 'in': 'x'},
                   {'out': 'r2', 'net': 'f', 'in': 'c'}],
        'post'  : [{'coeffs': {'r1': '1', 'r2': '-1'}, 'bias': '-1', 'rel': '<='}]
    }, networks={'f': g})

    assert len(p.assign) == 2, 'Both network calls should be kept'
    assert [a.inp for a in p.assign] == ['x', 'c']
    assert not check_counterexample(p, {'x': [F(1, 2), F(1, 2)], 'c': [0, 0]}), 'r1 - r2 = 1 satisfies the postcondition'
    assert check_counterexample(p, {'x': [1, 1], 'c': [0, 0]}), 'r1 - r2 = 2 is a counterexample'


def test_nested_post():
    p = property_from_dict({
        'inputs': [{'name': 'x', 'dim': 2}],
        'post'  : [{'or': [{'coeffs': {'x[0]': '1'}, 'rel': '<'},
                           {'not': {'coeffs': {'x[1]': '1'}, 'rel': '<='}}]},
                   {'and': [{'coeffs': {'x[0]': '1', 'x[1]': '1'}, 'bias': '-5', 'rel': '<='}]}]
    })
    values = lambda a, b: {'x[0]': F(a), 'x[1]': F(b)}
    assert holds_concretely(p.post, values(-1, 0), {})
    assert holds_concretely(p.post, values(1, 1), {})
    assert not holds_concretely(p.post, values(1, 0), {})
    assert not holds_concretely(p.post, values(3, 3), {})


@pytest.mark.parametrize('data, location', [
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'post': [{'coeffs': {'r2': '1'}, 'rel': '<='}]}, 'post[0].coeffs'),
    ({'inputs': [{'name': 'x', 'dim': 2}],
      'pre': [{'coeffs': {'x[2]': '1'}, 'rel': '<='}]}, 'pre[0].coeffs'),
    ({'inputs': [{'name': 'x', 'dim': 2}],
      'pre': [{'linf': {'center': ['0'], 'eps': '1'}}]}, 'pre[0].linf.center'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'pre': [{'coeffs': {'x': '1'}, 'rel': '<'}]}, 'pre[0]'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'pre': [{'coeffs': {'x': '1'}, 'rel': '!='}]}, 'pre[0]'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'pre': [{'coeffs': {'x': '0'}, 'rel': '<='}]}, 'pre[0]'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'pre': [{'coeffs': {'x': '1/0'}, 'rel': '<='}]}, 'pre[0].coeffs.x'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'assign': [{'out': 'r', 'net': 'missing.json', 'in': 'x'}]}, 'assign[0].net'),
    ({'inputs': [{'name': 'x', 'dim': 2}],
      'assign': [{'out': 'r', 'net': IdentityNet, 'in': 'x'}]}, 'assign[0]'),
    ({'inputs': [{'name': 'x', 'dim': 1}],
      'assign': [{'out': 'r', 'net': IdentityNet, 'in': 'x'}],
      'post': [{'class': {'of': 'r', 'label': 2}}]}, 'post[0].class.label'),
    ({'inputs': []}, 'inputs'),
])
def test_parse_errors(data, location, tmp_path):
    """
    Tests parse errors name the offending entry
    """
    with pytest.raises(PropertyParseError) as e:
        property_from_dict(data, base=str(tmp_path))
    assert e.value.location == location, f'Expected location {location}, got {e.value.location}'


def test_parse_invalid_json():
    with pytest.raises(PropertyParseError):
        parse_property('{"inputs": [')


def test_check_counterexample():
    """
    Tests the worked counterexample examples
    """
    p   = shift_property()
    cex = check_counterexample(p, {'x': [F(1, 10)]})
    assert isinstance(cex, Counterexample), 'x = 0.1 gives r = 1.1 > 1'
    assert cex.vectors['r'] == [F(11, 10)]
    assert not check_counterexample(p, {'x': [0]}), 'x = 0 gives r = 1'

    p   = near_one_property()
    assert check_counterexample(p, {'x': [F(99, 100)]}), 'x = 0.99 is inside the precondition with r < 1'

    out = check_counterexample(p, {'x': [F(3, 2)]})
    assert not out and 'precondition' in out.reason, f'x = 1.5 breaks the precondition, got {out}'


def test_run_property_errors():
    p = shift_property()
    with pytest.raises(PropertyError):
        run_property(p, {})
    with pytest.raises(PropertyError):
        run_property(p, {'x': [0, 1]})


def test_expansion_equivalence():
    """
    Tests the expanded atoms of an ℓ∞ ball agree with the ball on random
    points
    """
    rng  = random.Random(1)
    ball = LinfBall('x', (F(1, 2), F(-1)), F(1, 4))
    atoms = ball.atoms()
    for _ in range(500):
        x = [F(rng.randint(-12, 12), 8) for _ in range(2)]
        values = {'x[0]': x[0], 'x[1]': x[1]}
        assert ball.contains(x) == all(c.holds(values) for c in atoms), f'Disagreement at {x}'


def test_regions():
    """
    Tests the exact region checks and their bounding boxes
    """
    rng  = random.Random(2)
    ball = L2Ball('x', (F(0), F(0)), F(1))
    assert ball.contains([F(3, 5), F(4, 5)]), 'A point on the circle is inside'
    assert not ball.contains([F(4, 5), F(4, 5)])
    assert ball.box() == [(-1, 1), (-1, 1)]
    for _ in range(200):
        x = [F(rng.randint(-10, 10), 10) for _ in range(2)]
        if ball.contains(x):
            assert all(lo <= xi <= hi for xi, (lo, hi) in zip(x, ball.box())), 'The box misses a ball point'

    syn = SynonymSets('w', ((F(1), F(3)), (F(5), )))
    assert syn.box() == [(1, 3), (5, 5)]
    assert syn.points() == [(1, 5), (3, 5)]
    assert syn.contains([3, 5]) and not syn.contains([2, 5])


def test_class_equals():
    c = ClassEquals('r', 2, 3)
    assert c.desugar() == And(
        Atom(LinConstraint.of({'r[1]': 1, 'r[0]': -1}, '>', 0)),
        Atom(LinConstraint.of({'r[1]': 1, 'r[2]': -1}, '>', 0))
    )
    assert holds_concretely(c, {}, {'r': [0, 2, 1]})
    assert not holds_concretely(c, {}, {'r': [2, 2, 1]}), 'A tie is not a classification'
    assert not holds_concretely(c, {}, {'r': [0, 2, 2]}), 'A tie is not a classification'
    assert holds_concretely(Const(True), {}, {})


def test_robustness_property():
    g = classifier()
    p = robustness_property(g, [0, 1, 0], F(1, 10))
    assert p.post == ClassEquals('r', 2, 2), 'The label defaults to the class of the center'
    assert len(p.pre) == 6 and not p.regions

    p = robustness_property(g, [0, 1, 0], F(1, 10), label=1, norm='l2')
    assert p.post == ClassEquals('r', 1, 2)
    assert p.regions == (L2Ball('x', (0, 1, 0), F(1, 10)), ) and not p.pre
    assert p.input_box('x') == [(F(-1, 10), F(1, 10)), (F(9, 10), F(11, 10)), (F(-1, 10), F(1, 10))]

    with pytest.raises(PropertyError):
        robustness_property(g, [0, 1], 1)
    with pytest.raises(PropertyError):
        robustness_property(g, [0, 1, 0], 1, norm='l1')


def test_input_box():
    p = property_from_dict({
        'inputs': [{'name': 'x', 'dim': 2}],
        'pre'   : [{'coeffs': {'x[0]': '-2'}, 'bias': '1', 'rel': '<='},
                   {'coeffs': {'x[0]': '1'}, 'bias': '-3', 'rel': '<='},
                   {'coeffs': {'x[0]': '1', 'x[1]': '1'}, 'rel': '<='}]
    })
    assert p.input_box('x') is None, 'x[1] is unbounded'
    assert p.input_box('y') is None

    p = property_from_dict({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [{'coeffs': {'x': '-2'}, 'bias': '1', 'rel': '<='},
                   {'coeffs': {'x': '1'}, 'bias': '-3', 'rel': '<='}]
    })
    assert p.input_box('x') == [(F(1, 2), 3)], 'Negative coefficients flip the bound'


def test_round_trip(tmp_path):
    """
    Tests written properties parse back to the same property
    """
    dump_graph(classifier(), str(tmp_path / 'net.json'))
    text = json.dumps({
        'inputs': [{'name': 'x', 'dim': 3}],
        'pre'   : [{'linf': {'center': ['0', '1/2', '1'], 'eps': '1/10'}},
                   {'l2': {'center': ['0', '1/2', '1'], 'eps': '1/5'}},
                   {'coeffs': {'x[0]': '1', 'x[2]': '-1'}, 'bias': '1/3', 'rel': '>='}],
        'assign': [{'out': 'r', 'net': 'net.json', 'in': 'x'}],
        'post'  : [{'class': {'of': 'r', 'label': 1}},
                   {'not': {'coeffs': {'r[1]': '1'}, 'rel': '='}}]
    })
    (tmp_path / 'p.json').write_text(text)

    p = parse_property(str(tmp_path / 'p.json'))
    dump_property(p, str(tmp_path / 'copy.json'))
    assert parse_property(str(tmp_path / 'copy.json')) == p, 'Round trip through a file changed the property'

    inline = dataclasses.replace(p, assign=(dataclasses.replace(p.assign[0], source=None), ))
    assert property_to_dict(inline)['assign'][0]['net']['outputs'] == [4, 5], 'Networks without a path are written inline'
    assert property_from_dict(property_to_dict(inline)) == inline, 'Round trip with an inline network changed the property'
