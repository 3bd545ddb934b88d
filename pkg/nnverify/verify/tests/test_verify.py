"""
Tests the verification driver: abstractions of the precondition, the class
check, the abstract and solver paths and the radius sweep
"""
import itertools
import json
import random

from fractions import Fraction

import pytest

from nnverify.domains import (
    Box,
    Interval,
    Polyhedron,
    ZDim,
    Zonotope
)
from nnverify.errors import (
    DomainError,
    PropertyError,
    UnsupportedProperty
)
from nnverify.graph import (
    argmax_class,
    dense_network,
    evaluate,
    random_network
)
from nnverify.props import (
    check_counterexample,
    property_from_dict,
    robustness_property
)
from nnverify.utils import dumps
from nnverify.verify import (
    abstract_l2_ball,
    abstract_linf_ball,
    abstract_synonyms,
    check_class,
    Domains,
    eps_sweep,
    run_verification,
    verify,
    verify_many,
    verify_reluplex,
    verify_robustness,
    verify_smt
)


F = Fraction

DifferenceNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '0', 'inputs': [1]},
        {'id': 3, 'op': 'affine', 'coeffs': ['1'], 'bias': '0', 'inputs': [1]},
        {'id': 4, 'op': 'affine', 'coeffs': ['1', '-1'], 'bias': '0', 'inputs': [2, 3]}
    ],
    'outputs': [4]
}

ShiftNet = {
    'nodes': [
        {'id': 1, 'op': 'input'},
        {'id': 2, 'op': 'affine', 'coeffs': ['1'], 'bias': '1', 'inputs': [1]}
    ],
    'outputs': [2]
}


def separated_net():
    """
    r = (relu(x0), relu(x1))
    """
    return dense_network([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [[0, 0], [0, 0]])


def difference_property():
    """
    {0 <= x <= 1} r <- x - x {r = 0}
    """
    return property_from_dict({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [
            {'coeffs': {'x': '1'}, 'bias': '0', 'rel': '>='},
            {'coeffs': {'x': '1'}, 'bias': '-1', 'rel': '<='}
        ],
        'assign': [{'out': 'r', 'net': DifferenceNet, 'in': 'x'}],
        'post'  : [{'coeffs': {'r': '1'}, 'bias': '0', 'rel': '='}]
    })


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


def threshold_property(threshold, post=None):
    """
    Distance d in [55947, 60760] and speed v in [1145, 1200], advisory score
    r = relu(v - d/100) checked against a threshold
    """
    net = dense_network([[[F(-1, 100), 1]], [[1]]], [[0], [0]])
    return property_from_dict({
        'inputs': [{'name': 'x', 'dim': 2}],
        'pre'   : [
            {'coeffs': {'x[0]': '1'}, 'bias': '-55947', 'rel': '>='},
            {'coeffs': {'x[0]': '1'}, 'bias': '-60760', 'rel': '<='},
            {'coeffs': {'x[1]': '1'}, 'bias': '-1145', 'rel': '>='},
            {'coeffs': {'x[1]': '1'}, 'bias': '-1200', 'rel': '<='}
        ],
        'assign': [{'out': 'r', 'net': 'acas', 'in': 'x'}],
        'post'  : post or [{'coeffs': {'r': '1'}, 'bias': str(-threshold), 'rel': '<='}]
    }, networks={'acas': net})


#%%
def test_abstract_linf_ball():
    """
    Tests the ℓ∞ ball is represented exactly in every domain
    """
    box, exact = abstract_linf_ball((0, 0), 1, 'interval')
    assert exact
    assert box.bounds() == [Interval(-1, 1), Interval(-1, 1)]

    z, _ = abstract_linf_ball((0, 0), 1, 'zonotope')
    assert z.dims == (ZDim.of(0, 1, 0), ZDim.of(0, 0, 1)), f'Unexpected zonotope {z.dims}'

    p, _ = abstract_linf_ball((0, 0), 1, 'polyhedron')
    assert isinstance(p, Polyhedron)
    assert p.bounds() == [Interval(-1, 1), Interval(-1, 1)]

    for domain in Domains:
        point, _ = abstract_linf_ball((1, 2), 0, domain)
        assert point.bounds() == [Interval(1, 1), Interval(2, 2)], f'{domain}: eps = 0 should be a point'

    with pytest.raises(DomainError):
        abstract_linf_ball((0, ), -1, 'interval')
    with pytest.raises(DomainError):
        abstract_linf_ball((0, ), 1, 'octagon')


def test_abstract_l2_ball():
    """
    Tests the ℓ2 ball becomes its bounding box and is flagged inexact
    """
    box, exact = abstract_l2_ball((0, 0), 1, 'interval')
    assert not exact, 'The box over-approximates the ball'
    assert box.bounds() == [Interval(-1, 1), Interval(-1, 1)]

    tiny, _ = abstract_l2_ball((3, 4), F(1, 1000), 'interval')
    assert all(b.width == F(2, 1000) for b in tiny.bounds())

    rng = random.Random(5)
    center, eps = (F(1, 2), F(-1, 4)), F(3, 10)
    box, _ = abstract_l2_ball(center, eps, 'interval')
    hits = 0
    while hits < 500:
        x = [c + F(rng.randint(-300, 300), 1000) for c in center]
        if sum((xi - c) ** 2 for xi, c in zip(x, center)) > eps ** 2:
            continue
        hits += 1
        assert all(b.contains(xi) for b, xi in zip(box, x)), f'{x} is in the ball but outside the box'


def test_abstract_synonyms():
    box = abstract_synonyms(({1, 3}, {5}))
    assert box.bounds() == [Interval(1, 3), Interval(5, 5)]

    point = abstract_synonyms(({2}, {F(1, 2)}))
    assert all(b.width == 0 for b in point), 'Singleton sets give a point box'

    sets = ({-1, 0, 2}, {F(1, 3), 1}, {4, 7}, {0, F(-5, 2)})
    box  = abstract_synonyms(sets)
    for x in itertools.product(*sets):
        assert all(b.contains(xi) for b, xi in zip(box, x)), f'Substitution {x} escapes the box'

    with pytest.raises(DomainError):
        abstract_synonyms(({1}, set()))


#%%
def test_check_class_intervals():
    """
    Tests the worked class check: separated intervals prove, overlapping
    ones do not
    """
    out = Box((Interval(F(1, 10), F(2, 10)), Interval(F(3, 10), F(4, 10))))
    v = check_class(out, 2)
    assert v.proven, f'Expected Proven, got {v}'

    out = Box((Interval(F(1, 10), F(2, 10)), Interval(F(15, 100), F(4, 10))))
    v = check_class(out, 2)
    assert v.status == 'unknown', f'Expected Unknown, got {v}'
    assert v.pair == (2, 1), 'The failing pair names the label and the other class'

    with pytest.raises(PropertyError):
        check_class(out, 3)
    with pytest.raises(PropertyError):
        check_class(out, 0)


def test_check_class_ties():
    """
    Tests touching bounds are not a proof
    """
    out = Box((Interval(0, 1), Interval(1, 2)))
    assert check_class(out, 2).status == 'unknown', 'l_y = u_i must not prove'


def test_check_class_zonotope():
    """
    Tests the zonotope check uses the difference of the affine forms
    """
    z = Zonotope((ZDim.of(2, 1), ZDim.of(4, 1, 1)), 2)
    assert check_class(z, 2).proven, 'The difference 2 + ε2 lies in [1, 3]'
    assert check_class(z, 1).pair == (1, 2)

    box = Box(tuple(z.bounds()))
    assert check_class(box, 2).status == 'unknown', 'The bounds [1, 3] and [2, 6] overlap once the correlation is lost'


def test_check_class_polyhedron():
    p = Polyhedron.from_box([(0, 1), (2, 3)])
    assert check_class(p, 2).proven
    assert check_class(p, 1).status == 'unknown'
    assert check_class(p, 1).method == 'polyhedron'


#%%
def test_verify_difference():
    """
    Tests x - x: the interval domain loses the correlation, the relational
    domains keep it
    """
    p = difference_property()
    interval = verify(p, 'interval')
    assert interval.status == 'unknown', 'The interval bounds of x - x are [-1, 1]'
    assert interval.bounds == [Interval(-1, 1)]

    for method in ('zonotope', 'polyhedron'):
        v = verify(p, method)
        assert v.proven, f'{method} should prove x - x = 0'
        assert v.bounds == [Interval(0, 0)]
        assert not v.inexact


def test_verify_robustness_property():
    """
    Tests a well separated ℓ∞ robustness property is proven by every domain
    and by the solvers
    """
    p = robustness_property(separated_net(), (0, 1), F(1, 10))
    for method in Domains:
        v = verify(p, method)
        assert v.proven, f'{method}: {v.reason}'
        assert v.status != 'refuted'

    assert verify_smt(p).proven, 'The verification condition should be unsat'
    assert verify_reluplex(p).proven
    assert verify_reluplex(p, warm_start=True).proven


def test_verify_threshold():
    """
    Tests a threshold property over a large input box
    """
    v = verify(threshold_property(1500), 'interval')
    assert v.proven, f'Expected Proven, got {v.reason}'
    assert v.bounds == [Interval(F(53740, 100), F(64053, 100))], f'Unexpected bounds {v.bounds}'

    p = threshold_property(600)
    assert verify(p, 'interval').status == 'unknown'

    v = verify_smt(p)
    assert v.status == 'refuted', 'd = 55947, v = 1200 gives 640.53 > 600'
    x = v.counterexample['x']
    assert check_counterexample(p, {'x': x}), f'{x} is not a real counterexample'


def test_verify_unsupported():
    """
    Tests shapes the abstract path rejects
    """
    with pytest.raises(UnsupportedProperty):
        verify(shift_property(), 'interval')

    p = threshold_property(0, post=[{'coeffs': {'r': '1', 'x[1]': '-1'}, 'bias': '0', 'rel': '<='}])
    with pytest.raises(UnsupportedProperty):
        verify(p, 'interval')

    with pytest.raises(UnsupportedProperty):
        run_verification(shift_property(), 'zonotope')

    with pytest.raises(PropertyError):
        run_verification(shift_property(), 'bisection')


def test_verify_postcondition_connectives():
    """
    Tests disjunctions and negations are checked by bounds
    """
    post = [{'or': [
        {'not': {'coeffs': {'r': '1'}, 'bias': '-700', 'rel': '>'}},
        {'coeffs': {'r': '1'}, 'bias': '-100', 'rel': '<='}
    ]}]
    assert verify(threshold_property(0, post), 'interval').proven, 'r <= 700 is implied'

    post = [{'or': [
        {'coeffs': {'r': '1'}, 'bias': '-600', 'rel': '<='},
        {'coeffs': {'r': '1'}, 'bias': '-600', 'rel': '>'}
    ]}]
    assert verify(threshold_property(0, post), 'interval').status == 'unknown', 'Neither disjunct holds on the whole box'


#%%
def test_smt_counterexample():
    """
    Tests the solver path returns a validated counterexample
    """
    p = shift_property()
    v = run_verification(p, 'smt')
    assert v.status == 'refuted' and v.exit_code == 1
    x = v.counterexample['x'][0]
    assert 0 < x <= F(1, 10), f'Counterexample x = {x} violates the precondition or the negation'
    assert check_counterexample(p, {'x': [F(1, 10)]}), 'x = 0.1 gives r = 1.1'

    v = run_verification(p, 'reluplex')
    assert v.status == 'refuted'

    v = run_verification(p, 'interval', fallback=True)
    assert v.method == 'smt' and v.status == 'refuted', 'Unsupported shapes fall back to the SMT path'


def relu_bound_property(bound):
    """
    {0 <= x <= 1} r <- relu(x) {r <= bound}
    """
    return property_from_dict({
        'inputs': [{'name': 'x', 'dim': 1}],
        'pre'   : [
            {'coeffs': {'x': '1'}, 'bias': '0', 'rel': '>='},
            {'coeffs': {'x': '1'}, 'bias': '-1', 'rel': '<='}
        ],
        'assign': [{'out': 'r', 'net': 'relu', 'in': 'x'}],
        'post'  : [{'coeffs': {'r': '1'}, 'bias': str(-F(bound)), 'rel': '<='}]
    }, networks={'relu': dense_network([[[1]], [[1]]], [[0], [0]])})


@pytest.mark.parametrize('method, options', [
    ('smt', {}),
    ('reluplex', {}),
    ('reluplex', {'warm_start': True}),
])
def test_solver_counterexample_within_margin(method, options):
    """
    Tests a postcondition violated by less than δ is refuted, while a bound
    the network reaches exactly is proven
    """
    bound = 1 - F(1, 10**7)
    p = relu_bound_property(bound)
    assert check_counterexample(p, {'x': [F(1)]}), 'x = 1 gives r = 1'

    v = run_verification(p, method, **options)
    assert v.status == 'refuted' and v.exit_code == 1, f'{method}: expected refuted, got {v.status} ({v.reason})'
    x = v.counterexample['x'][0]
    assert bound < x <= 1, f'Counterexample x = {x} does not violate r <= {bound}'

    v = run_verification(relu_bound_property(1), method, **options)
    assert v.proven and not v.delta, f'{method}: r <= 1 holds with equality at x = 1 ({v.reason})'

    v = run_verification(difference_property(), method, **options)
    assert v.proven and not v.delta, f'{method}: x - x = 0 should be proven ({v.reason})'


def test_verdict_json():
    v = run_verification(difference_property(), 'zonotope', name='diff')
    data = json.loads(dumps(v.to_dict()))
    assert data['verdict'] == 'proven' and data['method'] == 'zonotope'
    assert data['property'] == 'diff'
    assert data['bounds'] == [['0', '0']]
    assert data['delta'] is False and v.exit_code == 0

    v = run_verification(difference_property(), 'interval')
    assert v.to_dict()['verdict'] == 'unknown' and v.exit_code == 2


#%%
def test_abstract_proof_implies_unsat():
    """
    Tests every abstract proof on random robustness instances agrees with an
    unsat verification condition, and that a proof in the interval domain
    carries over to the relational domains
    """
    rng    = random.Random(41)
    proofs = 0
    for i in range(30):
        g      = random_network(rng=rng, n_in=2, n_out=2, layers=(3, ))
        center = [F(rng.randint(-8, 8), 8) for _ in range(2)]
        result = argmax_class(evaluate(g, center))
        if result.tie:
            continue

        p = robustness_property(g, center, F(1, 40), result.index)
        verdicts = {method: verify(p, method) for method in Domains}
        assert all(v.status != 'refuted' for v in verdicts.values()), 'The abstract path cannot refute'

        if verdicts['interval'].proven:
            assert verdicts['zonotope'].proven, f'Instance {i}: interval proves but zonotope does not'
            assert verdicts['polyhedron'].proven, f'Instance {i}: interval proves but polyhedron does not'
        if verdicts['zonotope'].proven:
            assert verdicts['polyhedron'].proven, f'Instance {i}: zonotope proves but polyhedron does not'

        if any(v.proven for v in verdicts.values()):
            proofs += 1
            assert verify_smt(p).proven, f'Instance {i}: abstract proof but the verification condition is sat'

    assert proofs, 'No instance was proven, the check is vacuous'


def test_verify_robustness_matches_property():
    """
    Tests the direct ball analysis agrees with the property path
    """
    rng = random.Random(13)
    for _ in range(10):
        g      = random_network(rng=rng, n_in=2, n_out=2, layers=(3, ))
        center = [F(rng.randint(-8, 8), 8) for _ in range(2)]
        if argmax_class(evaluate(g, center)).tie:
            continue
        for method in Domains:
            direct = verify_robustness(g, center, F(1, 20), method=method)
            viaprop = verify(robustness_property(g, center, F(1, 20)), method)
            assert direct.status == viaprop.status, f'{method}: {direct.status} vs {viaprop.status}'

    v = verify_robustness(separated_net(), (0, 1), F(1, 10), norm='l2')
    assert v.proven and v.inexact, 'An ℓ2 ball is analyzed through its box'


def test_eps_sweep():
    """
    Tests the sweep finds the radius 1/2 at which relu(x1) and relu(x0)
    start to overlap
    """
    eps, v = eps_sweep(separated_net(), (0, 1), label=2, start=F(1, 100), steps=8)
    assert eps < F(1, 2), 'The radius 1/2 itself must fail, ties do not prove'
    assert F(1, 2) - eps <= F(32, 100) / 2 ** 8, f'Sweep stopped early at {eps}'
    assert v.proven

    eps, v = eps_sweep(separated_net(), (1, 0), label=2, steps=4)
    assert eps == 0 and v is None, 'A misclassified center has no proven radius'

    eps, _ = eps_sweep(separated_net(), (0, 100), label=2, start=1, steps=3)
    assert eps == 4, 'Every doubling proven: the last radius tried is reported'


@pytest.mark.parametrize('jobs', [1, 2])
def test_verify_many(jobs):
    """
    Tests parallel runs give the same verdicts in the same order
    """
    props = [
        ('diff', difference_property()),
        ('shift', shift_property()),
        ('robust', robustness_property(separated_net(), (0, 1), F(1, 10)))
    ]
    verdicts = verify_many(props, jobs=jobs, method='zonotope', fallback=True)
    assert [v.name for v in verdicts] == ['diff', 'shift', 'robust']
    assert [v.status for v in verdicts] == ['proven', 'refuted', 'proven']
    assert all(v.timing >= 0 for v in verdicts)
