"""
Tests the flattened interval transformers, the loss bounds and their
gradients
"""
from fractions import Fraction

import numpy as np
import pytest

from nnverify.errors import GraphError
from nnverify.graph import (
    Affine,
    dense_network,
    evaluate,
    Graph,
    Relu,
    Square
)
from nnverify.train import (
    affine_af,
    flat_interval_forward,
    ibp_grad,
    mlp_template,
    Params,
    point_forward,
    point_grad,
    relu_af,
    square_af
)


def identity():
    return Params.from_graph(Graph.build({1: (None, []), 2: (Affine((1, )), [1])}, [2]))


def random_params(rng, activation='relu'):
    n_in   = int(rng.integers(1, 4))
    hidden = tuple(int(h) for h in rng.integers(2, 5, size=int(rng.integers(1, 3))))
    return Params.init(mlp_template(n_in, hidden, activation), rng)


def random_box(rng, n, batch=1, radius=0.3):
    x   = rng.normal(size=(batch, n))
    eps = rng.uniform(0, radius, size=(batch, 1))
    return x - eps, x + eps


def kink_distance(params, tape):
    """
    Distance of the forward pass to the nearest point where the flattened
    transformers switch branches
    """
    g    = params.loss
    L, U = tape
    dist = [np.inf]
    for v, fn in g.fns.items():
        if isinstance(fn, Relu):
            u = g.preds[v][0]
            dist += [np.abs(L[u]).min(), np.abs(U[u]).min()]
        elif isinstance(fn, Square):
            u = g.preds[v][0]
            dist += [np.abs(L[u]).min(), np.abs(U[u]).min(), np.abs(np.abs(U[u]) - np.abs(L[u])).min()]
    for s in params.layout.values():
        dist.append(np.abs(params.theta[s][:-1]).min())
    return min(dist)


#%%
def test_flattened_transformers():
    """
    Tests the float transformers on the worked examples
    """
    assert relu_af(-1., 1.) == (0, 1), 'relu^af(-1, 1) should be (0, 1)'
    assert relu_af(2., 3.) == (2, 3)

    lo, hi = square_af(np.array([-2., 2., -3.]), np.array([1., 3., -2.]))
    assert lo.tolist() == [0, 4, 4] and hi.tolist() == [4, 9, 9]

    L = np.array([[5., 20.]])
    U = np.array([[10., 30.]])
    l, u = affine_af(np.array([3., 2.]), 0., L, U)
    assert (l[0], u[0]) == (55, 90), '3x + 2y on [5, 10] x [20, 30] is [55, 90]'

    l, u = affine_af(np.array([-1.]), 0., np.array([[0.]]), np.array([[1.]]))
    assert (l[0], u[0]) == (-1, 0)


def test_identity_loss():
    """
    Tests f(x) = x against y = 0 on [0, 1]: the loss interval is [0, 1]
    """
    lo, hi, _ = flat_interval_forward(identity(), [0.], [1.], 0)
    assert (lo[0], hi[0]) == (0, 1), f'Expected [0, 1], got [{lo[0]}, {hi[0]}]'

    lo, hi, _ = flat_interval_forward(identity(), [0.], [1.], 1)
    assert (lo[0], hi[0]) == (0, 1), 'Against y = 1 the difference lies in [-1, 0]'


def test_point_box():
    """
    Tests a point box gives the concrete loss, which agrees with the exact
    evaluation of the exported network
    """
    rng = np.random.default_rng(1)
    for _ in range(30):
        params = random_params(rng)
        x = rng.normal(size=len(params.template.inputs))
        y = float(rng.integers(0, 2))

        lo, hi, _ = flat_interval_forward(params, x, x, y)
        concrete, _ = point_forward(params, x, y)
        assert lo[0] == hi[0], 'A point box should have a point loss'
        assert abs(hi[0] - concrete[0]) <= 1e-12 * (1 + concrete[0])

        r = evaluate(params.to_graph(), [float(v) for v in x])[0]
        assert abs(float((r - y) ** 2) - hi[0]) <= 1e-9, 'Float loss disagrees with the exported network'


def test_loss_soundness():
    """
    Tests sampled concrete losses never exceed loss_hi
    """
    rng = np.random.default_rng(2)
    for _ in range(100):
        params = random_params(rng, activation=rng.choice(['relu', 'square']))
        lo, hi = random_box(rng, len(params.template.inputs))
        y = float(rng.integers(0, 2))
        loss_lo, loss_hi, _ = flat_interval_forward(params, lo, hi, y)

        Z = rng.uniform(lo, hi, size=(1000, lo.shape[1]))
        Z[0], Z[1] = lo[0], hi[0]
        concrete, _ = point_forward(params, Z, np.full(1000, y))
        slack = 1e-9 * (1 + loss_hi[0])
        assert concrete.max() <= loss_hi[0] + slack, f'Sampled loss {concrete.max()} exceeds {loss_hi[0]}'
        assert concrete.min() >= loss_lo[0] - slack, f'Sampled loss {concrete.min()} is below {loss_lo[0]}'


#%%
def test_gradient_check():
    """
    Tests the analytic gradient of loss_hi against central differences on
    random templates, boxes and labels away from the kinks
    """
    rng, h  = np.random.default_rng(3), 1e-5
    checked = 0
    for _ in range(200):
        params = random_params(rng)
        lo, hi = random_box(rng, len(params.template.inputs))
        y = float(rng.integers(0, 2))

        *_, tape = flat_interval_forward(params, lo, hi, y)
        if kink_distance(params, tape) < 1e-4:
            continue
        checked += 1

        grad = ibp_grad(params, lo, hi, y, tape)
        for k in range(params.size):
            theta = params.theta[k]
            params.theta[k] = theta + h
            up = flat_interval_forward(params, lo, hi, y)[1].mean()
            params.theta[k] = theta - h
            down = flat_interval_forward(params, lo, hi, y)[1].mean()
            params.theta[k] = theta

            fd  = (up - down) / (2 * h)
            err = abs(grad[k] - fd)
            assert err / (abs(grad[k]) + 1e-8) <= 1e-4 or err <= 1e-7, \
                f'Parameter {k}: analytic {grad[k]} vs finite difference {fd}'

    assert checked >= 150, f'Only {checked} instances were away from the kinks'


def test_gradient_by_hand():
    """
    Tests the one-layer network with all-zero parameters on a symmetric box
    against y = 1: the loss bound is (1 - b + Σ|w_i|·e)², so the bias
    derivative is -2 and each weight takes the non-positive branch, -2e
    """
    params = Params.init(mlp_template(2, hidden=()), 0)
    params.theta[:] = 0
    e = 0.5
    grad = ibp_grad(params, [-e, -e], [e, e], 1)
    assert grad.tolist() == [-2 * e, -2 * e, -2], f'Unexpected gradient {grad}'

    grad = ibp_grad(params, [-e, -e], [e, e], 0)
    assert not grad.any(), 'Against y = 0 the loss bound is flat at the zero network'


def test_point_gradient():
    """
    Tests the gradient at a point box is the standard backpropagation one
    """
    rng = np.random.default_rng(4)
    for _ in range(30):
        params = random_params(rng, activation=rng.choice(['relu', 'square']))
        X = rng.normal(size=(8, len(params.template.inputs)))
        y = rng.integers(0, 2, size=8).astype(float)
        assert np.allclose(ibp_grad(params, X, X, y), point_grad(params, X, y), rtol=1e-10, atol=1e-12)


def test_batch_gradient_is_mean():
    rng    = np.random.default_rng(5)
    params = random_params(rng)
    lo, hi = random_box(rng, len(params.template.inputs), batch=6)
    y      = rng.integers(0, 2, size=6).astype(float)

    batch = ibp_grad(params, lo, hi, y)
    each  = np.mean([ibp_grad(params, lo[i], hi[i], y[i]) for i in range(6)], axis=0)
    assert np.allclose(batch, each, rtol=1e-12, atol=1e-14), 'The batch gradient should average the examples'


#%%
def test_params_layout():
    """
    Tests the parameter layout covers every affine node of the template
    """
    template = mlp_template(3, hidden=(4, 2))
    params   = Params.init(template, 7)
    affine   = [v for v, fn in template.fns.items() if isinstance(fn, Affine)]
    assert sorted(params.layout) == affine
    assert params.size == 4 * 4 + 2 * 5 + 1 * 3, 'Coefficients plus a bias per affine node'

    bounds = {v: 1 / np.sqrt(s.stop - s.start - 1) for v, s in params.layout.items()}
    for v, s in params.layout.items():
        assert np.all(np.abs(params.theta[s]) <= bounds[v]), f'Node {v} is initialized outside ±1/√fan_in'

    assert np.array_equal(Params.init(template, 7).theta, params.theta), 'Initialization is seeded'


def test_params_export():
    """
    Tests θ converts to rationals exactly and back
    """
    params = Params.init(mlp_template(2, hidden=(3, )), 11)
    g      = params.to_graph()
    v      = next(iter(params.layout))
    assert g.fns[v].coeffs[0] == Fraction(float(params.theta[params.layout[v]][0])), 'Floats convert exactly'
    assert np.array_equal(Params.from_graph(g).theta, params.theta)


def test_params_errors():
    with pytest.raises(GraphError):
        Params.init(dense_network([[[1, 1]], [[1]]], [[0], [0]], 'sigmoid'))
    with pytest.raises(GraphError):
        Params.init(dense_network([[[1, 1], [1, 0]]], [[0, 0]]))
    with pytest.raises(GraphError):
        flat_interval_forward(identity(), [0., 0.], [1., 1.], 0)
    with pytest.raises(GraphError):
        Params(identity().template, np.zeros(3))
