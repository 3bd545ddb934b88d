"""
Flattened interval transformers for training.

The interval transformers of affine, ReLU and square nodes are written as
plain float functions of the bound pairs, vectorized over a batch, so the
upper bound of the loss can be differentiated with respect to the weights.
The loss is itself a network: the template's output node is extended by a
label input, the difference to the label and a square node.
"""
import logging

from dataclasses import (
    dataclass,
    field
)
from fractions import Fraction
from typing import (
    Dict,
    NamedTuple
)

import numpy as np

from ..errors import GraphError
from ..graph import (
    Affine,
    dense_network,
    Graph,
    Relu,
    Square
)


Logger = logging.getLogger(__name__)


#%%
def affine_af(c, b, L, U):
    """
    Flattened interval affine transformer

    Parameters
    ----------
    c: np.ndarray
        Coefficients, shape (k, )
    b: float
    L, U: np.ndarray
        Lower and upper bounds of the k arguments, shape (B, k)

    Returns
    -------
    l, u: np.ndarray
        Shape (B, )
    """
    pos = np.maximum(c, 0)
    neg = np.minimum(c, 0)
    return L @ pos + U @ neg + b, U @ pos + L @ neg + b


def relu_af(l, u):
    """
    (max(0, l), max(0, u))
    """
    return np.maximum(l, 0), np.maximum(u, 0)


def square_af(l, u):
    """
    Bounds of x² for x in [l, u]: 0 at the bottom when the interval spans 0
    """
    lo = np.where(l > 0, l * l, np.where(u < 0, u * u, 0.))
    return lo, np.maximum(l * l, u * u)


#%%
def mlp_template(n_in, hidden=(8, ), activation='relu'):
    """
    Layered template with a single output. Its coefficients are placeholders
    for the parameters

    Parameters
    ----------
    n_in: int
    hidden: tuple, default=(8, )
        Hidden layer widths
    activation: str, default='relu'
        relu or square
    """
    sizes   = [n_in, *hidden, 1]
    weights = [[[0] * fan_in for _ in range(fan_out)] for fan_in, fan_out in zip(sizes, sizes[1:])]
    biases  = [[0] * fan_out for fan_out in sizes[1:]]
    return dense_network(weights, biases, activation)


def loss_graph(template):
    """
    The template extended by a label input v_y and the nodes
    d = out - y, loss = d²

    Returns
    -------
    graph: Graph
    label: int
        The label's input node
    """
    label = max(template.nodes) + 1
    diff  = label + 1
    loss  = label + 2
    nodes = {v: (template.fns.get(v), list(template.preds[v])) for v in template.nodes}
    nodes[label] = (None, [])
    nodes[diff]  = (Affine((1, -1)), [template.outputs[0], label])
    nodes[loss]  = (Square(), [diff])
    return Graph.build(nodes, [loss]), label


@dataclass
class Params:
    """
    Flat parameter vector θ of a template. `layout` maps every affine node of
    the template to its slice of θ: the coefficients in slot order followed
    by the bias
    """
    template: Graph
    theta: np.ndarray
    layout: Dict[int, slice] = field(default_factory=dict)
    history: object = None

    def __post_init__(self):
        for v, fn in self.template.fns.items():
            if not isinstance(fn, (Affine, Relu, Square)):
                raise GraphError(f'Node {v}: {fn.op} nodes cannot be trained, use affine, relu and square')
        if len(self.template.outputs) != 1:
            raise GraphError(f'A template needs exactly one output, got {len(self.template.outputs)}')

        if not self.layout:
            self.layout = layout_of(self.template)
        size = sum(s.stop - s.start for s in self.layout.values())
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (size, ):
            raise GraphError(f'The template has {size} parameters, θ has shape {self.theta.shape}')

        self.loss, self.label = loss_graph(self.template)

    @classmethod
    def init(cls, template, rng=None):
        """
        Uniform(-1/√fan_in, 1/√fan_in) for every coefficient and bias

        Parameters
        ----------
        template: Graph
        rng: np.random.Generator or int, default=None
        """
        rng    = np.random.default_rng(rng)
        layout = layout_of(template)
        theta  = np.zeros(sum(s.stop - s.start for s in layout.values()))
        for s in layout.values():
            bound = 1 / np.sqrt(s.stop - s.start - 1)
            theta[s] = rng.uniform(-bound, bound, s.stop - s.start)
        return cls(template, theta, layout)

    @classmethod
    def from_graph(cls, g):
        """
        Parameters read from the coefficients of a network
        """
        layout = layout_of(g)
        theta  = np.zeros(sum(s.stop - s.start for s in layout.values()))
        for v, s in layout.items():
            fn = g.fns[v]
            theta[s] = [float(c) for c in fn.coeffs] + [float(fn.bias)]
        return cls(g, theta, layout)

    @property
    def size(self):
        return self.theta.size

    def copy(self, theta=None):
        return Params(self.template, self.theta.copy() if theta is None else theta, self.layout)

    def coeffs(self, v):
        """
        (coefficients, bias) of an affine node of the loss graph
        """
        if v in self.layout:
            w = self.theta[self.layout[v]]
            return w[:-1], w[-1]
        fn = self.loss.fns[v]
        return np.array([float(c) for c in fn.coeffs]), float(fn.bias)

    def to_graph(self):
        """
        The template with θ written into its affine nodes. Floats are dyadic
        rationals and convert exactly
        """
        nodes = {}
        for v in self.template.nodes:
            fn = self.template.fns.get(v)
            if v in self.layout:
                c, b = self.coeffs(v)
                fn = Affine(tuple(Fraction(float(x)) for x in c), Fraction(float(b)))
            nodes[v] = (fn, list(self.template.preds[v]))
        return Graph.build(nodes, self.template.outputs).checked()


def layout_of(template):
    layout, offset = {}, 0
    for v in template.nodes:
        fn = template.fns.get(v)
        if isinstance(fn, Affine):
            n = len(template.preds[v]) + 1
            layout[v] = slice(offset, offset + n)
            offset += n
    return layout


#%%
class Tape(NamedTuple):
    """
    Bounds of every loss-graph node from a forward pass, each of shape (B, )
    """
    lower: dict
    upper: dict


def _batch(params, lo, hi, y):
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    y  = np.atleast_1d(np.asarray(y, dtype=float))
    n  = len(params.template.inputs)
    if lo.shape != hi.shape or lo.shape[1] != n:
        raise GraphError(f'The template takes {n} inputs, got boxes of shape {lo.shape} and {hi.shape}')
    if y.shape != (lo.shape[0], ):
        raise GraphError(f'Expected {lo.shape[0]} labels, got shape {y.shape}')
    return lo, hi, y


def flat_interval_forward(params, lo, hi, y):
    """
    Interval bounds of the loss over input boxes

    Parameters
    ----------
    params: Params
    lo, hi: np.ndarray
        Box bounds, shape (B, n) or (n, )
    y: np.ndarray
        Labels, shape (B, ) or a scalar

    Returns
    -------
    loss_lo, loss_hi: np.ndarray
        Shape (B, )
    tape: Tape

    Examples
    --------
    The identity template f(x) = x against y = 0 on the box [0, 1] gives the
    loss interval [0, 1]
    """
    lo, hi, y = _batch(params, lo, hi, y)
    g = params.loss

    L = {v: lo[:, k] for k, v in enumerate(params.template.inputs)}
    U = {v: hi[:, k] for k, v in enumerate(params.template.inputs)}
    L[params.label] = U[params.label] = y

    for v in g.order():
        if v in L:
            continue
        fn    = g.fns[v]
        preds = g.preds[v]
        if isinstance(fn, Affine):
            c, b = params.coeffs(v)
            L[v], U[v] = affine_af(c, b, np.stack([L[u] for u in preds], axis=1), np.stack([U[u] for u in preds], axis=1))
        elif isinstance(fn, Relu):
            L[v], U[v] = relu_af(L[preds[0]], U[preds[0]])
        else:
            L[v], U[v] = square_af(L[preds[0]], U[preds[0]])

    out = g.outputs[0]
    return L[out], U[out], Tape(L, U)


def ibp_grad(params, lo, hi, y, tape=None):
    """
    Gradient of the batch mean of loss_hi with respect to θ, by reverse-mode
    differentiation through the flattened transformers.

    Subgradients at kinks take the lower branch: a ReLU has derivative 0 at
    exactly 0, the upper bound of a square follows l when |l| = |u|, and a
    zero coefficient is treated as negative

    Parameters
    ----------
    params: Params
    lo, hi, y
        As for flat_interval_forward
    tape: Tape, default=None
        From a forward pass over the same batch, computed when missing

    Returns
    -------
    grad: np.ndarray
        Same shape as θ
    """
    lo, hi, y = _batch(params, lo, hi, y)
    if tape is None:
        *_, tape = flat_interval_forward(params, lo, hi, y)

    g    = params.loss
    B    = lo.shape[0]
    L, U = tape
    grad = np.zeros_like(params.theta)
    dL   = {v: np.zeros(B) for v in g.nodes}
    dU   = {v: np.zeros(B) for v in g.nodes}
    dU[g.outputs[0]] += 1 / B

    for v in reversed(g.order()):
        if v not in g.fns:
            continue
        fn    = g.fns[v]
        preds = g.preds[v]
        dl, du = dL[v], dU[v]

        if isinstance(fn, Affine):
            c, _ = params.coeffs(v)
            pos  = c > 0
            Ls   = np.stack([L[u] for u in preds], axis=1)
            Us   = np.stack([U[u] for u in preds], axis=1)
            if v in params.layout:
                dc = dl @ np.where(pos, Ls, Us) + du @ np.where(pos, Us, Ls)
                grad[params.layout[v]] += np.append(dc, dl.sum() + du.sum())
            for j, u in enumerate(preds):
                if pos[j]:
                    dL[u] += c[j] * dl
                    dU[u] += c[j] * du
                else:
                    dL[u] += c[j] * du
                    dU[u] += c[j] * dl

        elif isinstance(fn, Relu):
            u = preds[0]
            dL[u] += dl * (L[u] > 0)
            dU[u] += du * (U[u] > 0)

        else:
            u = preds[0]
            l, h  = L[u], U[u]
            upper = np.abs(h) > np.abs(l)
            dU[u] += np.where(upper, 2 * h * du, 0.)
            dL[u] += np.where(upper, 0., 2 * l * du)
            dL[u] += np.where(l > 0, 2 * l * dl, 0.)
            dU[u] += np.where(h < 0, 2 * h * dl, 0.)

    return grad


#%%
def point_forward(params, X, y):
    """
    Concrete loss (f_θ(x) - y)² per example, shape (B, )
    """
    X, _, y = _batch(params, X, X, y)
    g = params.loss
    values = {v: X[:, k] for k, v in enumerate(params.template.inputs)}
    values[params.label] = y
    for v in g.order():
        if v in values:
            continue
        fn    = g.fns[v]
        preds = g.preds[v]
        if isinstance(fn, Affine):
            c, b = params.coeffs(v)
            values[v] = np.stack([values[u] for u in preds], axis=1) @ c + b
        elif isinstance(fn, Relu):
            values[v] = np.maximum(values[preds[0]], 0)
        else:
            values[v] = values[preds[0]] ** 2
    return values[g.outputs[0]], values


def point_grad(params, X, y):
    """
    Standard backpropagation of the batch mean concrete loss
    """
    X, _, y = _batch(params, X, X, y)
    _, values = point_forward(params, X, y)

    g    = params.loss
    grad = np.zeros_like(params.theta)
    back = {v: np.zeros(X.shape[0]) for v in g.nodes}
    back[g.outputs[0]] += 1 / X.shape[0]

    for v in reversed(g.order()):
        if v not in g.fns:
            continue
        fn    = g.fns[v]
        preds = g.preds[v]
        d     = back[v]
        if isinstance(fn, Affine):
            c, _ = params.coeffs(v)
            if v in params.layout:
                dc = d @ np.stack([values[u] for u in preds], axis=1)
                grad[params.layout[v]] += np.append(dc, d.sum())
            for j, u in enumerate(preds):
                back[u] += c[j] * d
        elif isinstance(fn, Relu):
            back[preds[0]] += d * (values[preds[0]] > 0)
        else:
            back[preds[0]] += 2 * values[preds[0]] * d

    return grad
