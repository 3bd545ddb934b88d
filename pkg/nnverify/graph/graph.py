"""
Neural networks as data-flow graphs.

A network is a directed acyclic graph whose nodes carry scalar functions.
Input nodes receive the input vector (in node order), every other node v
computes out(v) = f_v(out(u_1), ..., out(u_n)) where u_1..u_n are its
predecessors in slot order. Node ids are dense integers and the fixed total
order on nodes is numeric id order.

Piecewise-linear functions are evaluated exactly over Fractions; sigmoid
nodes fall back to double precision.
"""
import heapq
import logging
import math

from dataclasses import (
    dataclass,
    field
)
from fractions import Fraction
from typing import (
    Dict,
    NamedTuple,
    Optional,
    Tuple
)

from ..errors import GraphError


Logger = logging.getLogger(__name__)


#%%
@dataclass(frozen=True)
class NodeFn:
    """
    Base of the node function variants
    """
    op = ''

    def arity_ok(self, n):
        return n == 1

    def __call__(self, *args):
        raise NotImplementedError

    @property
    def piecewise_linear(self):
        return True


@dataclass(frozen=True)
class Affine(NodeFn):
    coeffs: Tuple[Fraction, ...] = ()
    bias: Fraction = Fraction(0)
    op = 'affine'

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, 'bias', Fraction(self.bias))

    def arity_ok(self, n):
        return n == len(self.coeffs)

    def __call__(self, *args):
        return sum((c * x for c, x in zip(self.coeffs, args)), self.bias)


@dataclass(frozen=True)
class Relu(NodeFn):
    op = 'relu'

    def __call__(self, x):
        return x if x > 0 else x * 0


@dataclass(frozen=True)
class Sigmoid(NodeFn):
    op = 'sigmoid'

    def __call__(self, x):
        return sigmoid(float(x))

    @property
    def piecewise_linear(self):
        return False


@dataclass(frozen=True)
class Square(NodeFn):
    op = 'square'

    def __call__(self, x):
        return x * x

    @property
    def piecewise_linear(self):
        return False


@dataclass(frozen=True)
class Min(NodeFn):
    op = 'min'

    def arity_ok(self, n):
        return n >= 2

    def __call__(self, *args):
        return min(args)


@dataclass(frozen=True)
class Max(NodeFn):
    op = 'max'

    def arity_ok(self, n):
        return n >= 2

    def __call__(self, *args):
        return max(args)


def sigmoid(x):
    """
    Numerically stable logistic function on floats
    """
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def sigmoid_bounds(x):
    """
    Rational (lo, hi) enclosing the exact sigmoid of a rational x. The margin
    covers the rounding of x to a float and a few ulps of evaluation error
    """
    xf  = float(x)
    y   = sigmoid(xf)
    err = 4 * math.ulp(y) + y * (1 - y) * abs(xf) * 2.0**-52 + 2.0**-1074
    lo  = Fraction(y) - Fraction(err)
    hi  = Fraction(y) + Fraction(err)
    return max(lo, Fraction(0)), min(hi, Fraction(1))


#%%
@dataclass(frozen=True)
class Graph:
    """
    Immutable network graph

    Parameters
    ----------
    nodes: tuple
        Node ids in their fixed total order
    preds: dict
        {node: tuple of predecessor ids}; the tuple order is the slot order
        of the node function's arguments. Input nodes map to ()
    fns: dict
        {node: NodeFn} for every non-input node
    inputs: tuple
        V^in, ordered
    outputs: tuple
        V^o, ordered
    """
    nodes: Tuple[int, ...]
    preds: Dict[int, Tuple[int, ...]]
    fns: Dict[int, NodeFn]
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]
    _order: list = field(default_factory=list, compare=False, repr=False)

    @classmethod
    def build(cls, nodes, outputs):
        """
        Builds a graph from a mapping {id: (fn or None, [predecessor ids])}.
        A None function marks an input node. Does not validate
        """
        ids    = tuple(sorted(nodes))
        preds  = {v: tuple(nodes[v][1]) for v in ids}
        fns    = {v: nodes[v][0] for v in ids if nodes[v][0] is not None}
        inputs = tuple(v for v in ids if nodes[v][0] is None)
        return cls(ids, preds, fns, inputs, tuple(outputs))

    @property
    def edges(self):
        """
        Ordered edge list: by target node, then by input slot
        """
        return [(u, v) for v in self.nodes for u in self.preds[v]]

    @property
    def succs(self):
        succs = {v: [] for v in self.nodes}
        for u, v in self.edges:
            succs[u].append(v)
        return succs

    def arity(self, v):
        return len(self.preds[v])

    def order(self):
        """
        Cached deterministic topological order
        """
        if not self._order:
            self._order.extend(topo_order(self))
        return self._order

    def checked(self):
        """
        Returns self if the graph is structurally valid, raises otherwise
        """
        problems = validate_graph(self)
        if problems:
            raise GraphError('Invalid graph: ' + '; '.join(problems))
        return self

    def __repr__(self):
        return f'<Graph (nodes={len(self.nodes)}, edges={len(self.edges)}, inputs={list(self.inputs)}, outputs={list(self.outputs)})>'


class ClassResult(NamedTuple):
    index: int
    tie: bool


#%%
def validate_graph(g):
    """
    Lists every violated structural property of a graph

    Parameters
    ----------
    g: Graph

    Returns
    -------
    problems: list
        Human readable messages, empty when the graph is well formed
    """
    problems = []
    known    = set(g.nodes)

    if not g.inputs:
        problems.append('no input nodes')
    if not g.outputs:
        problems.append('no output nodes')

    for v in g.outputs:
        if v not in known:
            problems.append(f'output {v} is not a node')

    for v in g.nodes:
        for u in g.preds[v]:
            if u not in known:
                problems.append(f'node {v} has an edge from unknown node {u}')
        if v in g.fns:
            fn = g.fns[v]
            if not fn.arity_ok(g.arity(v)):
                problems.append(f'arity mismatch at {v}: {fn.op} with {g.arity(v)} incoming edges')
        elif g.preds[v]:
            problems.append(f'input node {v} has incoming edges')

    # Bail before graph walks if the edge set references missing nodes
    if any(u not in known for v in g.nodes for u in g.preds[v]):
        return problems

    for v in _cycle_nodes(g):
        problems.append(f'cycle at {v}')

    succs = g.succs

    reached = _reach(g.inputs, succs)
    for v in g.nodes:
        if v not in reached:
            problems.append(f'node {v} is unreachable from the inputs')

    alive = _reach([v for v in g.outputs if v in known], g.preds)
    for v in g.nodes:
        if v not in alive:
            problems.append(f'node {v} is dead (reaches no output)')

    return problems


def _reach(start, adjacency):
    seen  = set(start)
    stack = list(start)
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _cycle_nodes(g):
    """
    Nodes left over by Kahn's algorithm that sit on a cycle
    """
    indeg = {v: g.arity(v) for v in g.nodes}
    succs = g.succs
    queue = [v for v in g.nodes if indeg[v] == 0]
    while queue:
        u = queue.pop()
        for w in succs[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)

    left = {v for v in g.nodes if indeg[v] > 0}
    # Report nodes on a cycle rather than everything downstream of one
    return sorted(v for v in left if v in _reach([w for w in succs[v] if w in left], succs))


def topo_order(g):
    """
    Deterministic topological order: Kahn's algorithm taking the smallest
    available node id first

    Raises
    ------
    GraphError
        When the graph contains a cycle
    """
    indeg = {v: g.arity(v) for v in g.nodes}
    succs = g.succs
    heap  = [v for v in g.nodes if indeg[v] == 0]
    heapq.heapify(heap)

    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for w in succs[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)

    if len(order) != len(g.nodes):
        raise GraphError(f'cycle detected at {_cycle_nodes(g)}')
    return order


def run(g, x, order=None):
    """
    Evaluates every node of the graph

    Parameters
    ----------
    g: Graph
    x: sequence
        One value per input node, in node order
    order: list, default=None
        Topological order to evaluate in, defaults to topo_order(g)

    Returns
    -------
    valuation: dict
        {node: out(node)}
    """
    if len(x) != len(g.inputs):
        raise GraphError(f'expected {len(g.inputs)} inputs, got {len(x)}')

    values = dict(zip(g.inputs, x))
    for v in order or g.order():
        if v in values:
            continue
        args = [values[u] for u in g.preds[v]]
        fn   = g.fns[v]
        if not fn.arity_ok(len(args)):
            raise GraphError(f'arity mismatch at {v}')
        values[v] = fn(*args)
    return values


def evaluate(g, x, order=None):
    """
    Runs the network on one input vector and returns the output vector

    Examples
    --------
    >>> g = Graph.build({1: (None, []), 2: (None, []), 3: (Affine((1, 1)), [1, 2])}, [3])
    >>> evaluate(g, [11, 79])
    [Fraction(90, 1)]
    """
    x = [v if isinstance(v, float) else Fraction(v) for v in x]
    values = run(g, x, order)
    return [values[v] for v in g.outputs]


def argmax_class(r):
    """
    Returns the 1-based index of the largest element, the lowest index on ties,
    with a flag telling whether a tie occurred
    """
    if len(r) == 0:
        raise GraphError('class of an empty vector')

    best = 0
    for i in range(1, len(r)):
        if r[i] > r[best]:
            best = i

    tie = any(r[i] == r[best] for i in range(len(r)) if i != best)
    if tie:
        Logger.debug(f'class() tie at index {best + 1} for {list(r)}')
    return ClassResult(best + 1, tie)
