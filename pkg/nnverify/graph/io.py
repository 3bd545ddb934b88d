"""
JSON network format:

```json
{"nodes": [{"id": 1, "op": "input"},
           {"id": 3, "op": "affine", "coeffs": ["2", "1"], "bias": "0", "inputs": [1, 2]},
           {"id": 4, "op": "relu", "inputs": [3]}],
 "outputs": [4]}
```

Rationals are written as "p/q" strings. Floats and decimal strings are
accepted on load and converted exactly.
"""
import logging

from fractions import Fraction

from ..errors import GraphError
from ..utils import (
    load_json,
    save_json,
    to_fraction
)
from .graph import (
    Affine,
    Graph,
    Max,
    Min,
    Relu,
    Sigmoid,
    Square
)


Logger = logging.getLogger(__name__)

Ops = {
    'relu'   : Relu,
    'sigmoid': Sigmoid,
    'square' : Square,
    'min'    : Min,
    'max'    : Max
}


def graph_from_dict(data):
    """
    Builds and validates a Graph from the parsed JSON structure
    """
    if not isinstance(data, dict) or 'nodes' not in data or 'outputs' not in data:
        raise GraphError('network JSON needs "nodes" and "outputs"')

    nodes = {}
    for i, spec in enumerate(data['nodes']):
        try:
            v  = int(spec['id'])
            op = spec.get('op', 'input')
        except (KeyError, TypeError, ValueError) as e:
            raise GraphError(f'nodes[{i}]: bad node entry ({e})')

        if v in nodes:
            raise GraphError(f'nodes[{i}]: duplicate id {v}')

        inputs = [int(u) for u in spec.get('inputs', [])]
        if op == 'input':
            fn = None
        elif op == 'affine':
            try:
                coeffs = [to_fraction(c) for c in spec.get('coeffs', [])]
                bias   = to_fraction(spec.get('bias', 0))
            except ValueError as e:
                raise GraphError(f'nodes[{i}]: {e}')
            fn = Affine(tuple(coeffs), bias)
        elif op in Ops:
            fn = Ops[op]()
        else:
            raise GraphError(f'nodes[{i}]: unknown op {op!r}')

        nodes[v] = (fn, inputs)

    return Graph.build(nodes, [int(v) for v in data['outputs']]).checked()


def graph_to_dict(g):
    """
    Serializes a Graph into the JSON structure, rationals as strings
    """
    nodes = []
    for v in g.nodes:
        if v not in g.fns:
            nodes.append({'id': v, 'op': 'input'})
            continue

        fn   = g.fns[v]
        spec = {'id': v, 'op': fn.op}
        if isinstance(fn, Affine):
            spec['coeffs'] = [str(c) for c in fn.coeffs]
            spec['bias']   = str(fn.bias)
        spec['inputs'] = list(g.preds[v])
        nodes.append(spec)

    return {'nodes': nodes, 'outputs': list(g.outputs)}


def load_graph(source):
    """
    Loads a network from a JSON file path or raw JSON string
    """
    try:
        data, _ = load_json(source)
    except ValueError as e:
        raise GraphError(f'invalid network JSON ({e})')
    graph = graph_from_dict(data)
    Logger.debug(f'Loaded {graph}')
    return graph


def dump_graph(g, output):
    """
    Writes a network to a JSON file
    """
    save_json(graph_to_dict(g), output)
    Logger.info(f'Wrote network to {output}')


def dense_network(weights, biases, activation='relu'):
    """
    Builds a layered network from weight matrices. Layer k has one affine node
    per row of weights[k], each followed by an activation node except on the
    last layer

    Parameters
    ----------
    weights: list
        weights[k][i][j] is the coefficient from unit j of layer k-1 to unit
        i of layer k
    biases: list
        biases[k][i]
    activation: str, default='relu'
        One of relu, sigmoid

    Returns
    -------
    graph: Graph
    """
    act   = Ops[activation]
    n_in  = len(weights[0][0])
    nodes = {v: (None, []) for v in range(1, n_in + 1)}
    prev  = list(nodes)
    nxt   = n_in + 1

    for k, (W, b) in enumerate(zip(weights, biases)):
        last  = k == len(weights) - 1
        layer = []
        for row, bias in zip(W, b):
            nodes[nxt] = (Affine(tuple(Fraction(c) for c in row), Fraction(bias)), list(prev))
            unit = nxt
            nxt += 1
            if not last:
                nodes[nxt] = (act(), [unit])
                unit = nxt
                nxt += 1
            layer.append(unit)
        prev = layer

    return Graph.build(nodes, prev).checked()
