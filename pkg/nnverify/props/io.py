"""
JSON property format:

```json
{"inputs": [{"name": "x", "dim": 2}],
 "pre":    [{"linf": {"var": "x", "center": ["1/2", "1/2"], "eps": "1/10"}},
            {"coeffs": {"x[0]": "1", "x[1]": "1"}, "bias": "-1", "rel": "<="}],
 "assign": [{"out": "r", "net": "model.json", "in": "x"}],
 "post":   [{"class": {"of": "r", "label": 1}}]}
```

A linear atom means  Σ c·v + bias REL 0.  Pre entries may also be
`abs` (same as `linf`), `l2` and `synonyms` ({"var": "x", "sets": [[...]]}).
Post entries may nest `and`, `or` and `not`; the top-level lists are
conjunctions. A vector of dimension 1 may be referred to without an index.
Network references are paths relative to the property file, names of
networks passed in by the caller, or inline network objects.
"""
import logging
import os
import re

from ..errors import (
    GraphError,
    PropertyParseError
)
from ..graph import (
    graph_from_dict,
    graph_to_dict,
    load_graph
)
from ..lra import (
    Atom,
    LinConstraint
)
from ..sat import (
    And,
    conj,
    disj,
    Not,
    Or
)
from ..utils import (
    load_json,
    save_json,
    to_fraction
)
from .property import (
    Assignment,
    ClassEquals,
    InputVar,
    L2Ball,
    LinfBall,
    Property,
    SynonymSets
)


Logger = logging.getLogger(__name__)

_Name = re.compile(r"^([A-Za-z_][\w']*)(?:\[(\d+)\])?$")


class _Scope:
    """
    Declared vectors and their dimensions while parsing
    """
    def __init__(self):
        self.dims = {}

    def declare(self, name, dim, loc):
        if not _Name.match(name) or '[' in name:
            raise PropertyParseError(f'invalid vector name {name!r}', loc)
        if name in self.dims:
            raise PropertyParseError(f'{name} is declared twice', loc)
        self.dims[name] = dim

    def scalar(self, ref, loc, allowed=None):
        m = _Name.match(str(ref))
        if not m:
            raise PropertyParseError(f'invalid variable {ref!r}', loc)
        name, index = m.group(1), m.group(2)
        if name not in self.dims or (allowed is not None and name not in allowed):
            raise PropertyParseError(f'unbound variable {name}', loc)
        dim = self.dims[name]
        if index is None:
            if dim != 1:
                raise PropertyParseError(f'{name} has dimension {dim} and needs an index', loc)
            index = 0
        index = int(index)
        if index >= dim:
            raise PropertyParseError(f'dimension mismatch: {name}[{index}] but {name} has dimension {dim}', loc)
        return f'{name}[{index}]'

    def vector(self, name, loc, allowed=None):
        if name not in self.dims or (allowed is not None and name not in allowed):
            raise PropertyParseError(f'unbound variable {name}', loc)
        return self.dims[name]


def _rational(value, loc):
    try:
        return to_fraction(value)
    except ValueError as e:
        raise PropertyParseError(str(e), loc)


def _vector(values, dim, loc):
    if not isinstance(values, list):
        raise PropertyParseError('expected a list', loc)
    if len(values) != dim:
        raise PropertyParseError(f'dimension mismatch: expected {dim} values, got {len(values)}', loc)
    return tuple(_rational(v, f'{loc}[{i}]') for i, v in enumerate(values))


def _atom(spec, scope, loc, allowed=None):
    if not isinstance(spec.get('coeffs'), dict) or not spec['coeffs']:
        raise PropertyParseError('a linear atom needs a non-empty "coeffs" object', loc)

    rel = spec.get('rel', '<=')
    if rel not in ('<=', '<', '=', '>=', '>'):
        raise PropertyParseError(f'unknown relation {rel!r}', loc)

    coeffs = {}
    for ref, c in spec['coeffs'].items():
        var = scope.scalar(ref, f'{loc}.coeffs', allowed)
        coeffs[var] = coeffs.get(var, 0) + _rational(c, f'{loc}.coeffs.{ref}')
    bias = _rational(spec.get('bias', 0), f'{loc}.bias')

    c = LinConstraint.of(coeffs, rel, -bias)
    if not c.coeffs:
        raise PropertyParseError('a linear atom needs a nonzero coefficient', loc)
    return c


def _ball(kind, spec, scope, loc, inputs):
    if not isinstance(spec, dict):
        raise PropertyParseError('expected an object', loc)
    var = spec.get('var')
    if var is None:
        if len(inputs) != 1:
            raise PropertyParseError('"var" is required with several inputs', loc)
        var = inputs[0]
    dim    = scope.vector(var, f'{loc}.var', inputs)
    center = _vector(spec.get('center'), dim, f'{loc}.center')
    eps    = _rational(spec.get('eps'), f'{loc}.eps')
    if eps < 0:
        raise PropertyParseError('eps must be nonnegative', f'{loc}.eps')
    return (L2Ball if kind == 'l2' else LinfBall)(var, center, eps)


def _synonyms(spec, scope, loc, inputs):
    if isinstance(spec, list):
        spec = {'sets': spec}
    var = spec.get('var', inputs[0] if len(inputs) == 1 else None)
    if var is None:
        raise PropertyParseError('"var" is required with several inputs', loc)
    dim  = scope.vector(var, f'{loc}.var', inputs)
    sets = spec.get('sets')
    if not isinstance(sets, list) or len(sets) != dim:
        raise PropertyParseError(f'dimension mismatch: expected {dim} synonym sets', f'{loc}.sets')
    parsed = []
    for i, s in enumerate(sets):
        if not isinstance(s, list) or not s:
            raise PropertyParseError('a synonym set must be a non-empty list', f'{loc}.sets[{i}]')
        parsed.append(tuple(sorted({_rational(v, f'{loc}.sets[{i}]') for v in s})))
    return SynonymSets(var, tuple(parsed))


def _post(spec, scope, loc):
    if isinstance(spec, list):
        return conj(*[_post(s, scope, f'{loc}[{i}]') for i, s in enumerate(spec)])
    if not isinstance(spec, dict):
        raise PropertyParseError('expected an object', loc)

    if 'and' in spec:
        return _post(spec['and'], scope, f'{loc}.and')
    if 'or' in spec:
        items = spec['or']
        if not isinstance(items, list):
            raise PropertyParseError('"or" takes a list', loc)
        return disj(*[_post(s, scope, f'{loc}.or[{i}]') for i, s in enumerate(items)])
    if 'not' in spec:
        return Not(_post(spec['not'], scope, f'{loc}.not'))
    if 'class' in spec:
        cls = spec['class']
        of  = cls.get('of')
        dim = scope.vector(of, f'{loc}.class.of')
        try:
            label = int(cls.get('label'))
        except (TypeError, ValueError):
            raise PropertyParseError('the label must be an integer', f'{loc}.class.label')
        if not 1 <= label <= dim:
            raise PropertyParseError(f'label {label} is outside 1..{dim}', f'{loc}.class.label')
        return ClassEquals(of, label, dim)
    return Atom(_atom(spec, scope, loc))


def _network(ref, loc, base, networks):
    try:
        if isinstance(ref, dict):
            return graph_from_dict(ref), None
        if not isinstance(ref, str):
            raise PropertyParseError('a network is a path, a name or an object', loc)
        if ref in networks:
            return networks[ref], ref
        path = ref if os.path.isabs(ref) else os.path.join(base, ref)
        if not os.path.exists(path):
            raise PropertyParseError(f'network file not found: {path}', loc)
        return load_graph(path), ref
    except GraphError as e:
        raise PropertyParseError(str(e), loc)


def property_from_dict(data, base=None, networks=None):
    """
    Builds and validates a Property from the parsed JSON structure

    Parameters
    ----------
    data: dict
    base: str, default=None
        Directory network paths are relative to, the working directory by
        default
    networks: dict, default=None
        {name: Graph} of networks that can be referred to by name
    """
    base     = base or os.getcwd()
    networks = networks or {}
    if not isinstance(data, dict):
        raise PropertyParseError('a property is a JSON object', '$')

    scope  = _Scope()
    inputs = []
    for i, spec in enumerate(data.get('inputs', [])):
        loc = f'inputs[{i}]'
        try:
            name, dim = spec['name'], int(spec.get('dim', 1))
        except (KeyError, TypeError, ValueError):
            raise PropertyParseError('an input needs a "name" and an integer "dim"', loc)
        if dim < 1:
            raise PropertyParseError('dim must be positive', loc)
        scope.declare(name, dim, loc)
        inputs.append(InputVar(name, dim))
    if not inputs:
        raise PropertyParseError('at least one input is required', 'inputs')

    names   = [v.name for v in inputs]
    pre     = []
    regions = []
    for i, spec in enumerate(data.get('pre', [])):
        loc = f'pre[{i}]'
        if not isinstance(spec, dict):
            raise PropertyParseError('expected an object', loc)
        if 'linf' in spec or 'abs' in spec:
            key = 'linf' if 'linf' in spec else 'abs'
            pre.extend(_ball('linf', spec[key], scope, f'{loc}.{key}', names).atoms())
        elif 'l2' in spec:
            regions.append(_ball('l2', spec['l2'], scope, f'{loc}.l2', names))
        elif 'synonyms' in spec:
            regions.append(_synonyms(spec['synonyms'], scope, f'{loc}.synonyms', names))
        else:
            c = _atom(spec, scope, loc, names)
            if c.strict:
                raise PropertyParseError('precondition atoms must be non-strict', loc)
            pre.append(c)

    assign = []
    for i, spec in enumerate(data.get('assign', [])):
        loc = f'assign[{i}]'
        if not isinstance(spec, dict) or not {'out', 'net', 'in'} <= set(spec):
            raise PropertyParseError('an assignment needs "out", "net" and "in"', loc)
        dim = scope.vector(spec['in'], f'{loc}.in')
        net, source = _network(spec['net'], f'{loc}.net', base, networks)
        if len(net.inputs) != dim:
            raise PropertyParseError(f'dimension mismatch: {spec["in"]} has dimension {dim}, the network takes {len(net.inputs)}', loc)
        scope.declare(spec['out'], len(net.outputs), f'{loc}.out')
        assign.append(Assignment(spec['out'], net, spec['in'], source))

    post = _post(data.get('post', []), scope, 'post')

    p = Property(tuple(inputs), tuple(pre), tuple(regions), tuple(assign), post)
    Logger.debug(f'Parsed property: {len(inputs)} input(s), {len(p.precondition_atoms())} precondition atom(s), {len(assign)} network call(s)')
    return p


def parse_property(text, networks=None):
    """
    Parses a property from a JSON file path or a raw JSON string

    Raises
    ------
    PropertyParseError
        With the location of the offending entry
    """
    try:
        data, base = load_json(text)
    except ValueError as e:
        raise PropertyParseError(f'invalid JSON ({e})', '$')
    return property_from_dict(data, base, networks)


def _fmt_atom(c):
    return {'coeffs': {v: str(a) for v, a in c.coeffs}, 'bias': str(-c.bound), 'rel': c.rel}


def _fmt_post(phi):
    if isinstance(phi, ClassEquals):
        return {'class': {'of': phi.of, 'label': phi.label}}
    if isinstance(phi, Atom):
        return _fmt_atom(phi.constraint)
    if isinstance(phi, Not):
        return {'not': _fmt_post(phi.arg)}
    if isinstance(phi, (And, Or)):
        op = 'and' if isinstance(phi, And) else 'or'
        return {op: [_fmt_post(phi.left), _fmt_post(phi.right)]}
    return {'and': []} if phi.value else {'or': []}


def property_to_dict(p):
    """
    Serializes a Property. Networks loaded from files are written as their
    path, all others inline
    """
    pre = [_fmt_atom(c) for c in p.pre]
    for r in p.regions:
        if isinstance(r, L2Ball):
            pre.append({'l2': {'var': r.var, 'center': [str(c) for c in r.center], 'eps': str(r.eps)}})
        elif isinstance(r, LinfBall):
            pre.append({'linf': {'var': r.var, 'center': [str(c) for c in r.center], 'eps': str(r.eps)}})
        else:
            pre.append({'synonyms': {'var': r.var, 'sets': [[str(v) for v in s] for s in r.sets]}})

    return {
        'inputs': [{'name': v.name, 'dim': v.dim} for v in p.inputs],
        'pre'   : pre,
        'assign': [{'out': a.out, 'net': a.source or graph_to_dict(a.net), 'in': a.inp} for a in p.assign],
        'post'  : [_fmt_post(p.post)]
    }


def dump_property(p, output):
    save_json(property_to_dict(p), output)
    Logger.info(f'Wrote property to {output}')

