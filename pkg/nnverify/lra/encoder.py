"""
Encodings of networks and properties as linear real arithmetic formulas.

Each non-input node v gets an output variable `<prefix>.out<v>` and one
input variable `<prefix>.in<v>_<j>` per incoming edge (j is the 1-based
slot). Input nodes only get an output variable. Every network call in a
property uses its own prefix `n<k>` so the namespaces never collide.
"""
import logging
import math

from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Dict,
    NamedTuple,
    Optional,
    Tuple
)

from ..errors import EncodingError
from ..graph import (
    Affine,
    Max,
    Min,
    Relu,
    Sigmoid,
    sigmoid_bounds
)
from ..sat import (
    conj,
    disj,
    Not
)
from .linear import (
    affine_eq,
    LinConstraint
)
from .reluplex import to_reluplex_form
from .smt import (
    Atom,
    atom,
    DefaultDelta,
    lra_nnf,
    to_dnf
)


Logger = logging.getLogger(__name__)

DefaultCuts = tuple(Fraction(c) for c in (-4, -2, -1, 0, 1, 2, 4))

# Sigmoid band limits are snapped outward to this grid to keep Simplex
# coefficients small
BandGrid = 2**20


def out_var(prefix, v):
    return f'{prefix}.out{v}'


def in_var(prefix, v, j):
    return f'{prefix}.in{v}_{j}'


@dataclass(frozen=True)
class NodeVars:
    """
    Variable names of one network call
    """
    prefix: str
    out: Dict[int, str]
    ins: Dict[int, Tuple[str, ...]]

    @classmethod
    def of(cls, g, prefix='n0'):
        out = {v: out_var(prefix, v) for v in g.nodes}
        ins = {v: tuple(in_var(prefix, v, j) for j in range(1, g.arity(v) + 1)) for v in g.nodes}
        return cls(prefix, out, ins)

    @property
    def names(self):
        names = list(self.out.values())
        for group in self.ins.values():
            names.extend(group)
        return names


class Band(NamedTuple):
    """
    One guarded piece of a monotone overapproximation: whenever
    lo <= in <= hi (None is unbounded) then out_lo <= out <= out_hi
    """
    lo: Optional[Fraction]
    hi: Optional[Fraction]
    out_lo: Fraction
    out_hi: Fraction

    def contains(self, x, y):
        inside = (self.lo is None or x >= self.lo) and (self.hi is None or x <= self.hi)
        return inside and self.out_lo <= y <= self.out_hi


def _floor(x):
    return Fraction(math.floor(x * BandGrid), BandGrid)


def _ceil(x):
    return Fraction(math.ceil(x * BandGrid), BandGrid)


def monotone_bands(cuts, lb=0, ub=1, bounds=sigmoid_bounds):
    """
    Splits the real line at the cut points and bounds a monotonically
    increasing function on every piece

    Parameters
    ----------
    cuts: sequence
        Strictly ascending rationals c_1..c_n
    lb, ub: rational
        Range of the function
    bounds: callable, default=sigmoid_bounds
        x -> (lo, hi) enclosing f(x)

    Returns
    -------
    bands: list
        n+1 Band tuples, the first unbounded below and the last above
    """
    cuts = [Fraction(c) for c in cuts]
    if any(a >= b for a, b in zip(cuts, cuts[1:])):
        raise EncodingError(f'Cut points must be strictly ascending, got {[str(c) for c in cuts]}')

    lb, ub = Fraction(lb), Fraction(ub)
    edges  = [None] + cuts + [None]
    bands  = []
    for lo, hi in zip(edges, edges[1:]):
        out_lo = lb if lo is None else max(lb, _floor(bounds(lo)[0]))
        out_hi = ub if hi is None else min(ub, _ceil(bounds(hi)[1]))
        bands.append(Band(lo, hi, out_lo, out_hi))
    return bands


#%%
def encode_sigmoid(v, cuts=DefaultCuts, lb=0, ub=1, prefix='n0', bounds=sigmoid_bounds):
    """
    Sound overapproximation of a monotone activation node: a disjunction of
    closed guarded bands, one per piece between consecutive cut points

    Raises
    ------
    EncodingError
        When the cut points are not strictly ascending
    """
    x = in_var(prefix, v, 1)
    y = out_var(prefix, v)

    pieces = []
    for band in monotone_bands(cuts, lb, ub, bounds):
        parts = []
        if band.lo is not None:
            parts.append(atom({x: 1}, '>=', band.lo))
        if band.hi is not None:
            parts.append(atom({x: 1}, '<=', band.hi))
        parts.append(atom({y: 1}, '>=', band.out_lo))
        parts.append(atom({y: 1}, '<=', band.out_hi))
        pieces.append(conj(*parts))
    return disj(*pieces)


def _select(y, xs, rel):
    """
    out is the input that beats (rel) all others
    """
    pieces = []
    for i, xi in enumerate(xs):
        guards = [atom({xi: 1, xj: -1}, rel, 0) for j, xj in enumerate(xs) if j != i]
        pieces.append(conj(*guards, atom({y: 1, xi: -1}, '=', 0)))
    return disj(*pieces)


def encode_node(v, fn, prefix='n0', cuts=DefaultCuts, arity=None):
    """
    Encodes the relation out(v) = f_v(in_1, ..., in_n) of one node

    Piecewise-linear functions are encoded exactly as a disjunction of
    pieces with closed guards, e.g. relu is
    (in >= 0 ∧ out = in) ∨ (in <= 0 ∧ out = 0). The guards cover the whole
    input space so this is the same relation as the implication form
    (in >= 0 ⇒ out = in) ∧ (in <= 0 ⇒ out = 0) without strict atoms

    Parameters
    ----------
    v: int
    fn: NodeFn
    prefix: str, default='n0'
    cuts: sequence, default=DefaultCuts
        Cut points for sigmoid nodes
    arity: int, default=None
        Number of inputs, required for min and max

    Raises
    ------
    EncodingError
        For square nodes, or min and max without an arity
    """
    if arity is None:
        if isinstance(fn, (Max, Min)):
            raise EncodingError(f'Node {v}: {fn.op} needs its arity')
        arity = len(fn.coeffs) if isinstance(fn, Affine) else 1

    y  = out_var(prefix, v)
    xs = [in_var(prefix, v, j) for j in range(1, arity + 1)]

    if isinstance(fn, Affine):
        return Atom(affine_eq(y, zip(xs, fn.coeffs), fn.bias))

    if isinstance(fn, Relu):
        x = xs[0]
        return disj(
            conj(atom({x: 1}, '>=', 0), atom({y: 1, x: -1}, '=', 0)),
            conj(atom({x: 1}, '<=', 0), atom({y: 1}, '=', 0))
        )

    if isinstance(fn, Max):
        return _select(y, xs, '>=')

    if isinstance(fn, Min):
        return _select(y, xs, '<=')

    if isinstance(fn, Sigmoid):
        return encode_sigmoid(v, cuts, prefix=prefix)

    raise EncodingError(f'Node {v}: {fn.op} is not piecewise linear and cannot be encoded')


def encode_graph(g, prefix='n0', cuts=DefaultCuts):
    """
    φ_G: the conjunction of all node encodings and one equality per edge,
    in_{v,j} = out_u, in edge order

    Parameters
    ----------
    g: Graph
    prefix: str, default='n0'
        Namespace of the variables
    cuts: sequence, default=DefaultCuts
        Cut points for sigmoid nodes

    Examples
    --------
    For v3 = 2·v1 + v2 and v4 = relu(v3) the result is
    φ_v3 ∧ φ_v4 ∧ in3_1 = out1 ∧ in3_2 = out2 ∧ in4_1 = out3
    """
    names = NodeVars.of(g, prefix)
    parts = []
    for v in g.nodes:
        if v in g.fns:
            parts.append(encode_node(v, g.fns[v], prefix, cuts, g.arity(v)))

    for v in g.nodes:
        for j, u in enumerate(g.preds[v], 1):
            parts.append(atom({names.ins[v][j-1]: 1, names.out[u]: -1}, '=', 0))

    return conj(*parts)


def _ties(a, names):
    """
    Equalities binding the property's vector components to a network call
    """
    ties = []
    for i, u in enumerate(a.net.inputs):
        ties.append(LinConstraint.of({f'{a.inp}[{i}]': 1, names.out[u]: -1}, '=', 0))
    for i, w in enumerate(a.net.outputs):
        ties.append(LinConstraint.of({f'{a.out}[{i}]': 1, names.out[w]: -1}, '=', 0))
    return ties


def _precondition(p):
    pre = list(p.precondition_atoms())
    for c in pre:
        if c.strict:
            raise EncodingError(f'Strict precondition atom {c}')
    return pre


def build_vc(p, cuts=DefaultCuts):
    """
    The negated verification condition P ∧ φ_1 ∧ ... ∧ φ_k ∧ ¬Q

    The property holds exactly when the result is unsatisfiable, any model
    is a counterexample candidate for `check_counterexample`

    Parameters
    ----------
    p: Property
    cuts: sequence, default=DefaultCuts

    Returns
    -------
    phi: LraFormula
    """
    parts = [Atom(c) for c in _precondition(p)]
    for k, a in enumerate(p.assign):
        prefix = f'n{k}'
        names  = NodeVars.of(a.net, prefix)
        parts.append(encode_graph(a.net, prefix, cuts))
        parts.extend(Atom(c) for c in _ties(a, names))

    parts.append(lra_nnf(Not(p.post_formula())))
    phi = conj(*parts)
    Logger.debug(f'build_vc: {len(p.assign)} network call(s)')
    return phi


#%%
def _network_constraints(g, prefix, stable=None):
    """
    A network as linear equalities over output variables plus ReLU pairs.
    Max and min go through auxiliary ReLUs:
    max(m, a) = m + relu(a - m) and min(m, a) = m - relu(m - a)
    """
    stable = stable or {}
    names  = NodeVars.of(g, prefix)
    out    = names.out
    cons   = []
    pairs  = []

    for v in g.nodes:
        if v not in g.fns:
            continue
        fn   = g.fns[v]
        args = [out[u] for u in g.preds[v]]

        if isinstance(fn, Affine):
            cons.append(affine_eq(out[v], zip(args, fn.coeffs), fn.bias))

        elif isinstance(fn, Relu):
            phase = stable.get(v)
            if phase == 'active':
                cons.append(LinConstraint.of({out[v]: 1, args[0]: -1}, '=', 0))
                cons.append(LinConstraint.of({args[0]: 1}, '>=', 0))
            elif phase == 'inactive':
                cons.append(LinConstraint.of({out[v]: 1}, '=', 0))
                cons.append(LinConstraint.of({args[0]: 1}, '<=', 0))
            else:
                pairs.append((out[v], args[0]))

        elif isinstance(fn, (Max, Min)):
            sign = 1 if isinstance(fn, Max) else -1
            m    = args[0]
            for k, a in enumerate(args[1:], 1):
                d  = f'{prefix}.aux{v}_{k}d'
                r  = f'{prefix}.aux{v}_{k}r'
                mk = out[v] if k == len(args) - 1 else f'{prefix}.aux{v}_{k}m'
                # d = sign·(a - m), mk = m + sign·relu(d)
                cons.append(LinConstraint.of({d: 1, a: -sign, m: sign}, '=', 0))
                pairs.append((r, d))
                cons.append(LinConstraint.of({mk: 1, m: -1, r: -sign}, '=', 0))
                m = mk

        else:
            raise EncodingError(f'Node {v}: {fn.op} is not supported by Reluplex')

    return cons, pairs, names


def _stable_relus(g, box):
    """
    ReLU nodes whose phase is fixed by interval bounds over the input box
    """
    from ..domains import iv_run

    bounds = iv_run(g, box)
    stable = {}
    for v, fn in g.fns.items():
        if isinstance(fn, Relu):
            pre = bounds[g.preds[v][0]]
            if pre.lo >= 0:
                stable[v] = 'active'
            elif pre.hi <= 0:
                stable[v] = 'inactive'
    return stable


def build_reluplex_vcs(p, tau=5, delta=DefaultDelta, warm_start=False):
    """
    The negated verification condition as Reluplex problems, one per cube of
    the DNF of ¬Q. The property holds when every problem is unsatisfiable

    Parameters
    ----------
    p: Property
    tau: int, default=5
        Split threshold of every problem
    delta: Fraction, default=DefaultDelta
        Shift for strict atoms of ¬Q
    warm_start: bool, default=False
        Replace ReLUs that interval analysis proves stable by their linear
        phase

    Returns
    -------
    problems: list
        ReluplexProblem objects; `relaxed` is set when a strict atom was
        shifted

    Raises
    ------
    EncodingError
        For sigmoid and square nodes
    """
    base  = _precondition(p)
    pairs = []
    for k, a in enumerate(p.assign):
        stable = {}
        if warm_start:
            box = p.input_box(a.inp)
            if box is not None:
                stable = _stable_relus(a.net, box)
                Logger.debug(f'build_reluplex_vcs: n{k} has {len(stable)} stable ReLU(s)')
        cons, prs, names = _network_constraints(a.net, f'n{k}', stable)
        base.extend(cons)
        base.extend(_ties(a, names))
        pairs.extend(prs)

    problems = []
    for cube in to_dnf(Not(p.post_formula())):
        relaxed = any(c.strict for c in cube)
        cons    = base + [c.relax(delta) for c in cube]
        problems.append(to_reluplex_form(cons, pairs, tau, relaxed))

    Logger.debug(f'build_reluplex_vcs: {len(problems)} problem(s), {len(pairs)} ReLU pair(s)')
    return problems
