"""
The polyhedron domain. Values are affine forms over generators ε_i like in
the zonotope domain, but the generators are constrained by a conjunction φ
of linear constraints instead of the unit box. Bounds are linear programs
over φ, solved exactly with the optimising Simplex.

Generator ε_i is the tableau variable `e{i}`.
"""
import logging

from dataclasses import (
    dataclass,
    field
)
from typing import (
    Optional,
    Tuple
)

from ..errors import (
    DomainError,
    GraphError,
    UnboundedError
)
from ..graph import (
    Affine,
    Max,
    Min,
    Relu,
    Sigmoid,
    sigmoid_bounds,
    Square
)
from ..lra import (
    LinConstraint,
    simplex_optimize,
    Tableau
)
from .interval import (
    iv_add,
    iv_max,
    iv_min,
    iv_run,
    iv_scale,
    iv_square,
    Interval,
    to_box
)
from .zonotope import (
    sigmoid_line,
    zono_affine,
    zono_run,
    Zonotope,
    ZDim
)


Logger = logging.getLogger(__name__)


def gen_var(i):
    return f'e{i}'


def _linear(d, k=1):
    """
    {e_i: k·c_i} over the generators of a form
    """
    return {gen_var(i): k * c for i, c in d.generators().items()}


def lp_bounds(d, t):
    """
    Exact [min, max] of a form subject to the constraints of tableau `t`
    """
    objective = _linear(d)
    if not objective:
        return Interval.point(d.center)
    try:
        lo, _ = simplex_optimize(t, objective, maximize=False, constant=d.center)
        hi, _ = simplex_optimize(t, objective, maximize=True, constant=d.center)
    except UnboundedError as e:
        raise DomainError(f'A generator of {d} is unbounded: {e}')
    return Interval(lo, hi)


class PolyState:
    """
    Generator constraints of a running analysis together with their
    tableau, which grows as transformers add constraints
    """
    def __init__(self, constraints=(), m=0):
        self.constraints = []
        self.tableau     = Tableau()
        self.m           = m
        self.add(constraints)

    def add(self, constraints):
        for c in constraints:
            for var in c.variables:
                if var not in self.tableau:
                    self.tableau.add_var(var)
            self.tableau.add_constraint(c)
            self.constraints.append(c)

    def fresh(self):
        self.m += 1
        return self.m

    def bounds(self, d, hull=None):
        b = lp_bounds(d, self.tableau)
        return b.meet(hull) if hull is not None else b


#%%
def poly_affine(coeffs, bias, dims, phi=()):
    """
    Same as the zonotope affine transformer; φ is unchanged

    Returns
    -------
    (ZDim, φ)
    """
    return zono_affine(coeffs, bias, dims), tuple(phi)


def _relu(s, d, hull=None):
    l, u = s.bounds(d, hull)
    if l >= 0:
        return d
    if u <= 0:
        return ZDim.of(0)

    k = u / (u - l)
    e = gen_var(s.fresh())
    Logger.debug(f'poly_relu: unstable on [{l}, {u}], fresh generator {e}')
    s.add([
        LinConstraint.of({e: 1, **_linear(d, -k)}, '<=', k * (d.center - l)),
        LinConstraint.of({e: 1}, '>=', 0),
        LinConstraint.of({e: 1, **_linear(d, -1)}, '>=', d.center),
    ])
    return ZDim.of(0).with_generator(s.m, 1)


def _sigmoid(s, d, hull=None):
    l, u = s.bounds(d, hull)
    e    = gen_var(s.fresh())
    s.add([
        LinConstraint.of({e: 1}, '>=', sigmoid_bounds(l)[0]),
        LinConstraint.of({e: 1}, '<=', sigmoid_bounds(u)[1]),
    ])
    if l < u:
        lam, lo, hi = sigmoid_line(l, u)
        if lam:
            strip = {e: 1, **_linear(d, -lam)}
            s.add([
                LinConstraint.of(strip, '>=', lo + lam * d.center),
                LinConstraint.of(strip, '<=', hi + lam * d.center),
            ])
    return ZDim.of(0).with_generator(s.m, 1)


def _square(s, d, hull=None):
    sq = iv_square(s.bounds(d, hull))
    e  = gen_var(s.fresh())
    s.add([
        LinConstraint.of({e: 1}, '>=', sq.lo),
        LinConstraint.of({e: 1}, '<=', sq.hi),
    ])
    return ZDim.of(0).with_generator(s.m, 1)


def _fold_max(s, args, hulls, sign):
    """
    max(a, b) = a + relu(b - a) and min(a, b) = a - relu(a - b)
    """
    acc, h = args[0], hulls[0]
    for b, hb in zip(args[1:], hulls[1:]):
        diff = (b - acc) if sign > 0 else (acc - b)
        hd   = None
        if h is not None and hb is not None:
            hd = iv_add(hb, iv_scale(-1, h)) if sign > 0 else iv_add(h, iv_scale(-1, hb))
            h  = iv_max([h, hb]) if sign > 0 else iv_min([h, hb])
        r   = _relu(s, diff, hd)
        acc = acc + r if sign > 0 else acc - r
    return acc


def _node(s, fn, args, hulls=None):
    hulls = hulls or [None] * len(args)
    if isinstance(fn, Affine):
        return zono_affine(fn.coeffs, fn.bias, args)
    if isinstance(fn, Relu):
        return _relu(s, args[0], hulls[0])
    if isinstance(fn, Sigmoid):
        return _sigmoid(s, args[0], hulls[0])
    if isinstance(fn, Square):
        return _square(s, args[0], hulls[0])
    if isinstance(fn, Max):
        return _fold_max(s, args, hulls, 1)
    if isinstance(fn, Min):
        return _fold_max(s, args, hulls, -1)
    raise DomainError(f'No polyhedron transformer for {fn.op}')


def _transform(fn, args, phi, m, hulls=None):
    s   = PolyState(phi, m)
    out = _node(s, fn, args, hulls)
    return out, tuple(s.constraints), s.m


def poly_relu(d, phi, m, hull=None):
    """
    Triangle relaxation of ReLU. An unstable input adds the fresh generator
    ε_{m+1} as the output together with its three faces

        ε_{m+1} <= u·(d - l)/(u - l),  ε_{m+1} >= 0,  ε_{m+1} >= d

    Parameters
    ----------
    d: ZDim
    phi: tuple
        LinConstraints over the generators
    m: int
        Generators in use
    hull: Interval, default=None
        Extra bounds known for d

    Returns
    -------
    (ZDim, φ', m')

    Examples
    --------
    relu^a(⟨0, 1⟩) under -1 <= ε1 <= 1 is ⟨0, 0, 1⟩ with
    ε2 <= (ε1 + 1)/2, ε2 >= 0 and ε2 >= ε1
    """
    return _transform(Relu(), [d], phi, m, [hull])


def poly_sigmoid(d, phi, m, hull=None):
    """
    Sigmoid as a fresh generator boxed by the sigmoid of the input bounds
    and held in the strip between the two parallel lines of the zonotope
    line abstraction
    """
    return _transform(Sigmoid(), [d], phi, m, [hull])


def poly_square(d, phi, m, hull=None):
    return _transform(Square(), [d], phi, m, [hull])


#%%
@dataclass(frozen=True)
class Polyhedron:
    """
    Affine forms over m generators constrained by φ

    `companion` is a zonotope over-approximating the same vector; reported
    bounds are met with it
    """
    dims: Tuple[ZDim, ...]
    m: int
    constraints: Tuple[LinConstraint, ...]
    companion: Optional[Zonotope] = None
    _state: list = field(default_factory=list, compare=False, repr=False)

    @classmethod
    def from_box(cls, box):
        """
        The box as forms mid_i + half_i·ε_i under -1 <= ε_i <= 1
        """
        box = to_box(box)
        z   = Zonotope.from_box(box)
        phi = []
        for i in range(1, len(box) + 1):
            phi.append(LinConstraint.of({gen_var(i): 1}, '>=', -1))
            phi.append(LinConstraint.of({gen_var(i): 1}, '<=', 1))
        return cls(z.dims, z.m, tuple(phi), z)

    def __len__(self):
        return len(self.dims)

    @property
    def tableau(self):
        if not self._state:
            self._state.append(PolyState(self.constraints, self.m))
        return self._state[0].tableau

    def dim_bounds(self, d):
        return lp_bounds(d, self.tableau)

    def bounds(self):
        bounds = [self.dim_bounds(d) for d in self.dims]
        if self.companion is not None:
            bounds = [b.meet(c) for b, c in zip(bounds, self.companion.bounds())]
        return bounds

    def linear_bounds(self, coeffs, constant=0):
        """
        Bounds of Σ c_j·out_j + constant for {j: c_j}
        """
        d = zono_affine(tuple(coeffs.values()), constant, [self.dims[j] for j in coeffs])
        b = self.dim_bounds(d)
        if self.companion is not None:
            b = b.meet(self.companion.linear_bounds(coeffs, constant))
        return b


def poly_bounds(p, j):
    """
    Interval of output dimension j
    """
    return p.bounds()[j]


def poly_run(g, p, hull=None):
    """
    Polyhedron analysis of every node

    Parameters
    ----------
    g: Graph
    p: Polyhedron
        Over the input nodes
    hull: dict, default=None
        {node: Interval} bounds from a looser analysis, met with the LP
        bounds of every nonlinear node's input

    Returns
    -------
    forms: dict
        {node: ZDim}
    state: PolyState
        Accumulated constraints, tableau and generator count
    """
    if len(p.dims) != len(g.inputs):
        raise GraphError(f'expected {len(g.inputs)} input dimensions, got {len(p.dims)}')

    hull  = hull or {}
    state = PolyState(p.constraints, p.m)
    forms = dict(zip(g.inputs, p.dims))
    for v in g.order():
        if v in forms:
            continue
        preds    = g.preds[v]
        forms[v] = _node(state, g.fns[v], [forms[u] for u in preds], [hull.get(u) for u in preds])

    Logger.debug(f'poly_run: {state.m - p.m} fresh generator(s), {len(state.constraints)} constraint(s)')
    return forms, state


def poly_analyze(g, p):
    """
    Polyhedron analysis of a network. When the input carries a zonotope
    companion, the zonotope analysis runs alongside and its node bounds
    tighten every transformer; otherwise the interval analysis of the
    input's bounds does

    Returns
    -------
    Polyhedron
        Over the output nodes with the accumulated constraints
    """
    if p.companion is not None:
        zforms, zm, hull = zono_run(g, p.companion)
        companion = Zonotope(
            tuple(zforms[v] for v in g.outputs),
            zm,
            tuple(hull[v] for v in g.outputs)
        )
    else:
        hull = iv_run(g, p.bounds())
        companion = Zonotope(
            tuple(ZDim.of(hull[v].mid).with_generator(j, hull[v].width / 2) for j, v in enumerate(g.outputs, 1)),
            len(g.outputs),
            tuple(hull[v] for v in g.outputs)
        )

    forms, state = poly_run(g, p, hull)
    out = Polyhedron(
        tuple(forms[v] for v in g.outputs),
        state.m,
        tuple(state.constraints),
        companion
    )
    out._state.append(state)
    return out
