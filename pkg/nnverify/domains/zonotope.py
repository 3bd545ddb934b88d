"""
The zonotope domain. Every value is an affine form

    c_0 + c_1·ε_1 + ... + c_m·ε_m,   ε_i ∈ [-1, 1]

over generators shared by the whole analysis. Generators are numbered from 1
and fresh ones are appended at the end; a form that never mentions the last
generators simply omits their zero coefficients.
"""
import logging
import math

from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Optional,
    Tuple
)

from ..errors import (
    DomainError,
    GraphError
)
from ..graph import (
    Affine,
    Max,
    Min,
    Relu,
    sigmoid,
    Sigmoid,
    sigmoid_bounds,
    Square
)
from .interval import (
    iv_add,
    iv_affine,
    iv_max,
    iv_min,
    iv_run,
    iv_scale,
    iv_square,
    Interval,
    to_box
)


Logger = logging.getLogger(__name__)

# Grids the sigmoid line abstraction snaps its slope and offsets to
SlopeGrid  = 2**30
OffsetGrid = 2**40


@dataclass(frozen=True)
class ZDim:
    """
    ⟨c_0, c_1, ..., c_k⟩, trailing zero coefficients dropped
    """
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs] or [Fraction(0)]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, 'coeffs', tuple(cs))

    @classmethod
    def of(cls, *coeffs):
        return cls(tuple(coeffs))

    @property
    def center(self):
        return self.coeffs[0]

    @property
    def size(self):
        """
        Index of the last generator with a nonzero coefficient
        """
        return len(self.coeffs) - 1

    def coeff(self, i):
        return self.coeffs[i] if i < len(self.coeffs) else Fraction(0)

    def generators(self):
        """
        {i: c_i} over the nonzero generator coefficients
        """
        return {i: c for i, c in enumerate(self.coeffs[1:], 1) if c}

    def value(self, eps):
        """
        Concrete value for ε = (ε_1, ε_2, ...)
        """
        return self.center + sum((c * eps[i-1] for i, c in self.generators().items()), Fraction(0))

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return ZDim(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    def __neg__(self):
        return ZDim(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return ZDim(tuple(k * c for c in self.coeffs))

    def shift(self, b):
        return ZDim((self.center + b, ) + self.coeffs[1:])

    def with_generator(self, index, c):
        """
        Sets coefficient `index`, padding with zeros
        """
        cs = list(self.coeffs) + [Fraction(0)] * max(0, index + 1 - len(self.coeffs))
        cs[index] = Fraction(c)
        return ZDim(tuple(cs))

    def __str__(self):
        return '⟨' + ', '.join(str(c) for c in self.coeffs) + '⟩'


#%%
def zono_bounds(d):
    """
    [c_0 - Σ|c_i|, c_0 + Σ|c_i|]
    """
    r = sum((abs(c) for c in d.coeffs[1:]), Fraction(0))
    return Interval(d.center - r, d.center + r)


def zono_add(a, b):
    """
    Coefficient-wise sum
    """
    return a + b


def zono_affine(coeffs, bias, dims):
    """
    Σ a_j·d_j + b: coefficient k of the result is Σ a_j·c_jk and the bias
    only moves the center

    Examples
    --------
    3x + 2y on (⟨1, 2, 3⟩, ⟨0, 1, 1⟩) is ⟨3, 8, 11⟩
    """
    if len(coeffs) != len(dims):
        raise DomainError(f'Affine function of arity {len(coeffs)} applied to {len(dims)} forms')
    n   = max((len(d.coeffs) for d in dims), default=1)
    out = [sum((Fraction(a) * d.coeff(k) for a, d in zip(coeffs, dims)), Fraction(0)) for k in range(n)]
    out[0] += Fraction(bias)
    return ZDim(tuple(out))


def _bounds(d, hull):
    b = zono_bounds(d)
    return b.meet(hull) if hull is not None else b


def zono_relu(d, m, hull=None):
    """
    ReLU transformer. Unstable inputs use the parallelogram with slope
    λ = u/(u-l) and one fresh generator

    Parameters
    ----------
    d: ZDim
    m: int
        Generators in use
    hull: Interval, default=None
        Extra bounds known for d, met with its own

    Returns
    -------
    out: ZDim
    m: int
        Generators in use afterwards

    Examples
    --------
    relu^a(⟨0, 1⟩) with one generator is ⟨1/4, 1/2, 1/4⟩
    """
    l, u = _bounds(d, hull)
    if l >= 0:
        return d, m
    if u <= 0:
        return ZDim.of(0), m

    lam = u / (u - l)
    eta = u * (1 - lam) / 2
    Logger.debug(f'zono_relu: unstable on [{l}, {u}], λ = {lam}')
    out = d.scale(lam).shift(eta).with_generator(m + 1, eta)
    return out, m + 1


def _dsigmoid(x):
    s = sigmoid(float(x))
    return s * (1 - s)


def sigmoid_line(l, u):
    """
    Line abstraction of sigmoid on [l, u]: a slope λ no larger than the
    smallest derivative on the interval and offsets (lo, hi) with
    λ·x + lo <= sigmoid(x) <= λ·x + hi there
    """
    lam = min(_dsigmoid(l), _dsigmoid(u)) * (1 - 1e-6)
    lam = Fraction(math.floor(Fraction(lam) * SlopeGrid), SlopeGrid)
    # sigmoid(x) - λ·x is nondecreasing on [l, u]
    lo  = sigmoid_bounds(l)[0] - lam * l
    hi  = sigmoid_bounds(u)[1] - lam * u
    lo  = Fraction(math.floor(lo * OffsetGrid), OffsetGrid)
    hi  = Fraction(math.ceil(hi * OffsetGrid), OffsetGrid)
    return lam, lo, hi


def zono_sigmoid(d, m, hull=None):
    """
    Sigmoid transformer: out = λ·d + (lo + hi)/2 + (hi - lo)/2·ε_new
    """
    l, u = _bounds(d, hull)
    if l == u:
        lo, hi = sigmoid_bounds(l)
        out = ZDim.of((lo + hi) / 2).with_generator(m + 1, (hi - lo) / 2)
        return out, m + 1

    lam, lo, hi = sigmoid_line(l, u)
    out = d.scale(lam).shift((lo + hi) / 2).with_generator(m + 1, (hi - lo) / 2)
    return out, m + 1


def zono_square(d, m, hull=None):
    """
    Square transformer: the interval square as a fresh generator
    """
    sq  = iv_square(_bounds(d, hull))
    out = ZDim.of(sq.mid).with_generator(m + 1, sq.width / 2)
    return out, m + 1


def _fold_max(args, m, hulls, sign):
    """
    max(a, b) = a + relu(b - a) and min(a, b) = a - relu(a - b)
    """
    acc, h = args[0], hulls[0]
    for b, hb in zip(args[1:], hulls[1:]):
        diff = (b - acc) if sign > 0 else (acc - b)
        hd   = None
        if h is not None and hb is not None:
            hd = iv_add(hb, iv_scale(-1, h)) if sign > 0 else iv_add(h, iv_scale(-1, hb))
        r, m = zono_relu(diff, m, hd)
        acc  = acc + r if sign > 0 else acc - r
        if h is not None and hb is not None:
            h = iv_max([h, hb]) if sign > 0 else iv_min([h, hb])
    return acc, m


def zono_node(fn, args, m, hulls=None):
    """
    Abstract transformer of one node function

    Returns
    -------
    out: ZDim
    m: int
    """
    hulls = hulls or [None] * len(args)
    if isinstance(fn, Affine):
        return zono_affine(fn.coeffs, fn.bias, args), m
    if isinstance(fn, Relu):
        return zono_relu(args[0], m, hulls[0])
    if isinstance(fn, Sigmoid):
        return zono_sigmoid(args[0], m, hulls[0])
    if isinstance(fn, Square):
        return zono_square(args[0], m, hulls[0])
    if isinstance(fn, Max):
        return _fold_max(args, m, hulls, 1)
    if isinstance(fn, Min):
        return _fold_max(args, m, hulls, -1)
    raise DomainError(f'No zonotope transformer for {fn.op}')


#%%
@dataclass(frozen=True)
class Zonotope:
    """
    Affine forms of a vector over m shared generators. `hull` holds interval
    bounds known independently for each dimension; reported bounds are met
    with it
    """
    dims: Tuple[ZDim, ...]
    m: int
    hull: Optional[Tuple[Interval, ...]] = None

    @classmethod
    def from_box(cls, box):
        """
        One generator per dimension: x_i = mid_i + half_i·ε_i
        """
        box  = to_box(box)
        dims = tuple(ZDim.of(b.mid).with_generator(i, b.width / 2) for i, b in enumerate(box, 1))
        return cls(dims, len(box), tuple(box))

    def __len__(self):
        return len(self.dims)

    def bounds(self):
        hull = self.hull or (None, ) * len(self.dims)
        return [_bounds(d, h) for d, h in zip(self.dims, hull)]

    def linear_bounds(self, coeffs, constant=0):
        """
        Bounds of Σ c_j·out_j + constant for {j: c_j}
        """
        d = zono_affine(tuple(coeffs.values()), constant, [self.dims[j] for j in coeffs])
        b = zono_bounds(d)
        if self.hull is not None:
            b = b.meet(iv_affine(tuple(coeffs.values()), constant, [self.hull[j] for j in coeffs]))
        return b

    def instantiate(self, eps):
        """
        Concrete vector for ε = (ε_1, ..., ε_m)
        """
        return [d.value(eps) for d in self.dims]


def zono_run(g, z):
    """
    Zonotope analysis of every node, alongside an interval analysis of the
    input's bounding box

    Returns
    -------
    forms: dict
        {node: ZDim}
    m: int
        Generators in use at the end
    bounds: dict
        {node: Interval}, zonotope bounds met with the interval ones
    """
    if len(z.dims) != len(g.inputs):
        raise GraphError(f'expected {len(g.inputs)} input dimensions, got {len(z.dims)}')

    hull   = iv_run(g, z.bounds())
    forms  = dict(zip(g.inputs, z.dims))
    bounds = {v: _bounds(forms[v], hull[v]) for v in g.inputs}
    m      = z.m
    for v in g.order():
        if v in forms:
            continue
        preds = g.preds[v]
        forms[v], m = zono_node(g.fns[v], [forms[u] for u in preds], m, [bounds[u] for u in preds])
        bounds[v]   = _bounds(forms[v], hull[v])

    Logger.debug(f'zono_run: {m - z.m} fresh generator(s)')
    return forms, m, bounds


def zono_analyze(g, z):
    """
    Zonotope analysis of a network

    Parameters
    ----------
    g: Graph
    z: Zonotope
        Over the input nodes, in order

    Returns
    -------
    Zonotope
        Over the output nodes, in order, on the final generator set
    """
    forms, m, bounds = zono_run(g, z)
    return Zonotope(
        tuple(forms[v] for v in g.outputs),
        m,
        tuple(bounds[v] for v in g.outputs)
    )
