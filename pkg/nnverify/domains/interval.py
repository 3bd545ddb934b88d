"""
The interval domain: one [lo, hi] per value, exact over Fractions
"""
import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from ..errors import (
    DomainError,
    GraphError
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


Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'lo', Fraction(self.lo))
        object.__setattr__(self, 'hi', Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f'Empty interval [{self.lo}, {self.hi}]')

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, x):
        return self.lo <= x <= self.hi

    def within(self, other):
        return other.lo <= self.lo and self.hi <= other.hi

    def meet(self, other):
        """
        Intersection of two intervals that both enclose the same value
        """
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __str__(self):
        return f'[{self.lo}, {self.hi}]'


def to_box(pairs):
    """
    List of Intervals from (lo, hi) pairs or Intervals
    """
    box = [p if isinstance(p, Interval) else Interval(*p) for p in pairs]
    if not box:
        raise DomainError('A box needs at least one dimension')
    return box


#%%
def iv_add(a, b):
    """
    [l + l', u + u']
    """
    return Interval(a.lo + b.lo, a.hi + b.hi)


def iv_mul(a, b):
    """
    [min B, max B] over the endpoint products B
    """
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(products), max(products))


def iv_scale(c, a):
    c = Fraction(c)
    return Interval(min(c * a.lo, c * a.hi), max(c * a.lo, c * a.hi))


def iv_affine(coeffs, bias, boxes):
    """
    Σ c_i·x_i + b over per-argument intervals

    Examples
    --------
    >>> iv_affine((3, 2), 0, [Interval(5, 10), Interval(20, 30)])
    Interval(lo=Fraction(55, 1), hi=Fraction(90, 1))
    """
    if len(coeffs) != len(boxes):
        raise DomainError(f'Affine function of arity {len(coeffs)} applied to {len(boxes)} intervals')
    lo = hi = Fraction(bias)
    for c, a in zip(coeffs, boxes):
        term = iv_scale(c, a)
        lo  += term.lo
        hi  += term.hi
    return Interval(lo, hi)


def iv_monotone(f, a):
    """
    [f(l), f(u)] for a monotonically increasing f
    """
    return Interval(f(a.lo), f(a.hi))


def iv_relu(a):
    return iv_monotone(lambda x: max(x, Fraction(0)), a)


def iv_sigmoid(a):
    """
    Sigmoid endpoints are computed in floats and rounded outward
    """
    return Interval(sigmoid_bounds(a.lo)[0], sigmoid_bounds(a.hi)[1])


def iv_square(a):
    """
    Tighter than iv_mul(a, a): the square of a sign-spanning interval
    starts at 0
    """
    lo2, hi2 = a.lo * a.lo, a.hi * a.hi
    if a.lo <= 0 <= a.hi:
        return Interval(0, max(lo2, hi2))
    return Interval(min(lo2, hi2), max(lo2, hi2))


def iv_max(args):
    return Interval(max(a.lo for a in args), max(a.hi for a in args))


def iv_min(args):
    return Interval(min(a.lo for a in args), min(a.hi for a in args))


def iv_node(fn, args):
    """
    Abstract transformer of one node function
    """
    if isinstance(fn, Affine):
        return iv_affine(fn.coeffs, fn.bias, args)
    if isinstance(fn, Relu):
        return iv_relu(args[0])
    if isinstance(fn, Sigmoid):
        return iv_sigmoid(args[0])
    if isinstance(fn, Square):
        return iv_square(args[0])
    if isinstance(fn, Max):
        return iv_max(args)
    if isinstance(fn, Min):
        return iv_min(args)
    raise DomainError(f'No interval transformer for {fn.op}')


def iv_run(g, box):
    """
    out^a(v) for every node of the graph

    Parameters
    ----------
    g: Graph
    box: list
        One Interval or (lo, hi) pair per input node

    Returns
    -------
    bounds: dict
        {node: Interval}
    """
    box = to_box(box)
    if len(box) != len(g.inputs):
        raise GraphError(f'expected {len(g.inputs)} input intervals, got {len(box)}')

    bounds = dict(zip(g.inputs, box))
    for v in g.order():
        if v not in bounds:
            bounds[v] = iv_node(g.fns[v], [bounds[u] for u in g.preds[v]])
    return bounds


def iv_analyze(g, box):
    """
    Interval analysis of a network

    Returns
    -------
    Box
        Intervals of the output nodes in order

    Examples
    --------
    For v3 = 2·x1 + x2, v4 = relu(v3) on ([0, 1], [2, 3]) the output is [2, 5]
    """
    bounds = iv_run(g, box)
    return Box(tuple(bounds[v] for v in g.outputs))


@dataclass(frozen=True)
class Box:
    """
    Result of an interval analysis
    """
    dims: Tuple[Interval, ...]

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, i):
        return self.dims[i]

    def __iter__(self):
        return iter(self.dims)

    def bounds(self):
        return list(self.dims)

    def linear_bounds(self, coeffs, constant=0):
        """
        Bounds of Σ c_j·out_j + constant for {j: c_j}
        """
        return iv_affine(tuple(coeffs.values()), constant, [self.dims[j] for j in coeffs])
