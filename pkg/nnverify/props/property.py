"""
Correctness properties as triples

    {precondition}  r_1 <- f_1(x_1) ... r_k <- f_k(x_k)  {postcondition}

Vector variables are addressed per component as `name[i]` (0-based) inside
linear atoms; class labels are 1-based.
"""
import logging

from dataclasses import (
    dataclass,
    field
)
from fractions import Fraction
from typing import (
    Dict,
    Optional,
    Tuple
)

from ..errors import PropertyError
from ..graph import (
    argmax_class,
    evaluate,
    Graph
)
from ..lra import (
    Atom,
    LinConstraint
)
from ..sat import (
    And,
    conj,
    Const,
    Not,
    Or,
    PropFormula
)


Logger = logging.getLogger(__name__)


def scalar(name, i):
    return f'{name}[{i}]'


def _box_atoms(var, box):
    atoms = []
    for i, (lo, hi) in enumerate(box):
        atoms.append(LinConstraint.of({scalar(var, i): 1}, '>=', lo))
        atoms.append(LinConstraint.of({scalar(var, i): 1}, '<=', hi))
    return atoms


@dataclass(frozen=True)
class InputVar:
    name: str
    dim: int


@dataclass(frozen=True)
class LinfBall:
    """
    ||x - center||_inf <= eps, i.e. |x_i - c_i| <= eps for every i
    """
    var: str
    center: Tuple[Fraction, ...]
    eps: Fraction

    def box(self):
        return [(c - self.eps, c + self.eps) for c in self.center]

    def atoms(self):
        """
        The two linear atoms per dimension the absolute values expand to
        """
        return _box_atoms(self.var, self.box())

    def contains(self, x):
        return all(abs(xi - c) <= self.eps for xi, c in zip(x, self.center))


@dataclass(frozen=True)
class L2Ball:
    """
    ||x - center||_2 <= eps, checked exactly as a sum of squares. Solvers and
    abstractions see its bounding box
    """
    var: str
    center: Tuple[Fraction, ...]
    eps: Fraction

    def box(self):
        return [(c - self.eps, c + self.eps) for c in self.center]

    def atoms(self):
        return _box_atoms(self.var, self.box())

    def contains(self, x):
        return sum((xi - c) ** 2 for xi, c in zip(x, self.center)) <= self.eps ** 2


@dataclass(frozen=True)
class SynonymSets:
    """
    Component i of x takes one of the finitely many values in sets[i]
    """
    var: str
    sets: Tuple[Tuple[Fraction, ...], ...]

    def box(self):
        return [(min(s), max(s)) for s in self.sets]

    def atoms(self):
        return _box_atoms(self.var, self.box())

    def contains(self, x):
        return all(xi in s for xi, s in zip(x, self.sets))

    def points(self):
        """
        Every vector of the region, in lexicographic order of the set indices
        """
        out = [()]
        for s in self.sets:
            out = [p + (v, ) for p in out for v in s]
        return out


@dataclass(frozen=True)
class ClassEquals(PropFormula):
    """
    class(of) = label over a vector of `dim` components
    """
    of: str
    label: int
    dim: int

    def desugar(self):
        """
        of[y] > of[j] for every j != y
        """
        y = scalar(self.of, self.label - 1)
        return conj(*[
            Atom(LinConstraint.of({y: 1, scalar(self.of, j): -1}, '>', 0))
            for j in range(self.dim) if j != self.label - 1
        ])

    def __str__(self):
        return f'class({self.of}) = {self.label}'


@dataclass(frozen=True)
class Assignment:
    """
    out <- net(inp)
    """
    out: str
    net: Graph
    inp: str
    source: Optional[str] = None


@dataclass(frozen=True)
class Property:
    inputs: Tuple[InputVar, ...]
    pre: Tuple[LinConstraint, ...]
    regions: Tuple = ()
    assign: Tuple[Assignment, ...] = ()
    post: PropFormula = field(default=Const(True))

    @property
    def dims(self):
        """
        {vector name: dimension} for inputs and assigned outputs
        """
        dims = {v.name: v.dim for v in self.inputs}
        for a in self.assign:
            dims[a.out] = len(a.net.outputs)
        return dims

    def precondition_atoms(self):
        """
        Linear atoms of the precondition, regions replaced by their box
        """
        atoms = list(self.pre)
        for region in self.regions:
            atoms.extend(region.atoms())
        return atoms

    def post_formula(self):
        """
        The postcondition as an LRA formula, class constraints desugared
        """
        return desugar(self.post)

    def input_box(self, name):
        """
        Per-component bounds of an input vector implied by the single-variable
        atoms and regions of the precondition, None if any side is unbounded
        """
        dims = self.dims
        if name not in dims or name not in {v.name for v in self.inputs}:
            return None

        lo = [None] * dims[name]
        hi = [None] * dims[name]
        for c in self.precondition_atoms():
            if len(c.coeffs) != 1:
                continue
            var, k = c.coeffs[0]
            for i in range(dims[name]):
                if var != scalar(name, i):
                    continue
                b = c.bound / k
                # Dividing by a negative coefficient flips the relation
                upper = c.rel == '=' or (c.rel == '<=') == (k > 0)
                lower = c.rel == '=' or (c.rel == '>=') == (k > 0)
                if upper and (hi[i] is None or b < hi[i]):
                    hi[i] = b
                if lower and (lo[i] is None or b > lo[i]):
                    lo[i] = b

        if any(v is None for v in lo + hi):
            return None
        return list(zip(lo, hi))

    def vectors(self, model):
        """
        Splits a scalar model {name[i]: value} into input vectors
        """
        return {
            v.name: [model.get(scalar(v.name, i), Fraction(0)) for i in range(v.dim)]
            for v in self.inputs
        }


def desugar(phi):
    if isinstance(phi, ClassEquals):
        return phi.desugar()
    if isinstance(phi, Not):
        return Not(desugar(phi.arg))
    if isinstance(phi, And):
        return And(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, Or):
        return Or(desugar(phi.left), desugar(phi.right))
    return phi


def holds_concretely(phi, values, vectors):
    """
    Truth of a postcondition over concrete values; class constraints use
    argmax and are false on ties
    """
    if isinstance(phi, Const):
        return phi.value
    if isinstance(phi, Atom):
        return phi.constraint.holds(values)
    if isinstance(phi, ClassEquals):
        index, tie = argmax_class(vectors[phi.of])
        return index == phi.label and not tie
    if isinstance(phi, Not):
        return not holds_concretely(phi.arg, values, vectors)
    if isinstance(phi, And):
        return holds_concretely(phi.left, values, vectors) and holds_concretely(phi.right, values, vectors)
    return holds_concretely(phi.left, values, vectors) or holds_concretely(phi.right, values, vectors)


#%%
@dataclass(frozen=True)
class Counterexample:
    """
    An input assignment that satisfies the precondition and falsifies the
    postcondition. `values` holds every scalar, network outputs included
    """
    values: Dict[str, Fraction]
    vectors: Dict[str, list]

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotCounterexample:
    reason: str

    def __bool__(self):
        return False


def run_property(p, inputs):
    """
    Evaluates every network call of a property

    Parameters
    ----------
    p: Property
    inputs: dict
        {input name: vector}

    Returns
    -------
    vectors: dict
        {name: vector} for inputs and assigned outputs
    values: dict
        {name[i]: value} for every component
    """
    vectors = {}
    for v in p.inputs:
        if v.name not in inputs:
            raise PropertyError(f'No value for input {v.name}')
        x = list(inputs[v.name])
        if len(x) != v.dim:
            raise PropertyError(f'Input {v.name} has dimension {v.dim}, got {len(x)} values')
        vectors[v.name] = [xi if isinstance(xi, Fraction) else Fraction(xi) for xi in x]

    for a in p.assign:
        r = evaluate(a.net, vectors[a.inp])
        vectors[a.out] = [ri if isinstance(ri, Fraction) else Fraction(ri) for ri in r]

    values = {scalar(name, i): x for name, vec in vectors.items() for i, x in enumerate(vec)}
    return vectors, values


def check_counterexample(p, inputs):
    """
    Decides whether an input assignment is a counterexample by running the
    networks concretely

    Parameters
    ----------
    p: Property
    inputs: dict
        {input name: vector}

    Returns
    -------
    Counterexample or NotCounterexample

    Raises
    ------
    PropertyError
        When an input is missing or has the wrong dimension

    Examples
    --------
    For {x <= 0.1} r <- x + 1 {r <= 1} the input x = 0.1 gives r = 1.1 and is
    a counterexample
    """
    vectors, values = run_property(p, inputs)

    for c in p.pre:
        if not c.holds(values):
            return NotCounterexample(f'precondition fails: {c}')
    for region in p.regions:
        if not region.contains(vectors[region.var]):
            return NotCounterexample(f'precondition fails: {type(region).__name__} on {region.var}')

    if holds_concretely(p.post, values, vectors):
        return NotCounterexample('postcondition holds')

    Logger.debug(f'Counterexample: {vectors}')
    return Counterexample(values, vectors)


def robustness_property(net, center, eps, label=None, norm='linf', name='x', out='r', source=None):
    """
    Local robustness: every input within eps of the center is classified as
    `label` (by default the class of the center)

    Parameters
    ----------
    net: Graph
    center: sequence
    eps: rational
    label: int, default=None
        1-based class
    norm: str, default='linf'
        linf or l2
    """
    center = tuple(Fraction(c) for c in center)
    eps    = Fraction(eps)
    if len(center) != len(net.inputs):
        raise PropertyError(f'Center has {len(center)} components, the network takes {len(net.inputs)}')

    if label is None:
        label = argmax_class(evaluate(net, center)).index

    if norm == 'linf':
        ball = LinfBall(name, center, eps)
        pre, regions = tuple(ball.atoms()), ()
    elif norm == 'l2':
        pre, regions = (), (L2Ball(name, center, eps), )
    else:
        raise PropertyError(f'Unknown norm {norm!r}')

    return Property(
        inputs  = (InputVar(name, len(center)), ),
        pre     = pre,
        regions = regions,
        assign  = (Assignment(out, net, name, source), ),
        post    = ClassEquals(out, label, len(net.outputs))
    )
