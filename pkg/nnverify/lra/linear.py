"""
Linear constraints over named rational variables
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from ..utils import fmt_linear


Relations = ('<=', '>=', '=', '<', '>')
Strict    = ('<', '>')

Negations = {
    '<=': '>',
    '>=': '<',
    '<' : '>=',
    '>' : '<=',
}


@dataclass(frozen=True)
class LinConstraint:
    """
    Σ c_v · v  REL  bound

    Coefficients are kept as a tuple of (var, coeff) pairs sorted by variable
    name with zero coefficients dropped, so syntactically equal constraints
    compare and hash equal. Build with `LinConstraint.of`
    """
    coeffs: Tuple[Tuple[str, Fraction], ...]
    rel: str
    bound: Fraction

    @classmethod
    def of(cls, coeffs, rel, bound=0):
        if rel not in Relations:
            raise ValueError(f'Unknown relation {rel!r}')
        items = []
        for var, c in dict(coeffs).items():
            c = Fraction(c)
            if c:
                items.append((var, c))
        items.sort(key=lambda item: str(item[0]))
        return cls(tuple(items), rel, Fraction(bound))

    @property
    def mapping(self):
        return dict(self.coeffs)

    @property
    def variables(self):
        return [v for v, _ in self.coeffs]

    @property
    def strict(self):
        return self.rel in Strict

    def lhs(self, values):
        return sum((c * values[v] for v, c in self.coeffs), Fraction(0))

    def holds(self, values):
        """
        Evaluates the constraint exactly under {var: value}
        """
        lhs = self.lhs(values)
        if self.rel == '<=':
            return lhs <= self.bound
        if self.rel == '>=':
            return lhs >= self.bound
        if self.rel == '<':
            return lhs < self.bound
        if self.rel == '>':
            return lhs > self.bound
        return lhs == self.bound

    def negate(self):
        """
        Complement constraint. Equalities have no single-constraint complement
        """
        if self.rel == '=':
            raise ValueError('The negation of an equality is a disjunction')
        return LinConstraint(self.coeffs, Negations[self.rel], self.bound)

    def relax(self, delta):
        """
        Non-strict version of a strict constraint shifted by delta:
        a < b becomes a <= b - δ and a > b becomes a >= b + δ
        """
        if self.rel == '<':
            return LinConstraint(self.coeffs, '<=', self.bound - delta)
        if self.rel == '>':
            return LinConstraint(self.coeffs, '>=', self.bound + delta)
        return self

    def split(self):
        """
        An equality as the pair (<=, >=), anything else as itself
        """
        if self.rel == '=':
            return (LinConstraint(self.coeffs, '<=', self.bound), LinConstraint(self.coeffs, '>=', self.bound))
        return (self, )

    def rename(self, mapping):
        return LinConstraint.of({mapping.get(v, v): c for v, c in self.coeffs}, self.rel, self.bound)

    def __str__(self):
        return f'{fmt_linear(self.mapping)} {self.rel} {self.bound}'


def affine_eq(out, terms, bias=0):
    """
    out = Σ c·v + bias as the constraint out - Σ c·v = bias
    """
    coeffs = {out: Fraction(1)}
    for var, c in terms:
        coeffs[var] = coeffs.get(var, 0) - Fraction(c)
    return LinConstraint.of(coeffs, '=', bias)
