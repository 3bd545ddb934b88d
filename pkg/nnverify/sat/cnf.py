"""
Conjunctive normal form, Tseitin's transformation and DIMACS IO.

A clause is a tuple of non-zero ints: the absolute value is the variable id
and the sign is the polarity, exactly as in DIMACS.
"""
import logging

from dataclasses import dataclass
from typing import Tuple

from .formula import (
    And,
    Const,
    eval_formula,
    fv,
    Not,
    Or,
    to_nnf,
    Var
)


Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CnfFormula:
    clauses: Tuple[Tuple[int, ...], ...]
    num_vars: int = 0

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        for i, clause in enumerate(clauses):
            if not clause:
                raise ValueError(f'clause {i} is empty')
            if 0 in clause:
                raise ValueError(f'clause {i} contains the literal 0')
        top = max((abs(l) for c in clauses for l in c), default=0)
        object.__setattr__(self, 'clauses', clauses)
        object.__setattr__(self, 'num_vars', max(self.num_vars, top))

    @property
    def variables(self):
        return sorted({abs(l) for c in self.clauses for l in c})

    def conjoin(self, *clauses):
        """
        Returns a new formula with extra clauses appended
        """
        return CnfFormula(self.clauses + tuple(tuple(c) for c in clauses), self.num_vars)

    def satisfied_by(self, interp):
        """
        True when every clause has a literal made true by the interpretation
        """
        return all(
            any(interp.get(abs(l)) == (l > 0) for l in clause)
            for clause in self.clauses
        )

    def __len__(self):
        return len(self.clauses)


def literal(phi):
    """
    Var(p) -> p, Not(Var(p)) -> -p
    """
    if isinstance(phi, Var):
        return phi.id
    return -phi.arg.id


def tseitin(phi):
    """
    Equisatisfiable CNF of linear size.

    The formula is simplified and put into NNF, then every non-literal
    subformula gets a fresh variable t_i (numbered in post-order after the
    largest variable of φ) defined by three clauses, and the last clause
    asserts the root variable.

    Parameters
    ----------
    phi: PropFormula

    Returns
    -------
    cnf: CnfFormula
    fresh: dict
        {t_i: subformula it names}

    Examples
    --------
    For (p ∧ q) ∨ ((q ∧ ¬r) ∧ s) over p,q,r,s = 1..4 the fresh variables are
    t1 = 5 ⇔ p ∧ q, t2 = 6 ⇔ q ∧ ¬r, t3 = 7 ⇔ t2 ∧ s, t4 = 8 ⇔ t1 ∨ t3 and
    the final clause is (8,)
    """
    top  = max(fv(phi), default=0)
    phi  = to_nnf(eval_formula(phi, {}))

    if isinstance(phi, Const):
        if phi.value:
            return CnfFormula((), top), {}
        # Unsatisfiable constant: a fresh variable forced both ways
        t = top + 1
        return CnfFormula(((t,), (-t,)), t), {}

    clauses = []
    fresh   = {}
    counter = [top]

    def name(node):
        if isinstance(node, Var) or (isinstance(node, Not) and isinstance(node.arg, Var)):
            return literal(node)

        a = name(node.left)
        b = name(node.right)

        counter[0] += 1
        t = counter[0]
        fresh[t] = node

        if isinstance(node, And):
            clauses.extend([(-t, a), (-t, b), (-a, -b, t)])
        else:
            clauses.extend([(-t, a, b), (-a, t), (-b, t)])
        return t

    root = name(phi)
    clauses.append((root,))

    Logger.debug(f'tseitin: {len(fresh)} fresh variables, {len(clauses)} clauses')
    return CnfFormula(tuple(clauses), counter[0]), fresh


def to_dimacs(cnf):
    """
    Renders a CNF in DIMACS format
    """
    lines = [f'p cnf {cnf.num_vars} {len(cnf.clauses)}']
    for clause in cnf.clauses:
        lines.append(' '.join(map(str, clause)) + ' 0')
    return '\n'.join(lines) + '\n'


def from_dimacs(text):
    """
    Parses DIMACS CNF text. Comment lines start with 'c'; clauses may span
    lines and are terminated by 0
    """
    num_vars = 0
    clauses  = []
    current  = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith('c') or line.startswith('%'):
            continue
        if line.startswith('p'):
            parts = line.split()
            if len(parts) != 4 or parts[1] != 'cnf':
                raise ValueError(f'bad DIMACS header: {line!r}')
            num_vars = int(parts[2])
            continue
        for token in line.split():
            lit = int(token)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)

    if current:
        clauses.append(tuple(current))
    return CnfFormula(tuple(clauses), num_vars)
