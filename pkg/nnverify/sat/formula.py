"""
Propositional formulas.

Formulas are immutable trees of Const, Var, Not and binary And/Or. Variables
are positive integers so they map one-to-one onto DIMACS literals.
"""
from dataclasses import dataclass
from functools import reduce


class PropFormula:
    """
    Base of the formula node types. Supports &, | and ~ for building formulas
    """
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(PropFormula):
    value: bool

    def __str__(self):
        return 'true' if self.value else 'false'


@dataclass(frozen=True)
class Var(PropFormula):
    id: int

    def __str__(self):
        return f'p{self.id}'


@dataclass(frozen=True)
class Not(PropFormula):
    arg: PropFormula

    def __str__(self):
        return f'¬{self.arg}'


@dataclass(frozen=True)
class And(PropFormula):
    left: PropFormula
    right: PropFormula

    def __str__(self):
        return f'({self.left} ∧ {self.right})'


@dataclass(frozen=True)
class Or(PropFormula):
    left: PropFormula
    right: PropFormula

    def __str__(self):
        return f'({self.left} ∨ {self.right})'


TRUE  = Const(True)
FALSE = Const(False)


def conj(*args):
    """
    Left-nested conjunction of any number of formulas, `true` when empty
    """
    return reduce(And, args) if args else TRUE


def disj(*args):
    """
    Left-nested disjunction of any number of formulas, `false` when empty
    """
    return reduce(Or, args) if args else FALSE


def fv(phi):
    """
    Free variables of a formula
    """
    out   = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.id)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.extend((node.left, node.right))
    return out


def size(phi):
    """
    Number of nodes in the formula tree
    """
    if isinstance(phi, Not):
        return 1 + size(phi.arg)
    if isinstance(phi, (And, Or)):
        return 1 + size(phi.left) + size(phi.right)
    return 1


def eval_formula(phi, interp):
    """
    Substitutes an interpretation and simplifies with the rules

        true ∧ φ = φ    false ∧ φ = false    ¬true = false
        false ∨ φ = φ   true ∨ φ = true      ¬false = true

    Parameters
    ----------
    phi: PropFormula
    interp: dict
        Partial interpretation {var id: bool}

    Returns
    -------
    PropFormula
        TRUE or FALSE when the value is determined, otherwise the residual
        formula over the unassigned variables
    """
    if isinstance(phi, Const):
        return phi

    if isinstance(phi, Var):
        if phi.id in interp:
            return TRUE if interp[phi.id] else FALSE
        return phi

    if isinstance(phi, Not):
        arg = eval_formula(phi.arg, interp)
        if isinstance(arg, Const):
            return FALSE if arg.value else TRUE
        return Not(arg)

    left  = eval_formula(phi.left, interp)
    right = eval_formula(phi.right, interp)

    if isinstance(phi, And):
        if left == FALSE or right == FALSE:
            return FALSE
        if left == TRUE:
            return right
        if right == TRUE:
            return left
        return And(left, right)

    if left == TRUE or right == TRUE:
        return TRUE
    if left == FALSE:
        return right
    if right == FALSE:
        return left
    return Or(left, right)


def to_nnf(phi):
    """
    Negation normal form: pushes negations down to the variables with De
    Morgan's laws and removes double negations
    """
    if isinstance(phi, (Const, Var)):
        return phi

    if isinstance(phi, And):
        return And(to_nnf(phi.left), to_nnf(phi.right))

    if isinstance(phi, Or):
        return Or(to_nnf(phi.left), to_nnf(phi.right))

    arg = phi.arg
    if isinstance(arg, Const):
        return FALSE if arg.value else TRUE
    if isinstance(arg, Var):
        return phi
    if isinstance(arg, Not):
        return to_nnf(arg.arg)
    if isinstance(arg, And):
        return Or(to_nnf(Not(arg.left)), to_nnf(Not(arg.right)))
    return And(to_nnf(Not(arg.left)), to_nnf(Not(arg.right)))


def is_literal(phi):
    return isinstance(phi, Var) or (isinstance(phi, Not) and isinstance(phi.arg, Var))
