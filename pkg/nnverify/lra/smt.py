"""
Linear real arithmetic formulas and the lazy DPLL(T) procedure.

An LraFormula is a propositional formula tree (sat.formula's Const, And, Or
and Not) whose leaves are Atoms wrapping a LinConstraint.
"""
import logging
import re

from dataclasses import dataclass
from fractions import Fraction

from ..errors import (
    InfeasibleError,
    NNVerifyError,
    SolverError
)
from ..results import (
    Sat,
    Unsat
)
from ..sat import (
    And,
    Const,
    conj,
    disj,
    dpll,
    FALSE,
    Not,
    Or,
    PropFormula,
    to_nnf,
    TRUE,
    tseitin,
    Var
)
from .linear import LinConstraint
from .simplex import (
    run_simplex,
    simplex_optimize,
    to_simplex_form
)


Logger = logging.getLogger(__name__)

DefaultDelta = Fraction(1, 10**6)

# Shared slack of the strict constraints in exact theory checks
Margin = '#margin'


@dataclass(frozen=True)
class Atom(PropFormula):
    constraint: LinConstraint

    def __str__(self):
        return f'[{self.constraint}]'


def atom(coeffs, rel, bound=0):
    """
    Shorthand for Atom(LinConstraint.of(coeffs, rel, bound))
    """
    return Atom(LinConstraint.of(coeffs, rel, bound))


class AtomMap:
    """
    Bijection between propositional variable ids and constraints. Identical
    constraints share one variable
    """
    def __init__(self):
        self.ids   = {}
        self.atoms = {}

    def __len__(self):
        return len(self.ids)

    def __getitem__(self, var):
        return self.atoms[var]

    def var(self, constraint):
        if constraint not in self.ids:
            v = len(self.ids) + 1
            self.ids[constraint] = v
            self.atoms[v] = constraint
        return self.ids[constraint]

    def items(self):
        return self.atoms.items()


def lra_vars(phi):
    """
    Real variables of an LRA formula in order of first appearance
    """
    seen  = {}
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            for v in node.constraint.variables:
                seen.setdefault(v, None)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.extend((node.right, node.left))
    return list(seen)


def atoms_of(phi):
    out   = []
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.append(node.constraint)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.extend((node.right, node.left))
    return out


def holds(phi, values):
    """
    Exact truth value of an LRA formula under {var: value}
    """
    if isinstance(phi, Const):
        return phi.value
    if isinstance(phi, Atom):
        return phi.constraint.holds(values)
    if isinstance(phi, Not):
        return not holds(phi.arg, values)
    if isinstance(phi, And):
        return holds(phi.left, values) and holds(phi.right, values)
    return holds(phi.left, values) or holds(phi.right, values)


def lra_nnf(phi):
    """
    Pushes negations into the atoms: ¬(a ≤ b) becomes a > b and ¬(a = b)
    becomes a < b ∨ a > b
    """
    if isinstance(phi, (Const, Atom)):
        return phi
    if isinstance(phi, And):
        return And(lra_nnf(phi.left), lra_nnf(phi.right))
    if isinstance(phi, Or):
        return Or(lra_nnf(phi.left), lra_nnf(phi.right))

    arg = phi.arg
    if isinstance(arg, Const):
        return FALSE if arg.value else TRUE
    if isinstance(arg, Atom):
        c = arg.constraint
        if c.rel == '=':
            return Or(Atom(LinConstraint(c.coeffs, '<', c.bound)), Atom(LinConstraint(c.coeffs, '>', c.bound)))
        return Atom(c.negate())
    if isinstance(arg, Not):
        return lra_nnf(arg.arg)
    if isinstance(arg, And):
        return Or(lra_nnf(Not(arg.left)), lra_nnf(Not(arg.right)))
    return And(lra_nnf(Not(arg.left)), lra_nnf(Not(arg.right)))


def to_dnf(phi):
    """
    Disjunctive normal form as a list of cubes, each a list of constraints.
    `true` is [[]] and `false` is []
    """
    phi = lra_nnf(phi)

    def cubes(node):
        if isinstance(node, Const):
            return [[]] if node.value else []
        if isinstance(node, Atom):
            return [[node.constraint]]
        if isinstance(node, Or):
            return cubes(node.left) + cubes(node.right)
        return [a + b for a in cubes(node.left) for b in cubes(node.right)]

    return cubes(phi)


def split_equalities(phi):
    """
    Rewrites every equality atom into a conjunction of two inequalities so
    that each Boolean literal maps onto a single theory constraint
    """
    if isinstance(phi, Atom):
        parts = phi.constraint.split()
        if len(parts) == 2:
            return And(Atom(parts[0]), Atom(parts[1]))
        return phi
    if isinstance(phi, Not):
        return Not(split_equalities(phi.arg))
    if isinstance(phi, And):
        return And(split_equalities(phi.left), split_equalities(phi.right))
    if isinstance(phi, Or):
        return Or(split_equalities(phi.left), split_equalities(phi.right))
    return phi


#%%
def boolean_abstraction(phi):
    """
    Replaces every atom by a propositional variable

    Parameters
    ----------
    phi: LraFormula

    Returns
    -------
    abstraction: PropFormula
        Same structure with atoms replaced by Var(id)
    atoms: AtomMap
        Variable ids are handed out in order of first appearance (left to
        right), syntactically identical atoms share an id

    Examples
    --------
    (x ≤ 0 ∨ x ≤ 10) ∧ ¬(x ≤ 0) abstracts to (p1 ∨ p2) ∧ ¬p1
    """
    atoms = AtomMap()

    def walk(node):
        if isinstance(node, Atom):
            return Var(atoms.var(node.constraint))
        if isinstance(node, Not):
            return Not(walk(node.arg))
        if isinstance(node, And):
            left = walk(node.left)
            return And(left, walk(node.right))
        if isinstance(node, Or):
            left = walk(node.left)
            return Or(left, walk(node.right))
        return node

    return walk(phi), atoms


def concretize(phi, atoms):
    """
    Inverse of the Boolean abstraction: (φ^B)^T
    """
    if isinstance(phi, Var):
        return Atom(atoms[phi.id])
    if isinstance(phi, Not):
        return Not(concretize(phi.arg, atoms))
    if isinstance(phi, And):
        return And(concretize(phi.left, atoms), concretize(phi.right, atoms))
    if isinstance(phi, Or):
        return Or(concretize(phi.left, atoms), concretize(phi.right, atoms))
    return phi


def strict_check(constraints):
    """
    Decides a conjunction with strict constraints exactly. The strict ones
    share a margin m, a < b becomes a + m <= b and a > b becomes a - m >= b;
    the conjunction is satisfiable iff the largest m, capped at 1, is positive

    Returns
    -------
    Sat or Unsat
        Never flagged with delta
    """
    if not any(c.strict for c in constraints):
        t = to_simplex_form(constraints)
        if run_simplex(t):
            return Sat(t.model())
        return Unsat()

    cons = [c for c in constraints if not c.strict]
    for c in constraints:
        if c.rel == '<':
            cons.append(LinConstraint.of({**c.mapping, Margin: 1}, '<=', c.bound))
        elif c.rel == '>':
            cons.append(LinConstraint.of({**c.mapping, Margin: -1}, '>=', c.bound))
    cons.append(LinConstraint.of({Margin: 1}, '<=', 1))

    try:
        margin, model = simplex_optimize(to_simplex_form(cons), {Margin: 1})
    except InfeasibleError:
        return Unsat()

    if margin <= 0:
        return Unsat()
    model.pop(Margin, None)
    return Sat(model)


def theory_check(constraints, delta=DefaultDelta):
    """
    Simplex on a conjunction of constraints, strict ones shifted by delta.
    With delta None the strict constraints are decided exactly instead, see
    `strict_check`

    Returns
    -------
    result: Sat or Unsat
    relaxed: bool
        Whether any strict constraint was rewritten
    """
    if delta is None:
        return strict_check(constraints), False

    relaxed = any(c.strict for c in constraints)
    t = to_simplex_form([c.relax(delta) for c in constraints])
    if run_simplex(t):
        return Sat(t.model(), relaxed), relaxed
    return Unsat(relaxed), relaxed


def implicant(phi, model):
    """
    Literals of a total model that already make the NNF formula φ true: both
    sides of a conjunction, the first true side of a disjunction
    """
    out = set()

    def true(node):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            return model[node.id]
        if isinstance(node, Not):
            return not model[node.arg.id]
        if isinstance(node, And):
            return true(node.left) and true(node.right)
        return true(node.left) or true(node.right)

    def walk(node):
        if isinstance(node, Var):
            out.add(node.id)
        elif isinstance(node, Not):
            out.add(-node.arg.id)
        elif isinstance(node, And):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Or):
            walk(node.left if true(node.left) else node.right)

    walk(phi)
    return frozenset(out)


def dpllt_solve(phi, delta=DefaultDelta, trace=None):
    """
    Lazy DPLL(T): DPLL on the Boolean abstraction, Simplex on the conjunction
    of theory literals of each Boolean model, blocking clauses on failure.

    The Boolean model DPLL returns is reduced to the literals φ^B needs (see
    `implicant`); those literals are theory-checked and, on failure, blocked.
    Unassigned atoms never enter the theory check or the blocking clause

    Parameters
    ----------
    phi: LraFormula
    delta: Fraction, default=1/10^6
        Margin strict inequalities are shifted by before reaching Simplex.
        None decides them exactly, the result is then never flagged
    trace: list, default=None
        When given, the theory literals checked in each iteration are
        appended as frozensets of signed atom ids

    Returns
    -------
    Sat or Unsat
        Sat carries a value for every variable of φ. Either result has
        `delta` set when a strict constraint was relaxed during the solve;
        a Sat model always satisfies φ exactly, an Unsat with `delta` set only
        rules out models with margin δ
    """
    variables = lra_vars(phi)
    boolean, atoms = boolean_abstraction(split_equalities(phi))
    nnf = to_nnf(boolean)
    cnf, _ = tseitin(boolean)

    checked  = set()
    relaxed  = False
    blocking = []
    iteration = 0
    while True:
        iteration += 1
        result = dpll(cnf.conjoin(*blocking) if blocking else cnf)
        if not result:
            Logger.debug(f'dpllt: Boolean abstraction unsat after {iteration} iterations')
            return Unsat(relaxed)

        total    = {v: result.model.get(v, False) for v in range(1, len(atoms) + 1)}
        literals = implicant(nnf, total)
        if literals in checked:
            raise SolverError('DPLL(T) produced a Boolean model that was already checked')
        checked.add(literals)
        if trace is not None:
            trace.append(literals)

        ordered = sorted(literals, key=abs)
        constraints = [atoms[l] if l > 0 else _complement(atoms[-l]) for l in ordered]
        sat, strict = theory_check(constraints, delta)
        relaxed |= strict

        if sat:
            model = {v: sat.model.get(v, Fraction(0)) for v in variables}
            Logger.debug(f'dpllt: theory sat after {iteration} iterations')
            return Sat(model, relaxed)

        Logger.debug(f'dpllt: blocking {ordered}')
        blocking.append(tuple(-l for l in ordered))


def _complement(constraint):
    if constraint.rel == '=':
        raise SolverError('Equalities must be split before abstraction')
    return constraint.negate()


#%%
_Token = re.compile(r'\(|\)|[^\s()]+')
_Rels  = {'<=', '>=', '<', '>', '='}


def _number(token):
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        return None


def parse_lra(text):
    """
    Parses the s-expression format

        (and (>= (+ x y) 0) (or (< x 0) (not (<= (* 2 y) 1/2))))

    Terms are numbers, variables, (+ t ...), (- t), (- t t ...) and
    (* number t). Relations are <=, >=, <, >, =. Connectives are and, or, not,
    => and the constants true, false
    """
    tokens = _Token.findall(text)
    if not tokens:
        raise NNVerifyError('Empty LRA formula')

    def read(i):
        if tokens[i] == '(':
            out = []
            i  += 1
            while i < len(tokens) and tokens[i] != ')':
                item, i = read(i)
                out.append(item)
            if i >= len(tokens):
                raise NNVerifyError('Unbalanced parentheses in LRA formula')
            return out, i + 1
        if tokens[i] == ')':
            raise NNVerifyError('Unexpected ) in LRA formula')
        return tokens[i], i + 1

    tree, end = read(0)
    if end != len(tokens):
        raise NNVerifyError('Trailing tokens after LRA formula')
    return _formula(tree)


def _term(tree):
    """
    Linear term as ({var: coeff}, constant)
    """
    if isinstance(tree, str):
        n = _number(tree)
        if n is not None:
            return {}, n
        return {tree: Fraction(1)}, Fraction(0)

    if not tree:
        raise NNVerifyError('Empty term')

    op, args = tree[0], [_term(a) for a in tree[1:]]
    if op == '+':
        return _combine(args, [1] * len(args))
    if op == '-':
        if len(args) == 1:
            return _combine(args, [-1])
        return _combine(args, [1] + [-1] * (len(args) - 1))
    if op == '*':
        consts = [a for a in args if not a[0]]
        if len(args) != 2 or not consts:
            raise NNVerifyError(f'Non-linear term {tree}')
        k = consts[0][1]
        other = args[1] if args[0] is consts[0] else args[0]
        return _combine([other], [k])
    raise NNVerifyError(f'Unknown term operator {op!r}')


def _combine(terms, scales):
    coeffs = {}
    const  = Fraction(0)
    for (c, b), k in zip(terms, scales):
        for v, a in c.items():
            coeffs[v] = coeffs.get(v, 0) + k * a
        const += k * b
    return coeffs, const


def _formula(tree):
    if isinstance(tree, str):
        if tree == 'true':
            return TRUE
        if tree == 'false':
            return FALSE
        raise NNVerifyError(f'Unexpected token {tree!r}')

    op, args = tree[0], tree[1:]
    if op in _Rels:
        if len(args) != 2:
            raise NNVerifyError(f'{op} takes two terms')
        (lc, lb), (rc, rb) = _term(args[0]), _term(args[1])
        coeffs = dict(lc)
        for v, a in rc.items():
            coeffs[v] = coeffs.get(v, 0) - a
        return Atom(LinConstraint.of(coeffs, op, rb - lb))
    if op == 'and':
        return conj(*map(_formula, args))
    if op == 'or':
        return disj(*map(_formula, args))
    if op == 'not':
        if len(args) != 1:
            raise NNVerifyError('not takes one argument')
        return Not(_formula(args[0]))
    if op == '=>':
        if len(args) != 2:
            raise NNVerifyError('=> takes two arguments')
        return Or(Not(_formula(args[0])), _formula(args[1]))
    raise NNVerifyError(f'Unknown connective {op!r}')


def _fmt_term(constraint):
    terms = []
    for v, c in constraint.coeffs:
        terms.append(str(v) if c == 1 else f'(* {c} {v})')
    if not terms:
        return '0'
    if len(terms) == 1:
        return terms[0]
    return '(+ ' + ' '.join(terms) + ')'


def format_lra(phi):
    """
    Renders an LRA formula in the s-expression format read by parse_lra
    """
    if isinstance(phi, Const):
        return 'true' if phi.value else 'false'
    if isinstance(phi, Atom):
        c = phi.constraint
        return f'({c.rel} {_fmt_term(c)} {c.bound})'
    if isinstance(phi, Not):
        return f'(not {format_lra(phi.arg)})'
    op = 'and' if isinstance(phi, And) else 'or'
    return f'({op} {format_lra(phi.left)} {format_lra(phi.right)})'
