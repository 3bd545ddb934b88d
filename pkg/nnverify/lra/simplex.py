"""
The Simplex algorithm for conjunctions of linear constraints over exact
rationals.

A Tableau holds equalities  basic = Σ c·nonbasic,  optional lower and upper
bounds per variable (None is unbounded) and the current interpretation.
Variables are compared by creation order, which is the fixed total order
Bland's rule picks the "first" variable from.
"""
import logging

from fractions import Fraction

from ..errors import (
    InfeasibleError,
    PivotError,
    SolverError,
    UnboundedError
)
from ..results import (
    Sat,
    Unsat
)
from ..utils import (
    align,
    fmt_linear
)


Logger = logging.getLogger(__name__)


class Tableau:
    def __init__(self):
        self.order  = []
        self.index  = {}
        self.rows   = {}
        self.lower  = {}
        self.upper  = {}
        self.values = {}
        self.slacks = {}

    def __contains__(self, var):
        return var in self.index

    def __repr__(self):
        return f'<Tableau (vars={len(self.order)}, rows={len(self.rows)})>'

    @property
    def basic(self):
        return sorted(self.rows, key=self.index.__getitem__)

    @property
    def nonbasic(self):
        return [v for v in self.order if v not in self.rows]

    def copy(self):
        new = Tableau()
        new.order  = list(self.order)
        new.index  = dict(self.index)
        new.rows   = {b: dict(row) for b, row in self.rows.items()}
        new.lower  = dict(self.lower)
        new.upper  = dict(self.upper)
        new.values = dict(self.values)
        new.slacks = dict(self.slacks)
        return new

    def add_var(self, var, lower=None, upper=None, value=0):
        if var in self.index:
            raise SolverError(f'Variable {var} already exists')
        self.index[var]  = len(self.order)
        self.order.append(var)
        self.lower[var]  = None if lower is None else Fraction(lower)
        self.upper[var]  = None if upper is None else Fraction(upper)
        self.values[var] = Fraction(value)

    def fresh_slack(self):
        name = f's{len(self.slacks) + 1}'
        while name in self.index:
            name += "'"
        return name

    def add_row(self, basic, expr):
        """
        Registers `basic = expr`. Basic variables inside `expr` are replaced
        by their rows so only non-basic variables appear on the right
        """
        if basic not in self.index:
            self.add_var(basic)
        if basic in self.rows or any(basic in row for row in self.rows.values()):
            raise SolverError(f'{basic} is already constrained by the tableau')

        row = {}
        for var, c in expr.items():
            if var not in self.index:
                self.add_var(var)
            if var in self.rows:
                for k, a in self.rows[var].items():
                    row[k] = row.get(k, 0) + c * a
            else:
                row[var] = row.get(var, 0) + Fraction(c)
        self.rows[basic]   = {k: a for k, a in row.items() if a}
        self.values[basic] = self.row_value(self.rows[basic])

    def add_constraint(self, constraint):
        """
        Adds a fresh slack s = Σ c·x bounded by the constraint's relation.
        Strict relations must be relaxed beforehand
        """
        if constraint.strict:
            raise SolverError(f'Strict constraint {constraint} reached the Simplex tableau')

        s = self.fresh_slack()
        b = constraint.bound
        if constraint.rel == '>=':
            self.add_var(s, lower=b)
        elif constraint.rel == '<=':
            self.add_var(s, upper=b)
        else:
            self.add_var(s, lower=b, upper=b)

        self.slacks[s] = constraint
        self.add_row(s, constraint.mapping)
        return s

    def tighten(self, var, lower=None, upper=None):
        """
        Intersects the bounds of a variable with [lower, upper]
        """
        if var not in self.index:
            self.add_var(var)
        if lower is not None:
            lower = Fraction(lower)
            if self.lower[var] is None or lower > self.lower[var]:
                self.lower[var] = lower
        if upper is not None:
            upper = Fraction(upper)
            if self.upper[var] is None or upper < self.upper[var]:
                self.upper[var] = upper

    def row_value(self, row):
        return sum((a * self.values[k] for k, a in row.items()), Fraction(0))

    def recompute(self):
        for b, row in self.rows.items():
            self.values[b] = self.row_value(row)

    def below(self, var):
        return self.lower[var] is not None and self.values[var] < self.lower[var]

    def above(self, var):
        return self.upper[var] is not None and self.values[var] > self.upper[var]

    def violated(self, var):
        return self.below(var) or self.above(var)

    def can_increase(self, var):
        return self.upper[var] is None or self.values[var] < self.upper[var]

    def can_decrease(self, var):
        return self.lower[var] is None or self.values[var] > self.lower[var]

    def conflicting_bounds(self):
        for var in self.order:
            lo, hi = self.lower[var], self.upper[var]
            if lo is not None and hi is not None and lo > hi:
                return var

    def clamp(self):
        """
        Moves out-of-bound non-basic variables onto their nearest bound
        """
        moved = False
        for var in self.nonbasic:
            if self.below(var):
                self.values[var] = self.lower[var]
                moved = True
            elif self.above(var):
                self.values[var] = self.upper[var]
                moved = True
        if moved:
            self.recompute()

    def model(self):
        return dict(self.values)

    def check_invariants(self):
        for b, row in self.rows.items():
            if self.values[b] != self.row_value(row):
                raise SolverError(f'Interpretation violates the row of {b}')
            for k in row:
                if k in self.rows:
                    raise SolverError(f'Basic variable {k} appears in the row of {b}')
        for var in self.nonbasic:
            if self.violated(var):
                raise SolverError(f'Non-basic variable {var} is out of bounds')

    def dump(self):
        """
        Text dump of rows, bounds and values for debugging
        """
        rows = [(b, '=', fmt_linear(self.rows[b])) for b in self.basic]
        for var in self.order:
            lo = '-inf' if self.lower[var] is None else self.lower[var]
            hi = '+inf' if self.upper[var] is None else self.upper[var]
            rows.append((var, ':', f'[{lo}, {hi}]', f'= {self.values[var]}'))
        return '\n'.join(align(rows))


#%%
def to_simplex_form(constraints):
    """
    Converts a conjunction of non-strict linear constraints into a tableau

    Original variables come first in order of appearance, followed by one
    slack s_i per constraint; s_i = Σ c_ij x_j is bounded by b_i according to
    the relation (equalities get both bounds). The interpretation starts at 0

    Parameters
    ----------
    constraints: list
        LinConstraint objects, relations in <=, >=, =

    Returns
    -------
    t: Tableau
    """
    t = Tableau()
    for c in constraints:
        if c.strict:
            raise SolverError(f'Strict constraint {c} must be relaxed before Simplex')
        for var in c.variables:
            if var not in t:
                t.add_var(var)

    for c in constraints:
        t.add_constraint(c)

    return t


def _pivot(t, xi, xj):
    if xi not in t.rows:
        raise PivotError(f'{xi} is not basic')
    if xj in t.rows or xj not in t.index:
        raise PivotError(f'{xj} is not non-basic')

    row = t.rows[xi]
    c   = row.get(xj, 0)
    if not c:
        raise PivotError(f'Zero pivot coefficient for ({xi}, {xj})')

    del t.rows[xi]
    new = {xi: 1 / c}
    for k, a in row.items():
        if k != xj:
            new[k] = -a / c

    for r in t.rows.values():
        a = r.pop(xj, None)
        if a is None:
            continue
        for k, v in new.items():
            s = r.get(k, 0) + a * v
            if s:
                r[k] = s
            else:
                r.pop(k, None)

    t.rows[xj] = new


def pivot(t, xi, xj):
    """
    Exchanges basic xi with non-basic xj

    Row xi = Σ c_ik x_k is solved for xj,
        xj = (1/c_ij) xi - Σ_{k≠j} (c_ik/c_ij) x_k
    and substituted into every other row. The solution set of the equalities
    and the interpretation are unchanged

    Returns
    -------
    Tableau
        A new tableau, the input is left untouched
    """
    t = t.copy()
    _pivot(t, xi, xj)
    return t


def run_simplex(t, trace=None):
    """
    In-place Simplex: repairs the interpretation of `t` until every bound
    holds. Returns True when satisfiable
    """
    var = t.conflicting_bounds()
    if var is not None:
        Logger.debug(f'Bounds of {var} are contradictory')
        return False

    t.clamp()
    debug = Logger.isEnabledFor(logging.DEBUG)

    while True:
        if debug:
            t.check_invariants()

        xi = next((b for b in t.basic if t.violated(b)), None)
        if xi is None:
            return True

        row = t.rows[xi]
        if t.below(xi):
            target = t.lower[xi]
            ok = lambda k, c: (c > 0 and t.can_increase(k)) or (c < 0 and t.can_decrease(k))
        else:
            target = t.upper[xi]
            ok = lambda k, c: (c < 0 and t.can_increase(k)) or (c > 0 and t.can_decrease(k))

        xj = next((k for k in sorted(row, key=t.index.__getitem__) if ok(k, row[k])), None)
        if xj is None:
            Logger.debug(f'No suitable non-basic variable for {xi}, unsat')
            return False

        if trace is not None:
            trace.append({
                'basis': tuple(t.basic),
                'values': tuple(t.values[v] for v in t.nonbasic),
                'pivot': (xi, xj)
            })

        if debug:
            Logger.debug(f'pivot {xi} <-> {xj}, {xi} := {target}')

        _pivot(t, xi, xj)
        t.values[xi] = target
        t.recompute()


def simplex_solve(t, trace=None):
    """
    Decides the satisfiability of a tableau with Bland's rule

    Parameters
    ----------
    t: Tableau
        Left untouched, the algorithm runs on a copy
    trace: list, default=None
        When given, one entry per pivot is appended

    Returns
    -------
    Sat or Unsat
        Sat carries the value of every tableau variable, slacks included
    """
    t = t.copy()
    if run_simplex(t, trace):
        return Sat(t.model())
    return Unsat()


def simplex_optimize(t, objective, maximize=True, constant=0):
    """
    Optimises a linear objective over a tableau: bounded-variable primal
    Simplex started from a feasible interpretation, entering and leaving
    variables chosen by Bland's rule

    Parameters
    ----------
    t: Tableau
    objective: dict
        {var: coefficient}
    maximize: bool, default=True
    constant: Fraction, default=0
        Added to the optimum

    Returns
    -------
    value: Fraction
        The exact optimum
    model: dict
        An optimal interpretation

    Raises
    ------
    InfeasibleError
        When the tableau has no model
    UnboundedError
        When the objective is unbounded in the requested direction
    """
    for var in objective:
        if var not in t:
            raise SolverError(f'Objective variable {var} is not in the tableau')

    t = t.copy()
    if not run_simplex(t):
        raise InfeasibleError('The constraints are infeasible')

    sign = 1 if maximize else -1
    while True:
        reduced = {}
        for var, d in objective.items():
            if var in t.rows:
                for k, a in t.rows[var].items():
                    reduced[k] = reduced.get(k, 0) + sign * d * a
            else:
                reduced[var] = reduced.get(var, 0) + sign * d

        entering = sorted(
            (k for k, r in reduced.items() if (r > 0 and t.can_increase(k)) or (r < 0 and t.can_decrease(k))),
            key = t.index.__getitem__
        )
        if not entering:
            break

        xk = entering[0]
        d  = 1 if reduced[xk] > 0 else -1

        best = None
        if d > 0 and t.upper[xk] is not None:
            best = (t.upper[xk] - t.values[xk], t.index[xk], xk, None)
        elif d < 0 and t.lower[xk] is not None:
            best = (t.values[xk] - t.lower[xk], t.index[xk], xk, None)

        for b, row in t.rows.items():
            a = row.get(xk)
            if not a:
                continue
            rate = a * d
            if rate > 0 and t.upper[b] is not None:
                cand = ((t.upper[b] - t.values[b]) / rate, t.index[b], b, t.upper[b])
            elif rate < 0 and t.lower[b] is not None:
                cand = ((t.values[b] - t.lower[b]) / -rate, t.index[b], b, t.lower[b])
            else:
                continue
            if best is None or cand[:2] < best[:2]:
                best = cand

        if best is None:
            raise UnboundedError(f'Objective is unbounded along {xk}')

        theta, _, leave, bound = best
        t.values[xk] += d * theta
        if leave != xk:
            _pivot(t, leave, xk)
            t.values[leave] = bound
        t.recompute()

    value = sum((d * t.values[v] for v, d in objective.items()), Fraction(constant))
    return value, t.model()
