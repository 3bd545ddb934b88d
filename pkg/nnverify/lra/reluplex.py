"""
Reluplex: Simplex extended with native constraints x_i = relu(x_j).

Simplex runs on the linear part, then violated ReLU pairs are repaired by
moving one side of the pair. A pair repaired more than τ times is split into
its active (x_j ≥ 0, x_i = x_j) and inactive (x_j ≤ 0, x_i = 0) cases, or
made linear right away when the bounds of x_j already fix its phase.
"""
import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import (
    List,
    Tuple
)

from ..errors import SolverError
from ..results import (
    Sat,
    Unsat
)
from .simplex import (
    _pivot,
    run_simplex,
    Tableau,
    to_simplex_form
)


Logger = logging.getLogger(__name__)


@dataclass
class ReluplexProblem:
    tableau: Tableau
    pairs: List[Tuple[str, str]]
    tau: int = 5
    relaxed: bool = False

    def satisfied(self, values):
        """
        True when every ReLU pair holds exactly under the interpretation
        """
        return all(values[xi] == max(values[xj], 0) for xi, xj in self.pairs)


def to_reluplex_form(constraints, relu_pairs, tau=5, relaxed=False):
    """
    Simplex form of the linear constraints plus ReLU pairs (x_i, x_j) meaning
    x_i = relu(x_j), each with its implied bound x_i ≥ 0

    Raises
    ------
    SolverError
        On a pair with x_i = x_j or a variable constrained by two pairs as
        their output
    """
    t    = to_simplex_form(constraints)
    seen = set()
    for xi, xj in relu_pairs:
        if xi == xj:
            raise SolverError(f'ReLU pair ({xi}, {xj}) uses one variable twice')
        if xi in seen:
            raise SolverError(f'Duplicate ReLU pair on {xi}')
        seen.add(xi)
        for var in (xi, xj):
            if var not in t:
                t.add_var(var)
        t.tighten(xi, lower=0)

    if tau < 1:
        raise SolverError(f'The split threshold must be positive, got {tau}')

    return ReluplexProblem(t, list(relu_pairs), tau, relaxed)


def _make_nonbasic(t, var, avoid):
    """
    Pivots a basic variable with the first eligible non-basic one by the
    variable order, never `avoid`. Returns False when there is none
    """
    if var not in t.rows:
        return True
    row = t.rows[var]
    for k in sorted(row, key=t.index.__getitem__):
        if k != avoid and row[k]:
            _pivot(t, var, k)
            return True
    return False


def _set(t, var, value):
    t.values[var] = Fraction(value)
    t.recompute()


def _add_equal(t, xi, xj):
    slack = t.fresh_slack()
    t.add_var(slack, lower=0, upper=0)
    t.add_row(slack, {xi: 1, xj: -1})


def _active(t, xi, xj):
    """
    φ ∧ x_j ≥ 0 ∧ x_i = x_j
    """
    t = t.copy()
    t.tighten(xj, lower=0)
    _add_equal(t, xi, xj)
    return t


def _inactive(t, xi, xj):
    """
    φ ∧ x_j ≤ 0 ∧ x_i = 0
    """
    t = t.copy()
    t.tighten(xj, upper=0)
    t.tighten(xi, lower=0, upper=0)
    return t


def _solve(t, pairs, tau, depth, trace, stats):
    counters = [0] * len(pairs)
    while True:
        if not run_simplex(t):
            return None

        values = t.values
        i = next((i for i, (xi, xj) in enumerate(pairs) if values[xi] != max(values[xj], 0)), None)
        if i is None:
            return t.model()

        xi, xj = pairs[i]
        counters[i] += 1
        rest = pairs[:i] + pairs[i+1:]

        lo, hi = t.lower[xj], t.upper[xj]
        if counters[i] > tau or not (_make_nonbasic(t, xi, xj) and _make_nonbasic(t, xj, xi)):
            if lo is not None and lo >= 0:
                _event(trace, 'linearize', (xi, xj), depth, phase='active')
                return _solve(_active(t, xi, xj), rest, tau, depth, trace, stats)
            if hi is not None and hi <= 0:
                _event(trace, 'linearize', (xi, xj), depth, phase='inactive')
                return _solve(_inactive(t, xi, xj), rest, tau, depth, trace, stats)

            stats['splits'] += 1
            _event(trace, 'split', (xi, xj), depth)
            model = _solve(_active(t, xi, xj), rest, tau, depth + 1, trace, stats)
            if model is not None:
                return model
            return _solve(_inactive(t, xi, xj), rest, tau, depth + 1, trace, stats)

        stats['repairs'] += 1
        if counters[i] % 2:
            _event(trace, 'repair', (xi, xj), depth, update=xi)
            _set(t, xi, max(values[xj], 0))
        else:
            _event(trace, 'repair', (xi, xj), depth, update=xj)
            _set(t, xj, values[xi])


def _event(trace, kind, pair, depth, **extra):
    Logger.debug(f'reluplex: {kind} {pair[0]} = relu({pair[1]}) at depth {depth} {extra or ""}')
    if trace is not None:
        trace.append({'event': kind, 'pair': pair, 'depth': depth, **extra})


def reluplex_solve(problem, trace=None):
    """
    Decides a Reluplex problem

    Repairs alternate between I(x_i) ← relu(I(x_j)) and I(x_j) ← I(x_i),
    starting with the former; the violated pair with the lowest index is
    handled first. Splits are explored depth first, active case first

    Parameters
    ----------
    problem: ReluplexProblem
        Left untouched
    trace: list, default=None
        When given, receives one dict per repair, split or linearization

    Returns
    -------
    Sat or Unsat
        Sat carries the value of every tableau variable
    """
    stats = {'repairs': 0, 'splits': 0}
    model = _solve(problem.tableau.copy(), list(problem.pairs), problem.tau, 0, trace, stats)
    Logger.debug(f'reluplex: {stats["repairs"]} repairs, {stats["splits"]} splits')
    if model is None:
        return Unsat(problem.relaxed)
    return Sat(model, problem.relaxed)
