"""
Boolean constant propagation and the DPLL procedure.

No clause learning, no restarts: branching is on the lowest-id unassigned
variable, true first, which makes every run deterministic.
"""
import logging

from ..results import (
    Sat,
    Unsat
)
from .cnf import CnfFormula


Logger = logging.getLogger(__name__)


def _assign(clauses, lit):
    """
    Makes `lit` true: drops satisfied clauses and removes -lit from the rest.
    Returns None when a clause becomes empty
    """
    out = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            clause = tuple(l for l in clause if l != -lit)
            if not clause:
                return None
        out.append(clause)
    return out


def _bcp(clauses):
    forced = {}
    while clauses:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        forced[abs(unit)] = unit > 0
        clauses = _assign(clauses, unit)
        if clauses is None:
            return None, forced
    return clauses, forced


def bcp(phi):
    """
    Boolean constant propagation: while there is a unit clause, make its
    literal true and simplify

    Parameters
    ----------
    phi: CnfFormula

    Returns
    -------
    result: CnfFormula or bool
        True when every clause was satisfied, False on a conflict (empty
        clause), otherwise the simplified formula
    forced: dict
        Every assignment made by propagation {var: bool}
    """
    clauses, forced = _bcp(list(phi.clauses))
    if clauses is None:
        return False, forced
    if not clauses:
        return True, forced
    return CnfFormula(tuple(clauses), phi.num_vars), forced


def dpll(phi):
    """
    Decides satisfiability of a CNF formula

    Parameters
    ----------
    phi: CnfFormula

    Returns
    -------
    Sat or Unsat
        Sat carries a possibly partial model: variables that do not matter
        for satisfying φ may be absent
    """
    stats = {'decisions': 0}
    model = _dpll(list(phi.clauses), stats)
    Logger.debug(f'dpll: {stats["decisions"]} decisions on {len(phi)} clauses')
    if model is None:
        return Unsat()
    return Sat(model)


def _dpll(clauses, stats):
    clauses, forced = _bcp(clauses)
    if clauses is None:
        return None
    if not clauses:
        return forced

    var = min(abs(l) for c in clauses for l in c)
    for lit in (var, -var):
        stats['decisions'] += 1
        branch = _assign(clauses, lit)
        if branch is None:
            continue
        model = _dpll(branch, stats)
        if model is not None:
            model[var] = lit > 0
            model.update(forced)
            return model
    return None


def extend_model(model, num_vars, default=False):
    """
    Extends a partial model to a total one over variables 1..num_vars
    """
    total = {v: default for v in range(1, num_vars + 1)}
    total.update(model)
    return total
