from .formula import (
    And,
    conj,
    Const,
    disj,
    eval_formula,
    FALSE,
    fv,
    is_literal,
    Not,
    Or,
    PropFormula,
    size,
    to_nnf,
    TRUE,
    Var
)
from .cnf import (
    CnfFormula,
    from_dimacs,
    to_dimacs,
    tseitin
)
from .dpll import (
    bcp,
    dpll,
    extend_model
)
