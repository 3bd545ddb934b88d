"""
Order of operations matter due to dependencies
"""
from .linear import (
    affine_eq,
    LinConstraint
)
from .simplex import (
    pivot,
    run_simplex,
    simplex_optimize,
    simplex_solve,
    Tableau,
    to_simplex_form
)
from .smt import (
    Atom,
    atom,
    AtomMap,
    atoms_of,
    boolean_abstraction,
    concretize,
    DefaultDelta,
    dpllt_solve,
    format_lra,
    holds,
    implicant,
    lra_nnf,
    lra_vars,
    Margin,
    parse_lra,
    split_equalities,
    strict_check,
    theory_check,
    to_dnf
)
from .reluplex import (
    reluplex_solve,
    ReluplexProblem,
    to_reluplex_form
)
from .encoder import (
    Band,
    build_reluplex_vcs,
    build_vc,
    DefaultCuts,
    encode_graph,
    encode_node,
    encode_sigmoid,
    in_var,
    monotone_bands,
    NodeVars,
    out_var
)
