"""
"""
__version__ = '2026.10.0'

from nnverify.errors  import *
from nnverify.results import (
    Sat,
    Unsat
)
from nnverify.graph import (
    Affine,
    argmax_class,
    dense_network,
    dump_graph,
    evaluate,
    Graph,
    load_graph,
    Max,
    Min,
    random_network,
    Relu,
    run,
    Sigmoid,
    Square,
    topo_order,
    validate_graph
)
from nnverify.sat import (
    dpll,
    tseitin
)
from nnverify.lra import (
    build_reluplex_vcs,
    build_vc,
    dpllt_solve,
    parse_lra,
    reluplex_solve,
    simplex_optimize,
    simplex_solve
)
from nnverify.props import (
    check_counterexample,
    dump_property,
    parse_property,
    Property,
    robustness_property
)
from nnverify.domains import (
    Box,
    Interval,
    iv_analyze,
    poly_analyze,
    Polyhedron,
    zono_analyze,
    Zonotope
)
from nnverify.verify import (
    check_class,
    eps_sweep,
    run_verification,
    Verdict,
    verify_many,
    verify_reluplex,
    verify_robustness,
    verify_smt
)
from nnverify.train import (
    Dataset,
    load_dataset,
    mlp_template,
    Params,
    robust_fraction,
    train_ibp,
    two_moons
)

# Instantiate before the CLI
from nnverify.configs     import (
    Config,
    Null,
    NullDict,
    register
)
from nnverify.configs.cli import CLI
