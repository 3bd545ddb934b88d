"""
Order of operations matter due to dependencies
"""
from .graph import (
    Affine,
    argmax_class,
    ClassResult,
    evaluate,
    Graph,
    Max,
    Min,
    NodeFn,
    Relu,
    run,
    sigmoid,
    sigmoid_bounds,
    Sigmoid,
    Square,
    topo_order,
    validate_graph
)
from .io import (
    dense_network,
    dump_graph,
    graph_from_dict,
    graph_to_dict,
    load_graph
)
from .generate import (
    random_box,
    random_network
)
