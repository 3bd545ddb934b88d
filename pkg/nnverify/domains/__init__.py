"""
Order of operations matter due to dependencies
"""
from .interval import (
    Box,
    Interval,
    iv_add,
    iv_affine,
    iv_analyze,
    iv_max,
    iv_min,
    iv_monotone,
    iv_mul,
    iv_node,
    iv_relu,
    iv_run,
    iv_scale,
    iv_sigmoid,
    iv_square,
    to_box
)
from .zonotope import (
    sigmoid_line,
    ZDim,
    zono_add,
    zono_affine,
    zono_analyze,
    zono_bounds,
    zono_node,
    zono_relu,
    zono_run,
    zono_sigmoid,
    zono_square,
    Zonotope
)
from .polyhedron import (
    gen_var,
    lp_bounds,
    poly_affine,
    poly_analyze,
    poly_bounds,
    poly_relu,
    poly_run,
    poly_sigmoid,
    poly_square,
    PolyState,
    Polyhedron
)
