from .flat import (
    affine_af,
    flat_interval_forward,
    ibp_grad,
    layout_of,
    loss_graph,
    mlp_template,
    Params,
    point_forward,
    point_grad,
    relu_af,
    square_af,
    Tape
)
from .train import (
    Dataset,
    evaluate_loss,
    label_property,
    load_dataset,
    Objectives,
    robust_fraction,
    save_dataset,
    train_ibp,
    two_moons
)
