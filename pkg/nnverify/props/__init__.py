from .property import (
    Assignment,
    check_counterexample,
    ClassEquals,
    Counterexample,
    desugar,
    holds_concretely,
    InputVar,
    L2Ball,
    LinfBall,
    NotCounterexample,
    Property,
    robustness_property,
    run_property,
    scalar,
    SynonymSets
)
from .io import (
    dump_property,
    parse_property,
    property_from_dict,
    property_to_dict
)
