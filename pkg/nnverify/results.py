"""
Result objects shared by every solver in the package
"""
from dataclasses import (
    dataclass,
    field
)


@dataclass(frozen=True)
class Sat:
    """
    A satisfying interpretation. `delta` is set when strict inequalities were
    relaxed by a margin before solving (δ-sat)
    """
    model: dict = field(default_factory=dict)
    delta: bool = False

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Unsat:
    """
    No model exists. With `delta` set the verdict only holds for models
    that satisfy every strict inequality with margin δ (δ-unsat)
    """
    delta: bool = False

    def __bool__(self):
        return False
