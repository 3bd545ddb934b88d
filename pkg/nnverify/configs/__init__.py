"""
Order of operations matter due to dependencies
"""
from .null import (
    Null,
    NullDict,
    NullType
)
from .      import funcs
from .funcs import (
    ErrorsDict,
    register
)

# Registers the built-in checks
from . import checks

from .definitions import generate
from .config      import GlobalConfig as Config
