from .formatters import *
from .io import *
