"""
Exceptions raised by nnverify. Everything derives from NNVerifyError so
callers (the CLI especially) can catch the package's errors in one place.
"""


class NNVerifyError(Exception):
    ...


class GraphError(NNVerifyError):
    """
    Structural problems with a network graph or its inputs
    """


class PropertyError(NNVerifyError):
    """
    A property references something that does not exist or does not fit
    """


class PropertyParseError(PropertyError):
    def __init__(self, message, location=''):
        self.location = location
        if location:
            message = f'{location}: {message}'
        super().__init__(message)


class EncodingError(NNVerifyError):
    """
    A node or atom cannot be expressed in linear real arithmetic
    """


class SolverError(NNVerifyError):
    ...


class PivotError(SolverError):
    ...


class InfeasibleError(SolverError):
    ...


class UnboundedError(SolverError):
    ...


class DomainError(NNVerifyError):
    """
    An abstract element was used outside of its invariants
    """


class UnsupportedProperty(NNVerifyError):
    """
    The property has a shape the requested verification path cannot handle
    """


class TrainingDiverged(NNVerifyError):
    ...


class ConfigError(NNVerifyError):
    def __init__(self, errors):
        self.errors = errors
        lines = [f'{key}: {msg}' for key, msg in errors.items()]
        super().__init__('Invalid configuration:\n  ' + '\n  '.join(lines))


class DatasetError(NNVerifyError):
    """
    Malformed training data: ragged rows, missing values or labels outside
    {0, 1}
    """
