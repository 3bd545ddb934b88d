"""
Registry of named check functions the definitions file refers to
"""
import logging

from .null import Null


Logger = logging.getLogger(__name__)

# {name: func}, every registered function
Funcs = {}


class ErrorsDict(dict):
    """
    Nested {key: message(s)} report of a validation. Check functions return
    True or None when they pass, a string or a list of strings when they fail
    """
    def reduce(self):
        reduced = ErrorsDict()
        for key, val in self.items():
            if isinstance(val, ErrorsDict):
                new = val.reduce()
                if new:
                    reduced[key] = new
            elif isinstance(val, list):
                val = [v for v in val if isinstance(v, str)]
                if val:
                    reduced[key] = val if len(val) > 1 else val[0]
            elif isinstance(val, str):
                reduced[key] = val
        return reduced

    def flatten(self, prefix=''):
        """
        {dotted.key: message}
        """
        flat = {}
        for key, val in self.items():
            if isinstance(val, ErrorsDict):
                flat.update(val.flatten(f'{prefix}{key}.'))
            else:
                flat[f'{prefix}{key}'] = val
        return flat


def register(name=None):
    """
    Registers a check under its function name or `name`. The registered
    function is wrapped so an exception becomes its failure message
    """
    def wrap(func):
        def protect(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                Logger.exception(f'Check {key!r} raised an exception:')
                return str(e)

        key = name or func.__name__
        if key in Funcs:
            Logger.warning(f'Function is already registered and will be replaced: {key!r}')

        protect.__doc__  = func.__doc__
        protect.__name__ = func.__name__
        Funcs[key] = protect
        Logger.debug(f'Registered function {key!r}')
        return protect

    return wrap


def get_register(key):
    """
    Retrieves a registered function, Null when there is none
    """
    if key not in Funcs:
        Logger.error(f'Not a registered function: {key!r}')
        return Null
    return Funcs[key]
