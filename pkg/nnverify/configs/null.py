"""
Null values for missing configuration keys
"""


class NullType(type):
    """
    Stands in for a missing configuration value. Attribute and item access
    return Null again, so `config.verify.missing.deeper` does not raise, and
    Null compares equal only to None and itself
    """
    def __hash__(cls):
        return hash(None)

    def __bool__(cls):
        return False

    def __eq__(cls, other):
        return other is None or other is cls

    def __getattr__(cls, key):
        return cls

    def __getitem__(cls, key):
        return cls

    def __repr__(cls):
        return 'Null'


class Null(metaclass=NullType):
    ...


class NullDict(dict):
    """
    Section of a Config: a dict with dot notation that returns Null for
    missing keys
    """
    def __deepcopy__(self, memo):
        new = type(self)({key: _copy(value) for key, value in self.items()})
        memo[id(self)] = new
        return new

    def __getattr__(self, key):
        return super().get(key, Null)

    def __getitem__(self, key):
        return self.__getattr__(key)

    def __setattr__(self, key, value):
        self[key] = value


def _copy(value):
    if isinstance(value, NullDict):
        return value.__deepcopy__({})
    if isinstance(value, list):
        return [_copy(v) for v in value]
    return value
