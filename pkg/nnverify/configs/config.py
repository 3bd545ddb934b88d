"""
The configuration of nnverify

Config merges, in order of precedence:
    1. The defaults of the definitions file
    2. A YAML config file, string or dict
    3. A patch of dotted keys, usually the command-line flags

and acts as a Singleton-like instance: the module exposes one global Config
that calling with new data re-initializes
"""
import copy
import logging

from ..errors import ConfigError
from ..utils import load_string
from . import definitions
from .funcs import (
    ErrorsDict,
    get_register
)
from .null import (
    Null,
    NullDict
)


Logger = logging.getLogger(__name__)


def _nulldict(data):
    if isinstance(data, dict):
        return NullDict({key: _nulldict(value) for key, value in data.items()})
    return data


class Config:
    def __init__(self, data=None, patch=None, defs=None, validate=False):
        """
        Parameters
        ----------
        data: str or dict, default=None
            Path to a YAML file, a YAML string or a dict of sections
        patch: dict, default=None
            {'section.key': value} applied over the data. None values are
            skipped so unset flags keep the configured value
        defs: str or dict, default=None
            Definitions, the packaged defs.yml by default
        validate: bool, default=False
            Raise ConfigError when the result does not validate
        """
        self.__dict__['_data']  = data
        self.__dict__['_defs']  = definitions.load_defs(defs)
        self.__dict__['_patch'] = dict(patch or {})

        sects = definitions.defaults(self._defs)
        for section, keys in self.parse(data).items():
            if isinstance(keys, dict) and isinstance(sects.get(section), dict):
                sects[section].update(keys)
            else:
                sects[section] = keys
        self.__dict__['_sect'] = _nulldict(sects)

        self.patch(self._patch)
        if validate:
            self.validate()

    def __call__(self, data=None, patch=None, defs=None, *, local=False, **kwargs):
        """
        Re-initializes the global instance or creates a local one

        Returns
        -------
        config: Config
            self when local is False, otherwise an independent instance
        """
        if data is None and patch is None and defs is None:
            if local:
                Logger.debug('No data, local True, returning a deep copy')
                return self.copy()
            return self

        if local:
            return type(self)(data, patch, self._defs if defs is None else defs, **kwargs)

        Logger.debug('Reinitializing the global Config')
        self.__init__(data, patch, defs, **kwargs)
        return self

    def __getattr__(self, key):
        if key.startswith('__'):
            raise AttributeError(key)
        return self._sect[key]

    def __setattr__(self, key, value):
        self._sect[key] = _nulldict(value)

    def __getitem__(self, key):
        return self._sect[key]

    def __contains__(self, key):
        return key in self._sect

    def __iter__(self):
        return iter(self._sect)

    def __repr__(self):
        return f'<Config . (Sects={list(self._sect)})>'

    @staticmethod
    def parse(data):
        """
        Loads the data into a dict of sections
        """
        if data is None:
            return {}
        if isinstance(data, str):
            try:
                data = load_string(data)
            except Exception as e:
                raise ConfigError({'config': f'not valid YAML ({e})'})
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError({'config': f'expected a mapping of sections, got {type(data).__name__}'})
        return data

    def __deepcopy__(self, memo):
        return self.copy()

    def copy(self):
        new = object.__new__(type(self))
        new.__dict__.update(copy.deepcopy({key: val for key, val in self.__dict__.items() if key != '_sect'}))
        new.__dict__['_sect'] = copy.deepcopy(self._sect)
        return new

    def patch(self, flags):
        """
        Sets dotted keys, skipping None values

        Parameters
        ----------
        flags: dict
            {'section.key': value}

        Returns
        -------
        self: Config
        """
        for dotted, value in flags.items():
            if value is None:
                continue
            section, _, key = dotted.partition('.')
            if not key:
                raise ConfigError({dotted: 'patch keys are written section.key'})
            if not isinstance(self._sect[section], NullDict):
                self._sect[section] = NullDict()
            self._sect[section][key] = _nulldict(value)
            Logger.debug(f'Patched {dotted} = {value!r}')
        return self

    def validate(self, _raise=True):
        """
        Checks every key against the definitions: unknown keys, dtypes and
        the registered checks

        Parameters
        ----------
        _raise: bool, default=True
            Raise a ConfigError listing every failure instead of returning

        Returns
        -------
        errors: ErrorsDict
            Reduced report, empty when the configuration is valid
        """
        errors = ErrorsDict()
        for section, keys in self._sect.items():
            report = errors.setdefault(section, ErrorsDict())
            if section not in self._defs:
                report['*'] = 'unknown section'
                continue
            if not isinstance(keys, dict):
                report['*'] = f'expected a section, got {keys!r}'
                continue

            for key, value in keys.items():
                rules = self._defs[section].get(key)
                if not definitions.is_key(rules):
                    report[key] = 'unknown key'
                    continue
                report[key] = self._check(value, rules)

        errors = errors.reduce()
        if errors:
            if _raise:
                raise ConfigError(errors.flatten())
            for key, msg in errors.flatten().items():
                Logger.error(f'{key}: {msg}')
        return errors

    @staticmethod
    def _check(value, rules):
        if value is None or value is Null:
            return None
        types = definitions.DTypes.get(rules['dtype'], (object, ))
        if not isinstance(value, types) or (bool not in types and isinstance(value, bool)):
            return f'expected {rules["dtype"]}, got {type(value).__name__} {value!r}'

        messages = []
        for name, args, kwargs in definitions.checks_of(rules):
            func = get_register(name)
            if func is Null:
                messages.append(f'unknown check {name!r}')
                continue
            result = func(value, *args, **kwargs)
            if isinstance(result, str):
                messages.append(result)
            elif isinstance(result, list):
                messages.extend(result)
        return messages

    def to_dict(self):
        """
        Plain dict of the sections
        """
        return copy.deepcopy({key: dict(val) if isinstance(val, dict) else val for key, val in self._sect.items()})


# Transforms the module into a Singleton-like instance
GlobalConfig = Config()
