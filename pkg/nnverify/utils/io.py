"""
IO related utilities
"""
import json
import logging
import os

from fractions import Fraction

import yaml


Logger = logging.getLogger(__name__)


def mkdir(path):
    """
    Creates the parent directories of a file path if they do not exist
    """
    path, _ = os.path.split(path)
    if path and not os.path.exists(path):
        try:
            os.makedirs(path, exist_ok=True)
        except Exception as e:
            Logger.exception(f'Failed to create directory {path}')
            raise e


def load_string(string):
    """
    Loads YAML data either from a file path or from a raw string

    Parameters
    ----------
    string: str
        Path to a YAML (or JSON) file or the raw text itself

    Returns
    -------
    data: any
        Parsed YAML object
    """
    if os.path.exists(string):
        with open(string, 'r') as file:
            return yaml.safe_load(file)
    return yaml.safe_load(string)


def load_json(string):
    """
    Loads JSON either from a file path or from a raw string. Returns the data
    and the directory relative paths inside it should resolve against
    """
    if os.path.exists(string):
        with open(string, 'r') as file:
            return json.load(file), os.path.dirname(os.path.abspath(string))
    return json.loads(string), os.getcwd()


def save_json(data, output, indent=2):
    """
    Writes data as JSON, creating parent directories as needed
    """
    mkdir(output)
    with open(output, 'w') as file:
        json.dump(data, file, indent=indent, default=_encode)
        file.write('\n')


def dumps(data, indent=None):
    """
    json.dumps that understands Fractions
    """
    return json.dumps(data, indent=indent, default=_encode)


def _encode(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f'Object of type {type(obj).__name__} is not JSON serializable')


def to_fraction(value):
    """
    Parses a rational from the formats accepted in model and property files:
    "p/q" strings, decimal strings, ints and floats (converted exactly)
    """
    if isinstance(value, bool):
        raise ValueError(f'Not a rational: {value!r}')
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ValueError(f'Zero denominator in {value!r}')
    raise ValueError(f'Not a rational: {value!r}')
