"""
Utilities for the definitions file, which describes every configuration key
by its dtype, default, short description and checks
"""
import os

import yaml

from ..utils import (
    align,
    load_string
)


Defs = os.path.join(os.path.dirname(__file__), 'defs.yml')

# Keys of a definitions entry
Rules = ('dtype', 'default', 'sdesc', 'checks')

DTypes = {
    'str'     : (str, ),
    'int'     : (int, ),
    'float'   : (int, float),
    'bool'    : (bool, ),
    'list'    : (list, ),
    'rational': (str, int, float)
}

Header = """\
# nnverify configuration. Command-line flags override the values of this file.
#
# Usage: nnverify <command> --config [this file].yml
"""


def load_defs(defs=None):
    """
    Loads a definitions file path, YAML string or dict, the packaged
    definitions by default
    """
    if defs is None:
        defs = Defs
    if isinstance(defs, str):
        defs = load_string(defs)
    return defs or {}


def is_key(rules):
    return isinstance(rules, dict) and 'dtype' in rules


def walk(defs):
    """
    Yields (section, key, rules) for every key of a definitions dict
    """
    for section, keys in defs.items():
        for key, rules in keys.items():
            if is_key(rules):
                yield section, key, rules


def defaults(defs):
    """
    {section: {key: default}}
    """
    data = {section: {} for section in defs}
    for section, key, rules in walk(defs):
        data[section][key] = rules.get('default')
    return data


def checks_of(rules):
    """
    Normalizes the checks of a key into (name, args, kwargs) triples. A check
    is written as its name, or as {name: [args]} or {name: {kwargs}}
    """
    for check in rules.get('checks') or []:
        if isinstance(check, str):
            yield check, [], {}
            continue

        (name, args), = check.items()
        if isinstance(args, dict):
            yield name, [], args
        elif isinstance(args, list):
            yield name, args, {}
        else:
            yield name, [args], {}


def _flow(value):
    # Dump inside a list so scalars come out without a document end marker
    return yaml.safe_dump([value], default_flow_style=True).strip()[1:-1]


def generate(defs=None):
    """
    Generates a commented YAML template of the definitions

    Returns
    -------
    lines: list
        Lines of the template
    """
    defs  = load_defs(defs)
    width = max([len(r['dtype']) for *_, r in walk(defs)] or [0])
    rows  = []
    for section, keys in defs.items():
        rows.append((f'{section}:', f'{"":{width}} | {keys.get("sdesc", "")}'))
        for key, rules in keys.items():
            if is_key(rules):
                rows.append((f'  {key}: {_flow(rules.get("default"))}', f'{rules["dtype"]:{width}} | {rules.get("sdesc", "")}'))

    return Header.splitlines() + align(rows, delimiter='# ', offset=4)
