"""
Built-in checks of the definitions file. A check receives the value and the
arguments written in the definitions file and returns True when it passes,
otherwise an error message
"""
import os

from ..utils import to_fraction
from .funcs import register


@register()
def oneof(value, *options):
    """
    Checks a value is one of the listed options
    """
    if value in options:
        return True
    return f'Invalid option: {value!r}, should be one of: {list(options)!r}'


@register()
def compare(value, lt=None, lte=None, gt=None, gte=None):
    errors = []
    if lt is not None and not value < lt:
        errors.append(f'Value must be less than: {lt!r}')
    if lte is not None and not value <= lte:
        errors.append(f'Value must be less than or equal to: {lte!r}')
    if gt is not None and not value > gt:
        errors.append(f'Value must be greater than: {gt!r}')
    if gte is not None and not value >= gte:
        errors.append(f'Value must be greater than or equal to: {gte!r}')
    return errors or True


@register()
def rational(value, positive=False):
    """
    Checks the value parses as a rational: "p/q", a decimal or a number

    Parameters
    ----------
    value: any
    positive: bool, default=False
        Also require the rational to be > 0
    """
    try:
        q = to_fraction(value)
    except ValueError as e:
        return str(e)
    if positive and q <= 0:
        return f'Value must be a positive rational: {value!r}'
    return True


@register()
def ascending(value):
    """
    Checks a list of rationals is strictly ascending
    """
    try:
        cuts = [to_fraction(v) for v in value]
    except (TypeError, ValueError) as e:
        return f'Expected a list of rationals ({e})'
    if any(a >= b for a, b in zip(cuts, cuts[1:])):
        return f'Cut points must be strictly ascending: {value!r}'
    return True


@register()
def widths(value):
    """
    Checks hidden layer widths are positive integers
    """
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in value):
        return f'Expected a list of positive integers: {value!r}'
    return True


@register()
def isfile(value):
    if not value:
        return True
    return os.path.isfile(value) or f'File Not Found: {value}'
