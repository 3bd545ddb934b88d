"""
Pretty printers
"""


def align(rows, delimiter=' ', offset=1, prepend=''):
    """
    Formats rows of strings into left aligned columns

    Parameters
    ----------
    rows: iterable
        Iterable of tuples of strings. Rows may have different lengths, a
        short row simply stops early
    delimiter: str, default=' '
        Inserted between columns after the padding
    offset: int, default=1
        Extra spaces after the widest entry of each column
    prepend: str, default=''
        String placed in front of every line

    Returns
    -------
    lines: list
        One formatted string per row

    Examples
    --------
    >>> align([('x', '=', '1/2'), ('s10', '=', '-3')])
    ['x   = 1/2', 's10 = -3']
    """
    rows   = [tuple(map(str, row)) for row in rows]
    widths = {}
    for row in rows:
        for i, item in enumerate(row[:-1]):
            widths[i] = max(widths.get(i, 0), len(item))

    lines = []
    for row in rows:
        parts = []
        for i, item in enumerate(row):
            if i < len(row) - 1:
                parts.append(item.ljust(widths[i] + offset - 1) + delimiter)
            else:
                parts.append(item)
        lines.append(prepend + ''.join(parts).rstrip())
    return lines


def fmt_linear(coeffs, names=str):
    """
    Formats a linear combination {var: coeff} as a readable sum, eg. 'x + -2 y'
    """
    terms = []
    for var, coeff in coeffs.items():
        name = names(var)
        if coeff == 1:
            terms.append(name)
        elif coeff == -1:
            terms.append(f'-{name}')
        else:
            terms.append(f'{coeff} {name}')
    return ' + '.join(terms) or '0'
