"""
Logging setup for the command line. Library modules only ever create their
own module-level loggers; handlers are attached here, once, by the CLI.
"""
import logging
import sys

from ..utils import mkdir


Format = '%(asctime)s %(levelname)-8s %(name)s: %(message)s'
DateFmt = '%H:%M:%S'


def init(level='INFO', file=None):
    """
    Attaches handlers to the root logger. Logs go to stderr so that stdout
    stays reserved for JSON verdicts

    Parameters
    ----------
    level: str or int, default='INFO'
        Logging level name or number
    file: str, default=None
        Optional path to also write the log to

    Returns
    -------
    logger: logging.Logger
        The configured root logger
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())

    root = logging.getLogger()
    root.setLevel(level)

    # Reinitialising replaces the handlers rather than stacking them
    for handler in list(root.handlers):
        root.removeHandler(handler)

    formatter = logging.Formatter(Format, datefmt=DateFmt)

    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    root.addHandler(stream)

    if file:
        mkdir(file)
        handler = logging.FileHandler(file, mode='w')
        handler.setFormatter(formatter)
        root.addHandler(handler)

    return root
