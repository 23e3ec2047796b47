"""Contains small utilities shared across the simulator: logging set-up,
unit conversions, the Gaussian Q-function and deterministic seeding.
"""
import sys
import logging

import numpy as np

from scipy.stats import norm
from scipy.spatial.distance import euclidean


# Console format, kept identical to the ``[INFO] ...`` progress messages of
# the shell scripts.
LOG_FORMAT = '[%(levelname)s] %(message)s'

# Name of the package-level logger every module logger hangs off.
ROOT_LOGGER = 'cfhandoff'

# Significant digits used whenever floats are written to disk.
FLOAT_DIGITS = 9


def get_logger(name):
    """Returns a module logger attached to the package handler.

    The handler is installed once, on first use, on the ``cfhandoff``
    logger; module loggers propagate to it.

    Arguments:
    ----------
        name (str):
            Usually ``__name__`` of the calling module.

    Returns:
    --------
        logger (logging.Logger)
    """
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.setLevel(logging.INFO)
    return logging.getLogger(name)


def set_verbosity(level):
    """Sets the level of the package logger (e.g. ``logging.DEBUG``)."""
    get_logger(ROOT_LOGGER).setLevel(level)


def q_function(x):
    """Gaussian tail probability Q(x) = P(Z > x) for Z ~ N(0, 1).

    Arguments:
    ----------
        x (float or numpy.ndarray):
            Argument, may be +/-inf.

    Returns:
    --------
        (float or numpy.ndarray):
            Tail probability.
    """
    return norm.sf(x)


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def dbm_to_watts(value_dbm):
    return db_to_linear(np.asarray(value_dbm, dtype=float) - 30.0)


def euclidean_distance(point, other_point):
    """Utility to compute the Euclidean distance between two 2-D points.

    Arguments:
    ----------
        point (array_like object):
            Input point.
        other_point (array_like object):
            Input point.

    Returns:
    --------
        (float):
            Euclidean distance.
    """
    return float(euclidean(point, other_point))


def derive_rng(*keys):
    """Builds an independent random generator from a tuple of integers.

    The same keys always give the same stream, independently of the order in
    which streams are created, so trials and sub-problems can be scheduled on
    any worker.

    Arguments:
    ----------
        *keys (int):
            Non-negative integers, e.g. ``(master_seed, trial, cycle)``.

    Returns:
    --------
        rng (numpy.random.Generator)
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def format_float(value):
    """Fixed float formatting used by every exporter."""
    return f'{float(value):.{FLOAT_DIGITS}g}'


def top_k(values, k):
    """Indices of the ``k`` largest values, ties broken by lowest index.

    Arguments:
    ----------
        values (numpy.ndarray):
            1-D array of scores.
        k (int):
            Number of indices to return.

    Returns:
    --------
        (tuple):
            Sorted tuple of the selected indices.
    """
    order = np.argsort(-np.asarray(values, dtype=float), kind='stable')
    return tuple(sorted(int(i) for i in order[:k]))
