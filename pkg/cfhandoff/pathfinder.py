import os
from pathlib import Path


# Environment variable overriding the directory results are written to.
OUTPUT_DIR_ENV = 'CFHANDOFF_OUTPUT_DIR'

# Fallback output directory, relative to the working directory.
DEFAULT_OUTPUT_DIR = 'results'


def get_root():
    """Returns the absolute path of the directory holding the ``cfhandoff``
    package (repository root for a source checkout, site-packages once
    installed).

    Returns:
    --------
        root (pathlib.Path)
    """
    return Path(__file__).resolve().parent.parent


def get(*args):
    """Returns path of the file, relative to the path of the main directory.
    It helps avoid relative paths, and path-related conflicts.

    Arguments:
    ----------
        *args:
            Folders/files in order of directory-structure.

    Returns:
    --------
        path (pathlib.Path)
            Absolute path based on the main directory.
    """
    path = get_root()

    for arg in args:
        path = path / arg

    return path


def profile_path(name):
    """Returns the path of a shipped configuration profile, e.g. ``desk``."""
    return get('cfhandoff', 'configs', f'{name}.json')


def output_dir(out=None):
    """Resolves the directory experiment results are written to.

    Precedence is the explicit argument, then ``CFHANDOFF_OUTPUT_DIR``, then
    ``./results``.

    Arguments:
    ----------
        out (str or pathlib.Path, optional):
            Directory given on the command line.

    Returns:
    --------
        path (pathlib.Path)
    """
    if out is not None:
        return Path(out)
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
