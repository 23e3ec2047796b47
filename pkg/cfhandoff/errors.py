"""Exception hierarchy shared by the library and the command line.
"""


# Process exit codes used by ``cfhandoff.main``.
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


class CfHandoffError(Exception):
    """Base class for every error raised by ``cfhandoff``."""
    exit_code = EXIT_CONFIG


class ConfigurationError(CfHandoffError, ValueError):
    """Invalid or infeasible parameters."""
    exit_code = EXIT_CONFIG


class ContractViolation(CfHandoffError, ValueError):
    """A caller broke the pre-condition of an operation."""
    exit_code = EXIT_CONFIG


class NumericalError(CfHandoffError, ArithmeticError):
    """A numerical routine failed, e.g. a covariance factorization."""
    exit_code = EXIT_CONFIG


class ValidationFailure(CfHandoffError):
    """An oracle suite disagreed with the closed forms."""
    exit_code = EXIT_VALIDATION


class ExportError(CfHandoffError, OSError):
    """Writing results failed.

    Parameters:
    -----------
        path (pathlib.Path or str):
            File or directory the failing operation touched.
        reason (str):
            Underlying error message.
    """
    exit_code = EXIT_IO

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f'Could not write {path}: {reason}')
