"""Console verbosity printing and process-global stdout redirection."""

import sys

from .errors import ErrorCode

_redirect_file = None
_original_stdout = None


def log(verbosity, level, message):
    """Print message when the configured verbosity reaches ``level``."""
    if verbosity >= level:
        print(message)


def console_redirect_to_file(filename):
    global _redirect_file, _original_stdout
    if not filename:
        return ErrorCode.NULLPOINTER
    try:
        handle = open(filename, "w")
    except OSError:
        return ErrorCode.FILENOTCREATED
    if _original_stdout is None:
        _original_stdout = sys.stdout
    if _redirect_file is not None:
        _redirect_file.close()
    _redirect_file = handle
    sys.stdout = handle
    return ErrorCode.SUCCESS


def console_restore():
    global _redirect_file, _original_stdout
    if _redirect_file is not None:
        _redirect_file.close()
        _redirect_file = None
    if _original_stdout is not None:
        sys.stdout = _original_stdout
        _original_stdout = None
    return ErrorCode.SUCCESS
