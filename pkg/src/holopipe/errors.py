"""Error codes and the exception used throughout the library.

Integer values are part of the public contract (they cross the CLI exit
status and the RPC boundary) and must never be renumbered.
"""

from enum import IntEnum


class ErrorCode(IntEnum):
    SUCCESS = 0
    ERROR = 1
    INVALIDHANDLE = 2
    NULLPOINTER = 3
    SETFRAMEBUFFERDISABLED = 4
    INVALIDDIMENSION = 5
    INVALIDPOLARISATION = 6
    INVALIDAXIS = 7
    INVALIDARGUMENT = 8
    MEMORYALLOCATION = 9
    FILENOTCREATED = 10
    FILENOTFOUND = 11


class HoloError(Exception):
    """Raised by internal routines; carries the ErrorCode for the API layer."""

    def __init__(self, code, message=""):
        self.code = ErrorCode(code)
        super().__init__(message or self.code.name)
