"""Error hierarchy with stable machine-readable codes.

Every failure surfaced to a caller carries a short slug (``code``) that is
stable across releases, plus the process exit status the CLI maps it to:
2 for validation problems, 3 for I/O problems, 4 for internal invariant
violations.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 4

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    def one_line(self) -> str:
        """Single-line diagnostic, ``error[<code>]: <message>``."""
        msg = " ".join(str(self).split())
        return f"error[{self.code}]: {msg}"


class ValidationError(ToolkitError):
    """Bad inputs: malformed files, out-of-range values, shape mismatches."""

    exit_code = 2


class InputOutputError(ToolkitError):
    """Filesystem-level failures while reading or writing."""

    exit_code = 3


class InternalError(ToolkitError):
    """A computed result violated an invariant the toolkit guarantees."""

    exit_code = 4
