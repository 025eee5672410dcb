"""Error hierarchy shared by every module.

Each error carries enough context (module, operation, offending record) for
the CLI to emit a single machine-parsable line and pick the right exit code.
"""

from __future__ import annotations


class MicrofiscError(Exception):
    """Base class; subclasses map onto CLI exit codes."""

    exit_code = 1

    def __init__(self, message: str, *, module: str = "", op: str = "", record: str = ""):
        self.module = module
        self.op = op
        self.record = record
        super().__init__(message)

    def __str__(self) -> str:
        parts = []
        if self.module:
            parts.append(f"module={self.module}")
        if self.op:
            parts.append(f"op={self.op}")
        if self.record:
            parts.append(f"record={self.record}")
        parts.append(f"msg={self.args[0]}")
        return " ".join(parts)


class InputError(MicrofiscError):
    """Malformed or inconsistent input data (exit code 2)."""

    exit_code = 2


class ConfigError(MicrofiscError):
    """Invalid configuration file or override (exit code 3)."""

    exit_code = 3


class NumericalError(MicrofiscError):
    """A computation could not meet its stated contract (exit code 4)."""

    exit_code = 4
