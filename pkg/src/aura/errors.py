"""Shared exception types."""


class OracleProcessError(RuntimeError):
    """An external helper process failed, timed out, or returned bad output.

    Carries the command, exit status and captured stderr so callers can
    surface useful diagnostics.
    """

    def __init__(self, message: str, command=None, returncode=None, stderr=None):
        super().__init__(message)
        self.command = command
        self.returncode = returncode
        self.stderr = stderr
