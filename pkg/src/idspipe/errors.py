"""Exception hierarchy shared across the pipeline.

Exit-code mapping used by the CLI: usage errors exit 1, ``DataError`` (and
OS-level file problems) exit 2, anything else exits 3 as an internal fault.
"""


class DataError(Exception):
    """Invalid or inconsistent input data."""

    exit_code = 2


class ParseError(DataError):
    """Malformed record file; message carries the 1-based line number."""


class SchemaError(DataError):
    """Dataset does not conform to the expected feature schema."""


class UnknownLabelError(DataError):
    """Label outside the declared class set."""


class SamplingError(DataError):
    """Requested sample cannot be drawn from the available records."""


class InternalError(Exception):
    """Invariant violation inside the pipeline itself."""

    exit_code = 3


class StageError(Exception):
    """Failure attributed to a named pipeline stage."""

    def __init__(self, stage: str, message: str, exit_code: int = 3):
        super().__init__(message)
        self.stage = stage
        self.exit_code = exit_code

    def __str__(self) -> str:
        return f"stage {self.stage}: {super().__str__()}"
