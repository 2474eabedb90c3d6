"""Exception hierarchy shared across the package."""


class InsfuseError(Exception):
    """Base class for all insfuse errors."""


class ParseError(InsfuseError):
    """Malformed input file; carries the offending line number and field."""

    def __init__(self, line_no: int, field: str, message: str):
        super().__init__(f"line {line_no}, field '{field}': {message}")
        self.line_no = line_no
        self.field = field


class ValidationError(InsfuseError):
    """A value violates a declared type invariant."""


class ConsistencyError(InsfuseError):
    """Cross-table inconsistency, e.g. a detection outside its shot's keyframe range."""


class NumericError(InsfuseError):
    """Non-finite or otherwise unusable intermediate in an iterative solver."""


class PipelineError(InsfuseError):
    """A pipeline stage failed; message carries the stage name and topic."""
