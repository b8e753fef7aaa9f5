"""
Exception hierarchy for semgraft.

Every failure caused by bad input derives from SemgraftError; the CLI maps
these to exit status 1 with a single-line cause.
"""

from typing import Optional


class SemgraftError(Exception):
    """Root of all semgraft errors."""


class TreeError(SemgraftError, ValueError):
    """A Tree value that breaks the node invariants."""


class TreeParseError(SemgraftError, ValueError):
    def __init__(self, message: str, offset: int, line_number: Optional[int] = None):
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{message} at offset {offset}")
        self.reason = message
        self.offset = offset
        self.line_number = line_number


class SpanError(SemgraftError, ValueError):
    pass


class StandoffError(SemgraftError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{message}")
        self.line_number = line_number


class GraftError(SemgraftError, ValueError):
    pass


class AlignmentError(SemgraftError, ValueError):
    pass


class CorpusError(SemgraftError):
    pass


class GrammarFormatError(SemgraftError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{message}")
        self.line_number = line_number


class ScoringError(SemgraftError, ValueError):
    pass


class BleuError(SemgraftError, ValueError):
    pass


class ConfigError(SemgraftError, ValueError):
    pass
