"""Exception hierarchy shared across the package.

Two branches matter to callers: FormatError for anything that went wrong
while parsing or serializing a file or byte stream, and ValidationError for
domain invariants broken on in-memory data. The CLI maps the branches to
distinct exit codes (3 and 4 respectively).
"""


class PpgError(Exception):
    """Base class for all package errors."""


class ValidationError(PpgError):
    """A domain invariant does not hold (bad shapes, sums, ranges, ...)."""


class FormatError(PpgError):
    """A byte stream or text file could not be parsed or written."""


class BadMagicError(FormatError):
    """The stream does not start with the expected magic bytes."""


class VersionMismatchError(FormatError):
    """The container declares a format version this reader does not speak."""


class TruncatedPayloadError(FormatError):
    """The stream ended before the declared payload was complete."""


class LabelCountMismatchError(FormatError):
    """The number of phoneme labels does not match the declared count."""


class AlignmentFormatError(FormatError):
    """An alignment TSV line is malformed or inconsistent."""


class PitchFormatError(FormatError):
    """A pitch TSV line is malformed or the time axis is not uniform."""


class RuleSyntaxError(FormatError):
    """A rule file line failed to compile; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
