"""Exception types shared across the package.

Every error raised by chunkex derives from :class:`ChunkexError`, so callers
(and the CLI) can catch one base class per stage. Errors that carry an
identifying detail (a line number, a chunk id, a reason string) expose it as
an attribute in addition to the message.
"""

from __future__ import annotations


class ChunkexError(Exception):
    """Base class for all chunkex errors."""


# --- corpus ---------------------------------------------------------------


class EmptyDocument(ChunkexError):
    """Document text is blank after whitespace trimming."""


class MalformedRecord(ChunkexError):
    def __init__(self, line_number: int, reason: str = "malformed record"):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class DuplicateId(ChunkexError):
    def __init__(self, doc_id: str):
        super().__init__(f"duplicate id: {doc_id!r}")
        self.doc_id = doc_id


# --- backends -------------------------------------------------------------


class BackendUnavailable(ChunkexError):
    """A remote backend could not be reached after the configured retries."""


class MalformedBackendOutput(ChunkexError):
    def __init__(self, chunk_id: str | None, reason: str = "malformed backend output"):
        target = chunk_id if chunk_id is not None else "<batch>"
        super().__init__(f"{target}: {reason}")
        self.chunk_id = chunk_id
        self.reason = reason


# --- queries and composition ----------------------------------------------


class EmptyQuery(ChunkexError):
    """Query text is empty or whitespace-only."""


class LengthMismatch(ChunkexError):
    """Token and label sequences differ in length."""


class MissingKnowledge(ChunkexError):
    def __init__(self, case_id: int, chunk_id: str):
        super().__init__(
            f"case {case_id} needs chunk knowledge but none given for {chunk_id!r}"
        )
        self.case_id = case_id
        self.chunk_id = chunk_id


class DoublePrefix(ChunkexError):
    """Text already carries a role prefix that would be applied twice."""


# --- index ------------------------------------------------------------------


class DimensionMismatch(ChunkexError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected dim {expected}, got {got}")
        self.expected = expected
        self.got = got


class CorruptSnapshot(ChunkexError):
    def __init__(self, reason: str):
        super().__init__(f"corrupt snapshot: {reason}")
        self.reason = reason


# --- evaluation -------------------------------------------------------------


class EmptyQuerySet(ChunkexError):
    """An evaluation was requested over zero queries."""


class EmptySequence(ChunkexError):
    """A token-vector sequence required to be non-empty was empty."""


class MissingField(ChunkexError):
    def __init__(self, name: str):
        super().__init__(f"missing prompt field: {name!r}")
        self.name = name


class UnparseableVerdict(ChunkexError):
    """No line of the judge response is exactly 'pass' or 'fail'."""


class ConfigError(ChunkexError):
    """Configuration file or environment override is invalid."""
