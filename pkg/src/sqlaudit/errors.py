"""Exception types shared across the toolkit."""

from __future__ import annotations


class SqlAuditError(Exception):
    """Base class for all toolkit errors."""


# --- parsing ---------------------------------------------------------------


class ParseError(SqlAuditError):
    """Raised when the tokenizer or parser rejects the input."""

    def __init__(self, message: str, offset: int = 0, expected: str | None = None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class EmptyInput(ParseError):
    """Raised for blank query text."""

    def __init__(self) -> None:
        super().__init__("empty query text", 0)


class Unsupported(ParseError):
    """Raised for syntactically valid SQL outside the benchmark grammar subset."""

    def __init__(self, construct: str, offset: int = 0):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", offset)


# --- column resolution ------------------------------------------------------


class ResolutionError(SqlAuditError):
    """Base class for name-resolution failures."""


class UnresolvedColumn(ResolutionError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"column not found in any in-scope table: {name}")


class AmbiguousColumn(ResolutionError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unqualified column matches multiple in-scope tables: {name}")


class UnresolvedTable(ResolutionError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"table not found in schema: {name}")


# --- corpus -----------------------------------------------------------------


class CorpusError(SqlAuditError):
    """Base class for corpus ingestion failures (CLI exit code 2)."""


class MissingSchema(CorpusError):
    def __init__(self, database_id: str):
        self.database_id = database_id
        super().__init__(f"no schema loaded for database id: {database_id}")


class MalformedExample(CorpusError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"malformed example at index {index}: {reason}")


class CorpusIoError(CorpusError):
    pass


# --- schema / instances -----------------------------------------------------


class SchemaError(SqlAuditError):
    pass


class SchemaMismatch(SqlAuditError):
    def __init__(self, a: str | None, b: str | None):
        super().__init__(f"queries resolve against different databases: {a!r} vs {b!r}")


class InfeasibleConstraints(SqlAuditError):
    pass


class CannotForge(SqlAuditError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"cannot forge instance: {reason}")


# --- execution backend -------------------------------------------------------


class BackendError(SqlAuditError):
    """Structured execution failure from a backend adapter.

    `category` is a pre-classification consumed by the dialect audit; it is a
    `ViolationCategory` value but stored loosely to keep this module free of
    circular imports.
    """

    def __init__(self, message: str, code: str = "error", category: object | None = None):
        self.code = code
        self.message = message
        self.category = category
        super().__init__(f"[{code}] {message}")


# --- harness ------------------------------------------------------------------


class CorpusMismatch(SqlAuditError):
    pass


class UnknownExample(SqlAuditError):
    def __init__(self, example_id: str):
        self.example_id = example_id
        super().__init__(f"unknown example id: {example_id}")


# --- annotation service --------------------------------------------------------


class AnnotationError(SqlAuditError):
    """Base class for annotation-protocol violations; carries an API error code."""

    code = "annotation_error"


class DuplicateSession(AnnotationError):
    code = "duplicate_session"


class NotAMember(AnnotationError):
    code = "not_a_member"


class UnknownTask(AnnotationError):
    code = "unknown_task"


class UnknownCandidate(AnnotationError):
    code = "unknown_candidate"


class SessionFinalized(AnnotationError):
    code = "session_finalized"


class NotDisagreementTask(AnnotationError):
    code = "not_disagreement_task"


class RoundIncomplete(AnnotationError):
    code = "round_incomplete"

    def __init__(self, message: str, missing: list[str] | None = None):
        self.missing = missing or []
        super().__init__(message)


class ExplanationRequired(AnnotationError):
    code = "explanation_required"


class AuthError(AnnotationError):
    code = "auth_error"
