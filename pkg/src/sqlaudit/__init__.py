"""sqlaudit: auditing toolkit for text-to-SQL benchmarks.

Detects tie-prone gold queries, rewrites them into deterministic
equivalents, re-evaluates prediction sets under exact set match and
execution accuracy, forges database instances that expose or suppress tie
ambiguity, audits strict-SQL portability, and hosts a blind two-round human
adjudication protocol over HTTP.
"""

from .backend import ResultTable, SqliteBackend
from .corpus import (
    BenchmarkExample,
    Corpus,
    CorpusStats,
    PredictionSet,
    corpus_stats,
    load_corpus,
    load_predictions,
)
from .dialect_audit import (
    StrictEmulationBackend,
    StrictViolation,
    Table4Report,
    ViolationCategory,
    classify_backend_error,
    portability_report,
    static_strict_check,
    type_mismatch_notes,
)
from .errors import (
    AmbiguousColumn,
    BackendError,
    CannotForge,
    EmptyInput,
    ParseError,
    SchemaMismatch,
    Unsupported,
    UnresolvedColumn,
)
from .forge import forge_tie_free_instance, forge_tie_instance, random_instance
from .harness import (
    ErrorGroup,
    EvalConfig,
    EvalReport,
    evaluate_corpus,
    failure_set,
    taxonomy_report,
)
from .instances import DbInstance, Provenance
from .metrics import (
    ExecOutcome,
    MatchResult,
    compare_results,
    exact_set_match,
    execute,
    execution_accuracy,
)
from .parser import parse_sql
from .printer import print_sql
from .resolver import resolve_columns
from .rewrite import (
    RewriteOutcome,
    RewriteRule,
    RewriteStatus,
    complete_group_by,
    rewrite_corpus,
    rewrite_limit1,
)
from .schema import Column, DbSchema, ForeignKey, Table
from .sqlast import Dialect, SelectQuery, SqlAst
from .tie_audit import TieCategory, TieFinding, audit_query

__version__ = "0.1.0"

__all__ = [
    "AmbiguousColumn",
    "BackendError",
    "BenchmarkExample",
    "CannotForge",
    "Column",
    "Corpus",
    "CorpusStats",
    "DbInstance",
    "DbSchema",
    "Dialect",
    "EmptyInput",
    "ErrorGroup",
    "EvalConfig",
    "EvalReport",
    "ExecOutcome",
    "ForeignKey",
    "MatchResult",
    "ParseError",
    "PredictionSet",
    "Provenance",
    "ResultTable",
    "RewriteOutcome",
    "RewriteRule",
    "RewriteStatus",
    "SchemaMismatch",
    "SelectQuery",
    "SqlAst",
    "SqliteBackend",
    "StrictEmulationBackend",
    "StrictViolation",
    "Table",
    "Table4Report",
    "TieCategory",
    "TieFinding",
    "Unsupported",
    "UnresolvedColumn",
    "ViolationCategory",
    "audit_query",
    "classify_backend_error",
    "compare_results",
    "complete_group_by",
    "corpus_stats",
    "evaluate_corpus",
    "exact_set_match",
    "execute",
    "execution_accuracy",
    "failure_set",
    "forge_tie_free_instance",
    "forge_tie_instance",
    "load_corpus",
    "load_predictions",
    "parse_sql",
    "portability_report",
    "print_sql",
    "random_instance",
    "resolve_columns",
    "rewrite_corpus",
    "rewrite_limit1",
    "static_strict_check",
    "taxonomy_report",
    "type_mismatch_notes",
]
