"""Strict-SQL portability audit.

Benchmark gold queries target a lenient engine; migrating them to a
strict-standard system surfaces five error families (the report's columns):
SyntaxErr, UndefinedFunction, UndefinedColumn, OrderBy, GroupBy. The static
checker detects them from the resolved AST; `classify_backend_error` maps a
strict backend's structured errors onto the same categories so static and
dynamic sources reconcile. Int/text comparisons are legal on the lenient
side and rejected by strict typing; they surface as notes, not categories.

No PostgreSQL server is assumed: `StrictEmulationBackend` implements the
adapter contract by validating under the strict dialect (producing
PostgreSQL-shaped error messages) before executing on SQLite.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .backend import ResultTable, SqliteBackend, SqliteHandle
from .errors import BackendError, ParseError, ResolutionError, Unsupported
from .schema import DbSchema
from .sqlast import (
    Between,
    ColumnRef,
    Comparison,
    Dialect,
    Expr,
    FuncCall,
    InList,
    Join,
    Like,
    Literal,
    SelectQuery,
    TableRef,
    iter_subqueries,
    query_expressions,
    walk_expr,
)
from .tie_audit import TieCategory, audit_query

if TYPE_CHECKING:
    from .corpus import Corpus


class ViolationCategory(Enum):
    SYNTAX_ERR = "SyntaxErr"
    UNDEFINED_FUNCTION = "UndefinedFunction"
    UNDEFINED_COLUMN = "UndefinedColumn"
    ORDER_BY = "OrderBy"
    GROUP_BY = "GroupBy"


#: once-per-query counting order (most fundamental failure first)
CATEGORY_ORDER = (
    ViolationCategory.SYNTAX_ERR,
    ViolationCategory.UNDEFINED_FUNCTION,
    ViolationCategory.UNDEFINED_COLUMN,
    ViolationCategory.ORDER_BY,
    ViolationCategory.GROUP_BY,
)


@dataclass
class StrictViolation:
    category: ViolationCategory
    detail: str
    source: str  # Static | Backend
    example_id: str | None = None
    location: str | None = None  # AST clause path for Static violations

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "detail": self.detail,
            "source": self.source,
            "example_id": self.example_id,
            "location": self.location,
        }


# Functions commonly available across strict-standard systems. Configurable:
# pass an allowlist to the checks or load one from a file via the CLI.
DEFAULT_STRICT_FUNCTIONS = frozenset(
    """
    count sum avg min max abs round length upper lower trim ltrim rtrim
    replace coalesce nullif substr substring concat mod floor ceil ceiling
    power sqrt exp ln log position
    """.split()
)


def load_function_catalog(path) -> frozenset[str]:
    import json
    from pathlib import Path

    data = json.loads(Path(path).read_text())
    return frozenset(str(name).lower() for name in data)


# ---------------------------------------------------------------------------
# Static checks
# ---------------------------------------------------------------------------


def static_strict_check(
    ast: SelectQuery,
    schema: DbSchema | None = None,
    resolution_errors: tuple[str, ...] = (),
    function_catalog: frozenset[str] = DEFAULT_STRICT_FUNCTIONS,
) -> list[StrictViolation]:
    """Strict-dialect violations detectable from the (resolved) AST."""
    violations: list[StrictViolation] = []

    for err in resolution_errors:
        violations.append(
            StrictViolation(ViolationCategory.UNDEFINED_COLUMN, err, "Static", location="query")
        )

    for finding in audit_query(ast, schema):
        if finding.category is TieCategory.GROUP_BY_MISUSE:
            violations.append(
                StrictViolation(
                    ViolationCategory.GROUP_BY,
                    finding.explanation,
                    "Static",
                    location=finding.location,
                )
            )
        elif finding.category is TieCategory.ORDER_BY_DISTINCT:
            violations.append(
                StrictViolation(
                    ViolationCategory.ORDER_BY,
                    finding.explanation,
                    "Static",
                    location=finding.location,
                )
            )

    for path, q in iter_subqueries(ast):
        visible = _visible_columns(q, schema)
        for e in query_expressions(q):
            for node in walk_expr(e):
                if isinstance(node, FuncCall) and node.name not in function_catalog:
                    violations.append(
                        StrictViolation(
                            ViolationCategory.UNDEFINED_FUNCTION,
                            f"function {node.name}() is not in the strict catalog",
                            "Static",
                            location=path,
                        )
                    )
                elif isinstance(node, Literal) and node.quote == "double":
                    if schema is not None and str(node.value).lower() not in visible:
                        violations.append(
                            StrictViolation(
                                ViolationCategory.UNDEFINED_COLUMN,
                                f'double-quoted literal "{node.value}" reads as a '
                                "column name under strict rules and resolves to none",
                                "Static",
                                location=path,
                            )
                        )
                elif isinstance(node, ColumnRef) and node.quote in ("backtick", "bracket"):
                    violations.append(
                        StrictViolation(
                            ViolationCategory.SYNTAX_ERR,
                            f"{node.quote}-quoted identifier {node.name!r} is not "
                            "standard SQL",
                            "Static",
                            location=path,
                        )
                    )
                elif isinstance(node, Like) and node.op == "GLOB":
                    violations.append(
                        StrictViolation(
                            ViolationCategory.SYNTAX_ERR,
                            "GLOB operator is not standard SQL",
                            "Static",
                            location=path,
                        )
                    )
        for fi in q.from_:
            src = fi.source if isinstance(fi, Join) else fi
            if isinstance(src, TableRef) and src.quote in ("backtick", "bracket"):
                violations.append(
                    StrictViolation(
                        ViolationCategory.SYNTAX_ERR,
                        f"{src.quote}-quoted table name {src.name!r} is not standard SQL",
                        "Static",
                        location=path,
                    )
                )
    return violations


def _visible_columns(q: SelectQuery, schema: DbSchema | None) -> set[str]:
    cols: set[str] = set()
    if schema is None:
        return cols
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, TableRef):
            table = schema.table(src.resolved_table or src.name)
            if table is not None:
                cols.update(c.name.lower() for c in table.columns)
    return cols


_NUMERIC = ("integer", "real", "boolean")


def type_mismatch_notes(ast: SelectQuery, schema: DbSchema | None = None) -> list[str]:
    """Int/text comparison notes (strict typing rejects them; not a report
    category of its own)."""
    notes: list[str] = []
    for path, q in iter_subqueries(ast):
        for e in query_expressions(q):
            for node in walk_expr(e):
                sides = None
                if isinstance(node, Comparison):
                    sides = (node.left, node.right)
                elif isinstance(node, Between):
                    sides = (node.expr, node.low)
                elif isinstance(node, InList) and node.items:
                    sides = (node.expr, node.items[0])
                if sides is None:
                    continue
                a, b = (_affinity_of(s) for s in sides)
                if a is None or b is None:
                    continue
                if (a in _NUMERIC) != (b in _NUMERIC):
                    from .printer import _print_expr

                    notes.append(
                        f"{path}: comparison mixes {a} and {b} "
                        f"({_print_expr(node, 0)}); strict typing rejects it"
                    )
    return notes


def _affinity_of(e: Expr) -> str | None:
    if isinstance(e, ColumnRef) and e.resolved is not None:
        return e.resolved.affinity
    if isinstance(e, Literal):
        if e.value is None:
            return None
        if isinstance(e.value, bool):
            return "boolean"
        if isinstance(e.value, (int, float)):
            return "integer" if isinstance(e.value, int) else "real"
        return "text"
    return None


# ---------------------------------------------------------------------------
# Backend error classification
# ---------------------------------------------------------------------------

_CLASSIFY_RULES: tuple[tuple[str, ViolationCategory], ...] = (
    (r"must appear in the group by clause|not in group by|misuse of aggregate", ViolationCategory.GROUP_BY),
    (r"order by expressions must appear|for select distinct, order by", ViolationCategory.ORDER_BY),
    (r"function .* does not exist|no such function|unknown function", ViolationCategory.UNDEFINED_FUNCTION),
    (r"column .* does not exist|no such column|undefined column|could not identify column", ViolationCategory.UNDEFINED_COLUMN),
    (r"relation .* does not exist|no such table|undefined table", ViolationCategory.UNDEFINED_COLUMN),
    (r"syntax error", ViolationCategory.SYNTAX_ERR),
)


def classify_backend_error(error) -> ViolationCategory:
    """Total, deterministic mapping of a backend {code, message} (or a
    BackendError) onto a report category; unmappable errors are SyntaxErr."""
    if isinstance(error, BackendError):
        message = error.message
    elif isinstance(error, dict):
        message = str(error.get("message", ""))
    else:
        message = str(error)
    lowered = message.lower()
    for pattern, category in _CLASSIFY_RULES:
        if re.search(pattern, lowered):
            return category
    return ViolationCategory.SYNTAX_ERR


# ---------------------------------------------------------------------------
# Strict-emulation backend (adapter contract implementation)
# ---------------------------------------------------------------------------


class StrictEmulationBackend:
    """Strict-standard adapter: validates under the strict dialect with
    PostgreSQL-shaped error messages, then executes on SQLite. Rejects
    int/text comparisons the way strict typing does."""

    def __init__(
        self,
        schema: DbSchema | None = None,
        function_catalog: frozenset[str] = DEFAULT_STRICT_FUNCTIONS,
    ):
        self.schema = schema
        self.function_catalog = function_catalog
        self._sqlite = SqliteBackend()

    def open(self, instance) -> SqliteHandle:
        handle = self._sqlite.open(instance)
        handle.strict_schema = getattr(instance, "schema", self.schema)  # type: ignore[attr-defined]
        return handle

    def run(self, handle: SqliteHandle, sql_text: str) -> ResultTable:
        from .parser import parse_sql
        from .resolver import resolve_columns

        schema = getattr(handle, "strict_schema", self.schema)
        try:
            ast = parse_sql(sql_text, Dialect.STRICT_STANDARD)
        except Unsupported as exc:
            raise BackendError(
                f'syntax error at or near "{exc.construct}"',
                code="42601",
                category=ViolationCategory.SYNTAX_ERR,
            ) from exc
        except ParseError as exc:
            raise BackendError(
                f"syntax error: {exc}", code="42601", category=ViolationCategory.SYNTAX_ERR
            ) from exc
        resolution_errors: tuple[str, ...] = ()
        if schema is not None:
            try:
                ast = resolve_columns(ast, schema)
            except ResolutionError as exc:
                raise BackendError(
                    f'column "{getattr(exc, "name", "?")}" does not exist',
                    code="42703",
                    category=ViolationCategory.UNDEFINED_COLUMN,
                ) from exc
        violations = static_strict_check(
            ast, schema, resolution_errors, self.function_catalog
        )
        for v in violations:
            raise BackendError(
                _pg_message(v), code=_pg_code(v.category), category=v.category
            )
        notes = type_mismatch_notes(ast, schema)
        if notes:
            raise BackendError(
                "operator does not exist: text = integer", code="42883",
                category=ViolationCategory.SYNTAX_ERR,
            )
        return self._sqlite.run(handle, sql_text)


def _pg_message(v: StrictViolation) -> str:
    if v.category is ViolationCategory.GROUP_BY:
        return "column must appear in the GROUP BY clause or be used in an aggregate function"
    if v.category is ViolationCategory.ORDER_BY:
        return "for SELECT DISTINCT, ORDER BY expressions must appear in select list"
    if v.category is ViolationCategory.UNDEFINED_FUNCTION:
        return f"function {v.detail.split()[1] if len(v.detail.split()) > 1 else '?'} does not exist"
    if v.category is ViolationCategory.UNDEFINED_COLUMN:
        return f"column does not exist ({v.detail})"
    return f"syntax error: {v.detail}"


def _pg_code(category: ViolationCategory) -> str:
    return {
        ViolationCategory.GROUP_BY: "42803",
        ViolationCategory.ORDER_BY: "42P10",
        ViolationCategory.UNDEFINED_FUNCTION: "42883",
        ViolationCategory.UNDEFINED_COLUMN: "42703",
        ViolationCategory.SYNTAX_ERR: "42601",
    }[category]


# ---------------------------------------------------------------------------
# Corpus-level report
# ---------------------------------------------------------------------------


@dataclass
class Table4Report:
    counts: dict[str, int]
    corpus_size: int
    per_example: dict[str, list[StrictViolation]] = field(default_factory=dict)
    type_notes: dict[str, list[str]] = field(default_factory=dict)
    discrepancies: list[dict] = field(default_factory=list)  # static pass, backend reject
    backend_attached: bool = False
    once_per_query: bool = False

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "corpus_size": self.corpus_size,
            "backend_attached": self.backend_attached,
            "once_per_query": self.once_per_query,
            "violations": {
                ex: [v.to_dict() for v in vs] for ex, vs in self.per_example.items() if vs
            },
            "type_mismatch_notes": {k: v for k, v in self.type_notes.items() if v},
            "discrepancies": list(self.discrepancies),
        }

    def to_text(self) -> str:
        header = [c.value for c in CATEGORY_ORDER]
        cells = [str(self.counts.get(c.value, 0)) for c in CATEGORY_ORDER]
        widths = [max(len(h), len(v)) for h, v in zip(header, cells)]
        line1 = "  ".join(h.ljust(w) for h, w in zip(header, widths))
        line2 = "  ".join(v.ljust(w) for v, w in zip(cells, widths))
        return f"{line1}\n{line2}"


def portability_report(
    corpus: "Corpus",
    backend=None,
    once_per_query: bool = False,
    function_catalog: frozenset[str] = DEFAULT_STRICT_FUNCTIONS,
) -> Table4Report:
    """Per-category violation counts over a corpus; backend results override
    static ones on disagreement, with both retained in the detail."""
    from .backend import open_database

    counts = {c.value: 0 for c in CATEGORY_ORDER}
    per_example: dict[str, list[StrictViolation]] = {}
    type_notes: dict[str, list[str]] = {}
    discrepancies: list[dict] = []

    for entry in corpus.entries:
        ex_id = entry.example.example_id
        schema = corpus.schemas.get(entry.example.database_id)
        violations: list[StrictViolation] = []
        if entry.status == "unsupported":
            violations.append(
                StrictViolation(
                    ViolationCategory.SYNTAX_ERR,
                    f"unsupported construct: {entry.unsupported}",
                    "Static",
                    example_id=ex_id,
                    location="query",
                )
            )
        elif entry.status == "unparsed":
            violations.append(
                StrictViolation(
                    ViolationCategory.SYNTAX_ERR,
                    f"parse failure: {entry.parse_error}",
                    "Static",
                    example_id=ex_id,
                    location="query",
                )
            )
        else:
            res_errors = (entry.resolve_error,) if entry.resolve_error else ()
            violations = static_strict_check(
                entry.ast, schema, res_errors, function_catalog
            )
            for v in violations:
                v.example_id = ex_id
            type_notes[ex_id] = type_mismatch_notes(entry.ast, schema)

        static_cats = {v.category for v in violations}
        if backend is not None:
            backend_cat = _backend_category(corpus, entry, backend, schema)
            if backend_cat is not None and backend_cat not in static_cats:
                violations.append(
                    StrictViolation(
                        backend_cat,
                        "backend rejected a query static analysis passed"
                        if not static_cats
                        else "backend category differs from static analysis",
                        "Backend",
                        example_id=ex_id,
                        location=None,
                    )
                )
                discrepancies.append(
                    {
                        "example_id": ex_id,
                        "static": sorted(c.value for c in static_cats),
                        "backend": backend_cat.value,
                    }
                )

        per_example[ex_id] = violations
        cats = {v.category for v in violations}
        if once_per_query:
            for cat in CATEGORY_ORDER:
                if cat in cats:
                    counts[cat.value] += 1
                    break
        else:
            for cat in cats:
                counts[cat.value] += 1

    return Table4Report(
        counts=counts,
        corpus_size=len(corpus.entries),
        per_example=per_example,
        type_notes=type_notes,
        discrepancies=discrepancies,
        backend_attached=backend is not None,
        once_per_query=once_per_query,
    )


def _backend_category(corpus, entry, backend, schema) -> ViolationCategory | None:
    path = corpus.database_paths.get(entry.example.database_id)
    if path is None:
        return None
    try:
        instance = open_database_cached(corpus, entry.example.database_id, schema)
        handle = backend.open(instance)
        try:
            backend.run(handle, entry.example.gold_sql)
        finally:
            handle.close()
    except BackendError as exc:
        if isinstance(exc.category, ViolationCategory):
            return exc.category
        return classify_backend_error(exc)
    except Exception:
        return None  # connection-level failure: recorded as absence, not fatal
    return None


_INSTANCE_CACHE: dict[tuple[int, str], object] = {}


def open_database_cached(corpus, database_id: str, schema):
    from .backend import open_database

    key = (id(corpus), database_id)
    if key not in _INSTANCE_CACHE:
        _INSTANCE_CACHE[key] = open_database(corpus.database_paths[database_id], schema)
    return _INSTANCE_CACHE[key]
