"""Tie-ambiguity detectors.

Four categories of queries whose output depends on how an engine breaks ties:

* Limit1          - LIMIT 1 under an ORDER BY; ties for the top row are cut.
* LimitN          - any other LIMIT: n>1 with ordering (tie at the cut line),
                    or any LIMIT with no ordering (result should be a set).
* GroupByMisuse   - bare selected column missing from GROUP BY, or aggregates
                    mixed with bare columns and no GROUP BY at all; each group
                    returns one arbitrary row under lenient engines.
* OrderByDistinct - SELECT DISTINCT ordered by an expression absent from the
                    select list; which ordering key represents a distinct row
                    is undefined.

Findings are produced for the outer query and every subquery; `location` is a
clause path resolvable with `sqlast.query_at_path`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .schema import DbSchema
from .sqlast import (
    ColumnRef,
    Expr,
    Join,
    Literal,
    SelectQuery,
    Star,
    TableRef,
    iter_subqueries,
)


class TieCategory(Enum):
    LIMIT1 = "Limit1"
    LIMITN = "LimitN"
    GROUP_BY_MISUSE = "GroupByMisuse"
    ORDER_BY_DISTINCT = "OrderByDistinct"


#: Disjoint-counting priority used by corpus statistics.
CATEGORY_PRIORITY = (
    TieCategory.LIMIT1,
    TieCategory.LIMITN,
    TieCategory.GROUP_BY_MISUSE,
    TieCategory.ORDER_BY_DISTINCT,
)


@dataclass
class TieFinding:
    category: TieCategory
    location: str
    explanation: str
    rewritable: bool
    severity: str = "normal"  # "low" when grouped keys functionally determine the rest

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "location": self.location,
            "explanation": self.explanation,
            "rewritable": self.rewritable,
            "severity": self.severity,
        }


def expr_key(e: Expr) -> tuple:
    """Identity of an expression for membership tests, alias-insensitive when
    resolution annotations are present."""
    if isinstance(e, ColumnRef):
        if e.resolved is not None:
            return ("col", e.resolved.table.lower(), e.resolved.column.lower())
        qualifier = (e.table or "").lower()
        return ("col?", qualifier, e.name.lower())
    if isinstance(e, Literal):
        return ("lit", e.kind, e.value)
    if isinstance(e, Star):
        return ("star", (e.table or "").lower())
    from .sqlast import child_expressions

    name = type(e).__name__
    op = getattr(e, "op", getattr(e, "name", ""))
    return (name, str(op).lower(), tuple(expr_key(c) for c in child_expressions(e)))


def _column_in_group_by(e: Expr, group_keys: set[tuple]) -> bool:
    key = expr_key(e)
    if key in group_keys:
        return True
    # unresolved fallback: match bare name against qualified group keys
    if key[0] == "col?" and key[1] == "":
        for gk in group_keys:
            if gk[0] in ("col", "col?") and gk[2] == key[2]:
                return True
    if key[0] == "col" :
        for gk in group_keys:
            if gk[0] == "col?" and gk[1] == "" and gk[2] == key[2]:
                return True
    return False


def _grouped_keys(q: SelectQuery) -> set[tuple]:
    keys = set()
    for e in q.group_by:
        if isinstance(e, ColumnRef) and e.select_index is not None:
            keys.add(expr_key(q.select[e.select_index].expr))
        else:
            keys.add(expr_key(e))
    return keys


def _local_tables(q: SelectQuery, schema: DbSchema | None) -> list[str]:
    names = []
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, TableRef):
            names.append(src.resolved_table or src.name)
    return names


def _fd_exempt(q: SelectQuery, schema: DbSchema | None, missing: list[Expr]) -> bool:
    """True when the grouped columns contain a primary/unique key of a table
    and every missing column belongs to that same table (one-to-one mapping)."""
    if schema is None:
        return False
    grouped_by_table: dict[str, set[str]] = {}
    for e in q.group_by:
        if isinstance(e, ColumnRef) and e.resolved is not None:
            grouped_by_table.setdefault(e.resolved.table.lower(), set()).add(
                e.resolved.column.lower()
            )
    determined: set[str] = set()
    for tname, cols in grouped_by_table.items():
        table = schema.table(tname)
        if table is None:
            continue
        for key_set in table.unique_column_sets():
            if key_set and key_set <= cols:
                determined.add(tname)
                break
    if not determined:
        return False
    for e in missing:
        if not (
            isinstance(e, ColumnRef)
            and e.resolved is not None
            and e.resolved.table.lower() in determined
        ):
            return False
    return True


def _audit_single(q: SelectQuery, path: str, schema: DbSchema | None) -> list[TieFinding]:
    findings: list[TieFinding] = []

    if q.limit is not None:
        if q.order_by and q.limit == 1:
            rewritable, reason = limit1_rewritable(q)
            explanation = (
                "LIMIT 1 under ORDER BY returns one arbitrary row when several "
                "rows tie for the extreme ordering value"
            )
            if not rewritable:
                explanation += f" ({reason})"
            findings.append(
                TieFinding(TieCategory.LIMIT1, path, explanation, rewritable)
            )
        else:
            if q.order_by:
                explanation = (
                    f"LIMIT {q.limit} cuts an ordered result at an arbitrary point "
                    "when rows tie at the cut line"
                )
            else:
                explanation = (
                    f"LIMIT {q.limit} with no ORDER BY selects arbitrary rows from "
                    "an unordered (set-valued) result"
                )
            findings.append(TieFinding(TieCategory.LIMITN, path, explanation, False))

    has_agg = any(it.aggregated for it in q.select)
    bare_items = [it for it in q.select if not it.aggregated]
    if q.group_by:
        group_keys = _grouped_keys(q)
        missing: list[Expr] = []
        for it in bare_items:
            if isinstance(it.expr, Star):
                missing.append(it.expr)
            elif not _column_in_group_by(it.expr, group_keys):
                missing.append(it.expr)
        if missing:
            names = ", ".join(_describe(e) for e in missing)
            severity = "low" if _fd_exempt(q, schema, missing) else "normal"
            explanation = (
                f"selected column(s) {names} are neither aggregated nor listed in "
                "GROUP BY; each group returns one arbitrary row for them"
            )
            if severity == "low":
                explanation += (
                    " (grouped keys are unique, so completion will not change results)"
                )
            findings.append(
                TieFinding(TieCategory.GROUP_BY_MISUSE, path, explanation, True, severity)
            )
    elif has_agg and bare_items:
        names = ", ".join(_describe(it.expr) for it in bare_items)
        findings.append(
            TieFinding(
                TieCategory.GROUP_BY_MISUSE,
                path,
                f"aggregates mixed with non-aggregated column(s) {names} and no "
                "GROUP BY clause; the bare columns come from one arbitrary row",
                False,
            )
        )

    if q.distinct and q.order_by:
        select_keys = {expr_key(it.expr) for it in q.select}
        aliases = {it.alias.lower() for it in q.select if it.alias}
        for oi in q.order_by:
            if _order_key_in_select(oi.expr, q, select_keys, aliases):
                continue
            findings.append(
                TieFinding(
                    TieCategory.ORDER_BY_DISTINCT,
                    path,
                    f"SELECT DISTINCT ordered by {_describe(oi.expr)}, which is "
                    "absent from the select list; the ordering of de-duplicated "
                    "rows is undefined when one distinct value maps to several "
                    "ordering values",
                    False,
                )
            )

    return findings


def _order_key_in_select(
    e: Expr, q: SelectQuery, select_keys: set[tuple], aliases: set[str]
) -> bool:
    if isinstance(e, Literal) and isinstance(e.value, int):
        return 1 <= e.value <= len(q.select)  # ordinal reference
    if isinstance(e, ColumnRef):
        if e.select_index is not None:
            return True
        if e.table is None and e.name.lower() in aliases:
            return True
    return expr_key(e) in select_keys


def _describe(e: Expr) -> str:
    from .printer import _print_expr

    return _print_expr(e, 0)


def limit1_rewritable(q: SelectQuery) -> tuple[bool, str]:
    """Whether the LIMIT-1 extreme rewrite applies; mirrors the rewrite engine's
    applicability rules so findings can advertise rewritability."""
    from .rewrite import limit1_applicability

    return limit1_applicability(q)


def audit_query(ast: SelectQuery, schema: DbSchema | None = None) -> list[TieFinding]:
    """All tie findings for a resolved query, outer first, subqueries after."""
    findings: list[TieFinding] = []
    for path, sub in iter_subqueries(ast):
        findings.extend(_audit_single(sub, path, schema))
    return findings


def outer_findings(findings: list[TieFinding]) -> list[TieFinding]:
    return [f for f in findings if f.location == "query"]


def dominant_category(findings: list[TieFinding]) -> TieCategory | None:
    """Highest-priority category for disjoint per-query counting."""
    present = {f.category for f in findings}
    for cat in CATEGORY_PRIORITY:
        if cat in present:
            return cat
    return None
