"""Column resolution: annotate every ColumnRef with its schema table/column.

Resolution is pure: the input AST is deep-copied, annotated, and returned.
Scopes nest for correlated subqueries in WHERE/HAVING/SELECT; derived tables
in FROM resolve without the outer scope (no LATERAL in the grammar). In
ORDER BY / GROUP BY / HAVING an unqualified name first tries the select-list
aliases, matching the engines the benchmarks target.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AmbiguousColumn, UnresolvedColumn, UnresolvedTable
from .schema import DbSchema
from .sqlast import (
    ColumnRef,
    Expr,
    Join,
    ResolvedColumn,
    SelectItem,
    SelectQuery,
    Star,
    SubquerySource,
    TableRef,
    child_expressions,
    contains_aggregate,
    infer_affinity,
)
from . import printer


@dataclass
class _Binding:
    """One FROM entry visible to name lookup."""

    name: str  # binding name (alias or table name), lowercased
    real_table: str  # schema table name ('' for derived tables)
    columns: dict[str, str]  # lowercased column name -> affinity


class _Scope:
    def __init__(self, bindings: list[_Binding], parent: "_Scope | None" = None):
        self.bindings = bindings
        self.parent = parent


def resolve_columns(ast: SelectQuery, schema: DbSchema) -> SelectQuery:
    """Return a copy of `ast` with every column reference resolved."""
    resolved = ast.copy()
    _resolve_query(resolved, schema, None)
    return resolved


def _binding_for(source: TableRef | SubquerySource, schema: DbSchema) -> _Binding:
    if isinstance(source, TableRef):
        table = schema.table(source.name)
        if table is None:
            raise UnresolvedTable(source.name)
        source.resolved_table = table.name
        return _Binding(
            name=(source.alias or source.name).lower(),
            real_table=table.name,
            columns={c.name.lower(): c.affinity for c in table.columns},
        )
    # derived table: output columns are the subquery's select-list names
    columns: dict[str, str] = {}
    for item in source.query.select:
        if isinstance(item.expr, Star):
            for b in _from_bindings(source.query, schema):
                columns.update(b.columns)
            continue
        name = _output_name(item)
        columns[name.lower()] = infer_affinity(item.expr)
    return _Binding(
        name=(source.alias or "").lower(), real_table="", columns=columns
    )


def _output_name(item: SelectItem) -> str:
    if item.alias:
        return item.alias
    if isinstance(item.expr, ColumnRef):
        return item.expr.name
    return printer._print_expr(item.expr, 0)


def _from_bindings(q: SelectQuery, schema: DbSchema) -> list[_Binding]:
    bindings = []
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        bindings.append(_binding_for(src, schema))
    return bindings


def _resolve_query(q: SelectQuery, schema: DbSchema, outer: _Scope | None) -> None:
    # FROM subqueries first, in their own scope
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, SubquerySource):
            _resolve_query(src.query, schema, None)
    scope = _Scope(_from_bindings(q, schema), parent=outer)

    aliases = {
        it.alias.lower(): idx for idx, it in enumerate(q.select) if it.alias
    }

    for fi in q.from_:
        if isinstance(fi, Join) and fi.on is not None:
            _resolve_expr(fi.on, scope, schema, None)
    for item in q.select:
        _resolve_expr(item.expr, scope, schema, None)
        item.aggregated = contains_aggregate(item.expr)
    if q.where is not None:
        _resolve_expr(q.where, scope, schema, None)
    for e in q.group_by:
        _resolve_expr(e, scope, schema, aliases)
    if q.having is not None:
        _resolve_expr(q.having, scope, schema, aliases)
    for oi in q.order_by:
        _resolve_expr(oi.expr, scope, schema, aliases)
    if q.set_op is not None:
        _resolve_query(q.set_op.query, schema, outer)
    q.database_id = schema.database_id


def _resolve_expr(
    e: Expr,
    scope: _Scope,
    schema: DbSchema,
    aliases: dict[str, int] | None,
) -> None:
    from .sqlast import Exists, InSubquery, ScalarSubquery

    if isinstance(e, ColumnRef):
        _resolve_column(e, scope, aliases)
        return
    if isinstance(e, (Exists, InSubquery, ScalarSubquery)):
        if isinstance(e, InSubquery):
            _resolve_expr(e.expr, scope, schema, aliases)
        _resolve_subquery_scope(e.query, schema, scope)
        return
    for child in child_expressions(e):
        _resolve_expr(child, scope, schema, aliases)


def _resolve_subquery_scope(q: SelectQuery, schema: DbSchema, outer: _Scope) -> None:
    _resolve_query(q, schema, outer)


def _resolve_column(ref: ColumnRef, scope: _Scope, aliases: dict[str, int] | None) -> None:
    lname = ref.name.lower()
    if ref.table:
        qual = ref.table.lower()
        s: _Scope | None = scope
        while s is not None:
            for b in s.bindings:
                if b.name == qual:
                    affinity = b.columns.get(lname)
                    if affinity is None:
                        raise UnresolvedColumn(f"{ref.table}.{ref.name}")
                    ref.resolved = ResolvedColumn(
                        table=b.real_table or b.name, column=lname, affinity=affinity
                    )
                    return
            s = s.parent
        raise UnresolvedColumn(f"{ref.table}.{ref.name}")

    # select-list alias (ORDER BY / GROUP BY / HAVING only)
    if aliases and lname in aliases:
        ref.select_index = aliases[lname]
        return

    s = scope
    while s is not None:
        matches = [b for b in s.bindings if lname in b.columns]
        if len(matches) > 1:
            raise AmbiguousColumn(ref.name)
        if matches:
            b = matches[0]
            ref.resolved = ResolvedColumn(
                table=b.real_table or b.name, column=lname, affinity=b.columns[lname]
            )
            return
        s = s.parent
    raise UnresolvedColumn(ref.name)


def resolution_signature(q: SelectQuery) -> list[tuple]:
    """Flat view of every resolution annotation, for idempotence checks."""
    from .sqlast import iter_subqueries, query_expressions, walk_expr

    out = []
    for path, sub in iter_subqueries(q):
        for e in query_expressions(sub):
            for node in walk_expr(e):
                if isinstance(node, ColumnRef):
                    out.append((path, node.name, node.resolved, node.select_index))
    return out
