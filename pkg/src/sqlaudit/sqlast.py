"""AST node types for the benchmark SELECT-statement dialect.

The tree mirrors the clause decomposition every analysis in this package
works on: select / from / where / group by / having / order by / limit, plus
an optional set operation chaining a second query. Nodes are plain dataclasses
treated as immutable once the parser returns them; annotation passes (column
resolution) deep-copy before writing. Fields that carry resolution or source
metadata are excluded from equality so that structural identity survives a
print/reparse round trip.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union


class Dialect(Enum):
    BENCHMARK_LENIENT = "benchmark-lenient"
    STRICT_STANDARD = "strict-standard"


AGGREGATE_FUNCTIONS = frozenset({"min", "max", "count", "sum", "avg"})

#: Canonical affinity names used by schemas and literal inference.
AFFINITIES = ("integer", "real", "text", "blob", "boolean", "date")


@dataclass(frozen=True)
class ResolvedColumn:
    """Resolution annotation: the schema table/column a reference points at."""

    table: str
    column: str
    affinity: str


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass
class Expr:
    pass


@dataclass
class ColumnRef(Expr):
    name: str
    table: str | None = None  # qualifier as written (alias or table name)
    quote: str | None = field(default=None, compare=False)  # backtick|bracket|double
    resolved: ResolvedColumn | None = field(default=None, compare=False)
    # set when the name resolved to a select-list alias (ORDER BY/GROUP BY/HAVING)
    select_index: int | None = field(default=None, compare=False)


@dataclass
class Star(Expr):
    table: str | None = None


@dataclass
class Literal(Expr):
    value: int | float | str | None
    text: str = ""  # verbatim source spelling (digits for numbers, raw string body)
    quote: str | None = field(default=None, compare=False)  # single|double for strings

    def __post_init__(self) -> None:
        if not self.text:
            self.text = "NULL" if self.value is None else str(self.value)

    @property
    def kind(self) -> str:
        if self.value is None:
            return "null"
        if isinstance(self.value, bool):
            return "boolean"
        if isinstance(self.value, (int, float)):
            return "number"
        return "string"


@dataclass
class FuncCall(Expr):
    name: str  # normalized to lowercase
    args: list[Expr] = field(default_factory=list)
    distinct: bool = False

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATE_FUNCTIONS


@dataclass
class BinaryOp(Expr):
    """Arithmetic / string concatenation: + - * / % ||"""

    op: str
    left: Expr
    right: Expr


@dataclass
class UnaryOp(Expr):
    op: str  # '-' | '+'
    operand: Expr


@dataclass
class Comparison(Expr):
    op: str  # = != <> < > <= >=
    left: Expr
    right: Expr


@dataclass
class BoolOp(Expr):
    """N-ary AND/OR; operand order is preserved as written."""

    op: str  # 'AND' | 'OR'
    operands: list[Expr] = field(default_factory=list)


@dataclass
class Not(Expr):
    operand: Expr


@dataclass
class Between(Expr):
    expr: Expr
    low: Expr
    high: Expr
    negated: bool = False


@dataclass
class InList(Expr):
    expr: Expr
    items: list[Expr] = field(default_factory=list)
    negated: bool = False


@dataclass
class InSubquery(Expr):
    expr: Expr
    query: "SelectQuery" = None  # type: ignore[assignment]
    negated: bool = False


@dataclass
class Like(Expr):
    expr: Expr
    pattern: Expr
    negated: bool = False
    op: str = "LIKE"  # LIKE | GLOB


@dataclass
class IsNull(Expr):
    expr: Expr
    negated: bool = False


@dataclass
class Exists(Expr):
    query: "SelectQuery" = None  # type: ignore[assignment]
    negated: bool = False


@dataclass
class ScalarSubquery(Expr):
    query: "SelectQuery" = None  # type: ignore[assignment]


@dataclass
class CaseExpr(Expr):
    operand: Expr | None
    whens: list[tuple[Expr, Expr]]
    else_: Expr | None = None


@dataclass
class Cast(Expr):
    expr: Expr
    type_name: str = "text"


# ---------------------------------------------------------------------------
# Clauses
# ---------------------------------------------------------------------------


@dataclass
class SelectItem:
    expr: Expr
    alias: str | None = None
    aggregated: bool = False  # true iff expr tree contains an aggregate call


@dataclass
class TableRef:
    name: str
    alias: str | None = None
    quote: str | None = field(default=None, compare=False)
    resolved_table: str | None = field(default=None, compare=False)

    @property
    def binding(self) -> str:
        return self.alias or self.name


@dataclass
class SubquerySource:
    query: "SelectQuery"
    alias: str | None = None

    @property
    def binding(self) -> str | None:
        return self.alias


@dataclass
class Join:
    join_type: str  # INNER | LEFT | RIGHT | FULL | CROSS
    source: Union[TableRef, SubquerySource]
    on: Expr | None = None


FromItem = Union[TableRef, SubquerySource, Join]


@dataclass
class OrderItem:
    expr: Expr
    direction: str = "ASC"  # ASC | DESC


@dataclass
class SetOp:
    op: str  # UNION | UNION ALL | INTERSECT | EXCEPT
    query: "SelectQuery" = None  # type: ignore[assignment]


@dataclass
class SelectQuery:
    """One SELECT statement (possibly the left arm of a set operation)."""

    select: list[SelectItem] = field(default_factory=list)
    distinct: bool = False
    from_: list[FromItem] = field(default_factory=list)
    where: Expr | None = None
    group_by: list[Expr] = field(default_factory=list)
    having: Expr | None = None
    order_by: list[OrderItem] = field(default_factory=list)
    limit: int | None = None
    offset: int | None = None
    set_op: SetOp | None = None
    database_id: str | None = field(default=None, compare=False)  # set by resolution

    def copy(self) -> "SelectQuery":
        return copy.deepcopy(self)


#: The unit all analysis operates on.
SqlAst = SelectQuery


# ---------------------------------------------------------------------------
# Tree walking helpers
# ---------------------------------------------------------------------------


def child_expressions(expr: Expr) -> list[Expr]:
    if isinstance(expr, (ColumnRef, Star, Literal)):
        return []
    if isinstance(expr, FuncCall):
        return list(expr.args)
    if isinstance(expr, BinaryOp):
        return [expr.left, expr.right]
    if isinstance(expr, UnaryOp):
        return [expr.operand]
    if isinstance(expr, Comparison):
        return [expr.left, expr.right]
    if isinstance(expr, BoolOp):
        return list(expr.operands)
    if isinstance(expr, Not):
        return [expr.operand]
    if isinstance(expr, Between):
        return [expr.expr, expr.low, expr.high]
    if isinstance(expr, InList):
        return [expr.expr, *expr.items]
    if isinstance(expr, InSubquery):
        return [expr.expr]
    if isinstance(expr, Like):
        return [expr.expr, expr.pattern]
    if isinstance(expr, IsNull):
        return [expr.expr]
    if isinstance(expr, (Exists, ScalarSubquery)):
        return []
    if isinstance(expr, CaseExpr):
        out: list[Expr] = [] if expr.operand is None else [expr.operand]
        for when, then in expr.whens:
            out.extend((when, then))
        if expr.else_ is not None:
            out.append(expr.else_)
        return out
    if isinstance(expr, Cast):
        return [expr.expr]
    raise TypeError(f"unknown expression node: {type(expr).__name__}")


def walk_expr(expr: Expr) -> Iterator[Expr]:
    """Yield `expr` and every sub-expression, not descending into subqueries."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(child_expressions(node))


def expr_subqueries(expr: Expr) -> Iterator[SelectQuery]:
    """Immediate subqueries embedded in one expression tree."""
    for node in walk_expr(expr):
        if isinstance(node, (Exists, InSubquery, ScalarSubquery)):
            yield node.query


def contains_aggregate(expr: Expr) -> bool:
    return any(isinstance(n, FuncCall) and n.is_aggregate for n in walk_expr(expr))


def query_expressions(q: SelectQuery) -> Iterator[Expr]:
    """Top-level expression trees of one query (not descending into subqueries)."""
    for item in q.select:
        yield item.expr
    for fi in q.from_:
        if isinstance(fi, Join) and fi.on is not None:
            yield fi.on
    if q.where is not None:
        yield q.where
    yield from q.group_by
    if q.having is not None:
        yield q.having
    for oi in q.order_by:
        yield oi.expr


def iter_subqueries(q: SelectQuery, path: str = "query") -> Iterator[tuple[str, SelectQuery]]:
    """Yield (clause path, query) for `q` and every nested query, outer first."""
    yield path, q
    for idx, fi in enumerate(q.from_):
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, SubquerySource):
            yield from iter_subqueries(src.query, f"{path}.from[{idx}]")
        if isinstance(fi, Join) and fi.on is not None:
            for n, sub in enumerate(expr_subqueries(fi.on)):
                yield from iter_subqueries(sub, f"{path}.join[{idx}].on.subquery[{n}]")
    clause_exprs = [
        ("select", [it.expr for it in q.select]),
        ("where", [q.where] if q.where is not None else []),
        ("group_by", list(q.group_by)),
        ("having", [q.having] if q.having is not None else []),
        ("order_by", [oi.expr for oi in q.order_by]),
    ]
    for clause, exprs in clause_exprs:
        n = 0
        for e in exprs:
            for sub in expr_subqueries(e):
                yield from iter_subqueries(sub, f"{path}.{clause}.subquery[{n}]")
                n += 1
    if q.set_op is not None:
        yield from iter_subqueries(q.set_op.query, f"{path}.setop")


def query_at_path(q: SelectQuery, path: str) -> SelectQuery | None:
    """Resolve a clause path produced by `iter_subqueries` back to its node."""
    for p, node in iter_subqueries(q):
        if p == path:
            return node
    return None


def top_level_order_by(q: SelectQuery) -> list[OrderItem]:
    """ORDER BY governing the full result: trailing clauses of a set-op chain
    parse into the rightmost operand."""
    if q.set_op is not None:
        return top_level_order_by(q.set_op.query)
    return q.order_by


def infer_affinity(expr: Expr) -> str:
    """Best-effort output affinity of an expression (used for derived tables)."""
    if isinstance(expr, ColumnRef) and expr.resolved is not None:
        return expr.resolved.affinity
    if isinstance(expr, Literal):
        if isinstance(expr.value, bool):
            return "boolean"
        if isinstance(expr.value, int):
            return "integer"
        if isinstance(expr.value, float):
            return "real"
        if isinstance(expr.value, str):
            return "text"
        return "text"
    if isinstance(expr, FuncCall):
        if expr.name == "count":
            return "integer"
        if expr.name in ("sum", "avg"):
            return "real"
        if expr.name in ("min", "max") and expr.args:
            return infer_affinity(expr.args[0])
        if expr.name in ("length", "instr"):
            return "integer"
        return "text"
    if isinstance(expr, (BinaryOp, UnaryOp)):
        return "real"
    if isinstance(expr, Cast):
        t = expr.type_name.lower()
        if "int" in t:
            return "integer"
        if t in ("real", "float", "double", "numeric", "decimal"):
            return "real"
        return "text"
    if isinstance(expr, CaseExpr) and expr.whens:
        return infer_affinity(expr.whens[0][1])
    return "text"
