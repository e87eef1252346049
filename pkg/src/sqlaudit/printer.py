"""Canonical SQL printer.

Emits uppercase keywords, single spaces, and no trailing semicolon; the
output reparses to a structurally identical AST (round-trip contract).
Identifiers print bare when they are plain words, backtick-quoted otherwise
(double quotes would read back as string literals in the lenient dialect).
"""

from __future__ import annotations

import re

from .lexer import KEYWORDS
from .sqlast import (
    Between,
    BinaryOp,
    BoolOp,
    CaseExpr,
    Cast,
    ColumnRef,
    Comparison,
    Exists,
    Expr,
    FuncCall,
    InList,
    InSubquery,
    IsNull,
    Join,
    Like,
    Literal,
    Not,
    ScalarSubquery,
    SelectQuery,
    Star,
    SubquerySource,
    TableRef,
    UnaryOp,
)

_BARE_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# wider binds tighter; used to decide parenthesization
_PRECEDENCE = {
    "OR": 1,
    "AND": 2,
    "NOT": 3,
    "cmp": 4,
    "add": 5,
    "mul": 6,
    "unary": 7,
    "atom": 8,
}


def print_sql(q: SelectQuery) -> str:
    """Render a query in canonical form."""
    return _print_query(q)


def quote_identifier(name: str) -> str:
    if _BARE_IDENT.match(name) and name.lower() not in KEYWORDS:
        return name
    return "`" + name.replace("`", "``") + "`"


def quote_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _print_query(q: SelectQuery) -> str:
    parts = ["SELECT"]
    if q.distinct:
        parts.append("DISTINCT")
    parts.append(", ".join(_print_select_item(it) for it in q.select))
    if q.from_:
        parts.append("FROM")
        parts.append(_print_from(q.from_))
    if q.where is not None:
        parts.append("WHERE")
        parts.append(_print_expr(q.where, _PRECEDENCE["OR"]))
    if q.group_by:
        parts.append("GROUP BY")
        parts.append(", ".join(_print_expr(e, _PRECEDENCE["OR"]) for e in q.group_by))
    if q.having is not None:
        parts.append("HAVING")
        parts.append(_print_expr(q.having, _PRECEDENCE["OR"]))
    if q.order_by:
        parts.append("ORDER BY")
        parts.append(
            ", ".join(
                f"{_print_expr(oi.expr, _PRECEDENCE['OR'])} {oi.direction}"
                for oi in q.order_by
            )
        )
    if q.limit is not None:
        parts.append(f"LIMIT {q.limit}")
        if q.offset is not None:
            parts.append(f"OFFSET {q.offset}")
    out = " ".join(parts)
    if q.set_op is not None:
        out = f"{out} {q.set_op.op} {_print_query(q.set_op.query)}"
    return out


def _print_select_item(item) -> str:
    text = _print_expr(item.expr, _PRECEDENCE["OR"])
    if item.alias:
        return f"{text} AS {quote_identifier(item.alias)}"
    return text


def _print_from(items: list) -> str:
    out: list[str] = []
    for idx, fi in enumerate(items):
        if isinstance(fi, Join):
            kw = "JOIN" if fi.join_type == "INNER" else f"{fi.join_type} JOIN"
            piece = f"{kw} {_print_source(fi.source)}"
            if fi.on is not None:
                piece += f" ON {_print_expr(fi.on, _PRECEDENCE['OR'])}"
            out.append(f" {piece}")
        else:
            prefix = ", " if idx > 0 else ""
            out.append(f"{prefix}{_print_source(fi)}")
    return "".join(out).strip()


def _print_source(src) -> str:
    if isinstance(src, TableRef):
        text = quote_identifier(src.name)
        if src.alias:
            text += f" AS {quote_identifier(src.alias)}"
        return text
    if isinstance(src, SubquerySource):
        text = f"({_print_query(src.query)})"
        if src.alias:
            text += f" AS {quote_identifier(src.alias)}"
        return text
    raise TypeError(f"unknown FROM source: {type(src).__name__}")


def _maybe_paren(text: str, inner: int, outer: int) -> str:
    return f"({text})" if inner < outer else text


def _print_expr(e: Expr, context: int) -> str:
    text, prec = _render(e)
    return _maybe_paren(text, prec, context)


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, ColumnRef):
        name = quote_identifier(e.name)
        if e.table:
            return f"{quote_identifier(e.table)}.{name}", _PRECEDENCE["atom"]
        return name, _PRECEDENCE["atom"]
    if isinstance(e, Star):
        return (f"{quote_identifier(e.table)}.*" if e.table else "*"), _PRECEDENCE["atom"]
    if isinstance(e, Literal):
        if e.value is None:
            return "NULL", _PRECEDENCE["atom"]
        if isinstance(e.value, str):
            return quote_string(e.value), _PRECEDENCE["atom"]
        if isinstance(e.value, (int, float)) and e.value < 0:
            return e.text or str(e.value), _PRECEDENCE["unary"]
        return e.text or str(e.value), _PRECEDENCE["atom"]
    if isinstance(e, FuncCall):
        inner = "DISTINCT " if e.distinct else ""
        args = ", ".join(_print_expr(a, _PRECEDENCE["OR"]) for a in e.args)
        return f"{e.name.upper()}({inner}{args})", _PRECEDENCE["atom"]
    if isinstance(e, BinaryOp):
        prec = _PRECEDENCE["add"] if e.op in ("+", "-", "||") else _PRECEDENCE["mul"]
        left = _print_expr(e.left, prec)
        # right operand needs parens at equal precedence (left-assoc grammar)
        right = _print_expr(e.right, prec + 1)
        return f"{left} {e.op} {right}", prec
    if isinstance(e, UnaryOp):
        return f"{e.op}{_print_expr(e.operand, _PRECEDENCE['unary'])}", _PRECEDENCE["unary"]
    if isinstance(e, Comparison):
        prec = _PRECEDENCE["cmp"]
        return (
            f"{_print_expr(e.left, prec + 1)} {e.op} {_print_expr(e.right, prec + 1)}",
            prec,
        )
    if isinstance(e, BoolOp):
        prec = _PRECEDENCE[e.op]
        joined = f" {e.op} ".join(_print_expr(op, prec + 1) for op in e.operands)
        return joined, prec
    if isinstance(e, Not):
        return f"NOT {_print_expr(e.operand, _PRECEDENCE['NOT'] + 1)}", _PRECEDENCE["NOT"]
    if isinstance(e, Between):
        kw = "NOT BETWEEN" if e.negated else "BETWEEN"
        prec = _PRECEDENCE["cmp"]
        return (
            f"{_print_expr(e.expr, prec + 1)} {kw} "
            f"{_print_expr(e.low, prec + 1)} AND {_print_expr(e.high, prec + 1)}",
            prec,
        )
    if isinstance(e, InList):
        kw = "NOT IN" if e.negated else "IN"
        items = ", ".join(_print_expr(i, _PRECEDENCE["OR"]) for i in e.items)
        prec = _PRECEDENCE["cmp"]
        return f"{_print_expr(e.expr, prec + 1)} {kw} ({items})", prec
    if isinstance(e, InSubquery):
        kw = "NOT IN" if e.negated else "IN"
        prec = _PRECEDENCE["cmp"]
        return f"{_print_expr(e.expr, prec + 1)} {kw} ({_print_query(e.query)})", prec
    if isinstance(e, Like):
        kw = e.op if not e.negated else f"NOT {e.op}"
        prec = _PRECEDENCE["cmp"]
        return (
            f"{_print_expr(e.expr, prec + 1)} {kw} {_print_expr(e.pattern, prec + 1)}",
            prec,
        )
    if isinstance(e, IsNull):
        kw = "IS NOT NULL" if e.negated else "IS NULL"
        prec = _PRECEDENCE["cmp"]
        return f"{_print_expr(e.expr, prec + 1)} {kw}", prec
    if isinstance(e, Exists):
        kw = "NOT EXISTS" if e.negated else "EXISTS"
        return f"{kw} ({_print_query(e.query)})", _PRECEDENCE["atom"]
    if isinstance(e, ScalarSubquery):
        return f"({_print_query(e.query)})", _PRECEDENCE["atom"]
    if isinstance(e, CaseExpr):
        parts = ["CASE"]
        if e.operand is not None:
            parts.append(_print_expr(e.operand, _PRECEDENCE["OR"]))
        for when, then in e.whens:
            parts.append(
                f"WHEN {_print_expr(when, _PRECEDENCE['OR'])} "
                f"THEN {_print_expr(then, _PRECEDENCE['OR'])}"
            )
        if e.else_ is not None:
            parts.append(f"ELSE {_print_expr(e.else_, _PRECEDENCE['OR'])}")
        parts.append("END")
        return " ".join(parts), _PRECEDENCE["atom"]
    if isinstance(e, Cast):
        return (
            f"CAST({_print_expr(e.expr, _PRECEDENCE['OR'])} AS {e.type_name.upper()})",
            _PRECEDENCE["atom"],
        )
    raise TypeError(f"unknown expression node: {type(e).__name__}")
