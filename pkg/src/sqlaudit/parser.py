"""Recursive-descent parser for the benchmark SELECT dialect.

Covers the constructs gold queries in cross-domain text-to-SQL corpora use:
single/multi-table SELECT with joins, nested subqueries (WHERE/FROM/HAVING),
set operations, GROUP BY/HAVING, ORDER BY, LIMIT/OFFSET, CASE and CAST.
Anything outside that subset raises `Unsupported` with the construct name;
malformed input raises `ParseError` with a byte offset and an expected-token
hint. Keyword case is normalized; literals keep their verbatim spelling.

Dialect split: double-quoted tokens are string literals under
`Dialect.BENCHMARK_LENIENT` and identifiers under `Dialect.STRICT_STANDARD`.
"""

from __future__ import annotations

from .errors import EmptyInput, ParseError, Unsupported
from .lexer import KEYWORDS, Token, tokenize
from .sqlast import (
    Between,
    BinaryOp,
    BoolOp,
    CaseExpr,
    Cast,
    ColumnRef,
    Comparison,
    Dialect,
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
    OrderItem,
    ScalarSubquery,
    SelectItem,
    SelectQuery,
    SetOp,
    Star,
    SubquerySource,
    TableRef,
    UnaryOp,
    contains_aggregate,
)

_UNSUPPORTED_LEADING = {
    "INSERT": "INSERT statement",
    "UPDATE": "UPDATE statement",
    "DELETE": "DELETE statement",
    "CREATE": "CREATE statement",
    "DROP": "DROP statement",
    "ALTER": "ALTER statement",
    "WITH": "WITH (common table expression)",
    "PRAGMA": "PRAGMA statement",
    "VALUES": "VALUES clause",
}

_JOIN_TYPES = ("INNER", "LEFT", "RIGHT", "FULL", "CROSS")

_COMPARE_OPS = ("=", "!=", "<>", "<", ">", "<=", ">=")


def parse_sql(text: str, dialect: Dialect = Dialect.BENCHMARK_LENIENT) -> SelectQuery:
    """Parse one SELECT statement into a `SelectQuery`."""
    if text is None or not text.strip():
        raise EmptyInput()
    parser = _Parser(tokenize(text), dialect)
    query = parser.parse_query()
    parser.skip_semicolons()
    parser.expect_eof()
    return query


class _Parser:
    def __init__(self, tokens: list[Token], dialect: Dialect):
        self.tokens = tokens
        self.dialect = dialect
        self.i = 0

    # --- token plumbing ---------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.cur
        return tok.kind == "IDENT" and tok.upper in words

    def eat_kw(self, *words: str) -> Token | None:
        if self.at_kw(*words):
            return self.advance()
        return None

    def expect_kw(self, word: str) -> Token:
        tok = self.eat_kw(word)
        if tok is None:
            raise ParseError(
                f"unexpected token {self.cur.value!r}", self.cur.pos, expected=word
            )
        return tok

    def at_op(self, *ops: str) -> bool:
        return self.cur.kind == "OP" and self.cur.value in ops

    def eat_op(self, *ops: str) -> Token | None:
        if self.at_op(*ops):
            return self.advance()
        return None

    def expect_op(self, op: str) -> Token:
        tok = self.eat_op(op)
        if tok is None:
            raise ParseError(
                f"unexpected token {self.cur.value!r}", self.cur.pos, expected=op
            )
        return tok

    def skip_semicolons(self) -> None:
        while self.at_op(";"):
            self.advance()

    def expect_eof(self) -> None:
        if self.cur.kind != "EOF":
            raise ParseError(
                f"trailing input {self.cur.value!r}", self.cur.pos, expected="end of input"
            )

    # --- statements ---------------------------------------------------------

    def parse_query(self) -> SelectQuery:
        tok = self.cur
        if tok.kind == "IDENT" and tok.upper in _UNSUPPORTED_LEADING:
            raise Unsupported(_UNSUPPORTED_LEADING[tok.upper], tok.pos)
        self.expect_kw("SELECT")
        q = self.parse_select_body()
        set_tok = self.eat_kw("UNION", "INTERSECT", "EXCEPT")
        if set_tok is not None:
            op = set_tok.upper
            if op == "UNION" and self.eat_kw("ALL"):
                op = "UNION ALL"
            q.set_op = SetOp(op=op, query=self.parse_query())
        return q

    def parse_select_body(self) -> SelectQuery:
        q = SelectQuery()
        if self.eat_kw("DISTINCT"):
            q.distinct = True
        else:
            self.eat_kw("ALL")
        q.select = [self.parse_select_item()]
        while self.eat_op(","):
            q.select.append(self.parse_select_item())
        if self.eat_kw("FROM"):
            q.from_ = self.parse_from()
        if self.eat_kw("WHERE"):
            q.where = self.parse_expr()
        if self.eat_kw("GROUP"):
            self.expect_kw("BY")
            q.group_by = [self.parse_expr()]
            while self.eat_op(","):
                q.group_by.append(self.parse_expr())
        if self.eat_kw("HAVING"):
            q.having = self.parse_expr()
        if self.eat_kw("ORDER"):
            self.expect_kw("BY")
            q.order_by = [self.parse_order_item()]
            while self.eat_op(","):
                q.order_by.append(self.parse_order_item())
        if self.eat_kw("LIMIT"):
            first = self.parse_limit_value()
            if self.eat_op(","):
                # MySQL-style LIMIT offset, count
                q.offset = first
                q.limit = self.parse_limit_value()
            else:
                q.limit = first
                if self.eat_kw("OFFSET"):
                    q.offset = self.parse_limit_value()
        return q

    def parse_limit_value(self) -> int:
        tok = self.cur
        negative = bool(self.eat_op("-"))
        if self.cur.kind != "NUMBER":
            raise ParseError(
                f"unexpected token {self.cur.value!r}", self.cur.pos, expected="integer"
            )
        raw = self.advance().value
        try:
            value = int(raw)
        except ValueError:
            raise ParseError(f"LIMIT/OFFSET must be an integer, got {raw!r}", tok.pos)
        if negative:
            raise ParseError("LIMIT/OFFSET must be non-negative", tok.pos)
        return value

    def parse_select_item(self) -> SelectItem:
        if self.at_op("*"):
            self.advance()
            return SelectItem(expr=Star())
        expr = self.parse_expr()
        alias = None
        if self.eat_kw("AS"):
            alias = self.parse_identifier("alias")[0]
        elif self.cur.kind in ("IDENT",) and self.cur.value.lower() not in KEYWORDS:
            alias = self.advance().value
        item = SelectItem(expr=expr, alias=alias)
        item.aggregated = contains_aggregate(expr)
        return item

    # --- FROM ----------------------------------------------------------------

    def parse_from(self) -> list:
        items: list = [self.parse_table_source()]
        while True:
            if self.eat_op(","):
                items.append(self.parse_table_source())
                continue
            join_type = None
            tok = self.eat_kw(*_JOIN_TYPES)
            if tok is not None:
                join_type = tok.upper
                if join_type in ("LEFT", "RIGHT", "FULL"):
                    self.eat_kw("OUTER")
                self.expect_kw("JOIN")
            elif self.eat_kw("JOIN"):
                join_type = "INNER"
            if join_type is None:
                break
            source = self.parse_table_source()
            on = None
            if self.eat_kw("ON"):
                on = self.parse_expr()
            elif self.at_kw("USING"):
                raise Unsupported("JOIN ... USING", self.cur.pos)
            items.append(Join(join_type=join_type, source=source, on=on))
        return items

    def parse_table_source(self):
        if self.eat_op("("):
            sub = self.parse_query()
            self.expect_op(")")
            alias = None
            if self.eat_kw("AS"):
                alias = self.parse_identifier("alias")[0]
            elif self.cur.kind == "IDENT" and self.cur.value.lower() not in KEYWORDS:
                alias = self.advance().value
            return SubquerySource(query=sub, alias=alias)
        name, quote = self.parse_identifier("table name")
        alias = None
        if self.eat_kw("AS"):
            alias = self.parse_identifier("alias")[0]
        elif self.cur.kind == "IDENT" and self.cur.value.lower() not in KEYWORDS:
            alias = self.advance().value
        return TableRef(name=name, alias=alias, quote=quote)

    def parse_identifier(self, what: str) -> tuple[str, str | None]:
        tok = self.cur
        if tok.kind == "IDENT":
            if tok.value.lower() in KEYWORDS:
                raise ParseError(
                    f"unexpected keyword {tok.value!r}", tok.pos, expected=what
                )
            self.advance()
            return tok.value, None
        if tok.kind == "BACKTICK":
            self.advance()
            return tok.value, "backtick"
        if tok.kind == "BRACKET":
            self.advance()
            return tok.value, "bracket"
        if tok.kind == "DQUOTED" and self.dialect is Dialect.STRICT_STANDARD:
            self.advance()
            return tok.value, "double"
        raise ParseError(f"unexpected token {tok.value!r}", tok.pos, expected=what)

    # --- expressions -----------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        if not self.at_kw("OR"):
            return left
        operands = [left]
        while self.eat_kw("OR"):
            operands.append(self.parse_and())
        return BoolOp(op="OR", operands=operands)

    def parse_and(self) -> Expr:
        left = self.parse_not()
        if not self.at_kw("AND"):
            return left
        operands = [left]
        while self.eat_kw("AND"):
            operands.append(self.parse_not())
        return BoolOp(op="AND", operands=operands)

    def parse_not(self) -> Expr:
        if self.at_kw("NOT"):
            self.advance()
            operand = self.parse_not()
            # NOT EXISTS normalizes onto the Exists node itself
            if isinstance(operand, Exists) and not operand.negated:
                return Exists(query=operand.query, negated=True)
            return Not(operand=operand)
        return self.parse_predicate()

    def parse_predicate(self) -> Expr:
        if self.at_kw("EXISTS"):
            self.advance()
            self.expect_op("(")
            sub = self.parse_query()
            self.expect_op(")")
            return Exists(query=sub)
        left = self.parse_additive()
        return self.parse_predicate_suffix(left)

    def parse_predicate_suffix(self, left: Expr) -> Expr:
        if self.cur.kind == "OP" and self.cur.value in _COMPARE_OPS:
            op = self.advance().value
            right = self.parse_additive()
            return Comparison(op=op, left=left, right=right)
        negated = False
        if self.at_kw("NOT"):
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt is not None and nxt.kind == "IDENT" and nxt.upper in (
                "IN",
                "LIKE",
                "GLOB",
                "BETWEEN",
                "NULL",
            ):
                self.advance()
                negated = True
            else:
                return left
        if self.eat_kw("BETWEEN"):
            low = self.parse_additive()
            self.expect_kw("AND")
            high = self.parse_additive()
            return Between(expr=left, low=low, high=high, negated=negated)
        if self.eat_kw("IN"):
            self.expect_op("(")
            if self.at_kw("SELECT"):
                sub = self.parse_query()
                self.expect_op(")")
                return InSubquery(expr=left, query=sub, negated=negated)
            items = [self.parse_additive()]
            while self.eat_op(","):
                items.append(self.parse_additive())
            self.expect_op(")")
            return InList(expr=left, items=items, negated=negated)
        like_tok = self.eat_kw("LIKE", "GLOB")
        if like_tok is not None:
            pattern = self.parse_additive()
            if self.at_kw("ESCAPE"):
                raise Unsupported("LIKE ... ESCAPE", self.cur.pos)
            return Like(expr=left, pattern=pattern, negated=negated, op=like_tok.upper)
        if self.eat_kw("IS"):
            neg = bool(self.eat_kw("NOT"))
            self.expect_kw("NULL")
            return IsNull(expr=left, negated=neg)
        if negated:
            raise ParseError(
                f"unexpected token {self.cur.value!r}",
                self.cur.pos,
                expected="IN, LIKE, BETWEEN or NULL",
            )
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.at_op("+", "-", "||"):
            op = self.advance().value
            left = BinaryOp(op=op, left=left, right=self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.at_op("*", "/", "%"):
            op = self.advance().value
            left = BinaryOp(op=op, left=left, right=self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.at_op("-", "+"):
            op = self.advance().value
            operand = self.parse_unary()
            if op == "-" and isinstance(operand, Literal) and operand.kind == "number":
                return Literal(value=-operand.value, text=f"-{operand.text}")
            if op == "+":
                return operand
            return UnaryOp(op=op, operand=operand)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "NUMBER":
            self.advance()
            value: int | float
            try:
                value = int(tok.value)
            except ValueError:
                value = float(tok.value)
            return Literal(value=value, text=tok.value)
        if tok.kind == "STRING":
            self.advance()
            return Literal(value=tok.value, text=tok.value, quote="single")
        if tok.kind == "DQUOTED":
            self.advance()
            if self.dialect is Dialect.STRICT_STANDARD:
                return self.finish_column_ref(tok.value, "double")
            return Literal(value=tok.value, text=tok.value, quote="double")
        if tok.kind in ("BACKTICK", "BRACKET"):
            self.advance()
            quote = "backtick" if tok.kind == "BACKTICK" else "bracket"
            return self.finish_column_ref(tok.value, quote)
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            if self.at_kw("SELECT"):
                sub = self.parse_query()
                self.expect_op(")")
                return ScalarSubquery(query=sub)
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        if tok.kind == "OP" and tok.value == "*":
            self.advance()
            return Star()
        if tok.kind == "IDENT":
            upper = tok.upper
            if upper == "NULL":
                self.advance()
                return Literal(value=None, text="NULL")
            if upper == "CASE":
                return self.parse_case()
            if upper == "CAST":
                return self.parse_cast()
            if upper in ("SELECT",):
                raise ParseError("subquery must be parenthesized", tok.pos, expected="(")
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt is not None and nxt.kind == "OP" and nxt.value == "(":
                return self.parse_func_call()
            if tok.value.lower() in KEYWORDS:
                raise ParseError(
                    f"unexpected keyword {tok.value!r}", tok.pos, expected="expression"
                )
            self.advance()
            return self.finish_column_ref(tok.value, None)
        raise ParseError(f"unexpected token {tok.value!r}", tok.pos, expected="expression")

    def finish_column_ref(self, name: str, quote: str | None) -> Expr:
        if self.at_op("."):
            self.advance()
            if self.at_op("*"):
                self.advance()
                return Star(table=name)
            col, col_quote = self.parse_identifier("column name")
            return ColumnRef(name=col, table=name, quote=col_quote or quote)
        return ColumnRef(name=name, quote=quote)

    def parse_func_call(self) -> Expr:
        name_tok = self.advance()
        name = name_tok.value.lower()
        self.expect_op("(")
        distinct = bool(self.eat_kw("DISTINCT"))
        args: list[Expr] = []
        if not self.at_op(")"):
            if self.at_op("*"):
                self.advance()
                args.append(Star())
            else:
                args.append(self.parse_expr())
                while self.eat_op(","):
                    args.append(self.parse_expr())
        self.expect_op(")")
        if self.at_kw("OVER"):
            raise Unsupported("window function (OVER)", self.cur.pos)
        if self.at_kw("FILTER"):
            raise Unsupported("aggregate FILTER clause", self.cur.pos)
        return FuncCall(name=name, args=args, distinct=distinct)

    def parse_case(self) -> Expr:
        self.expect_kw("CASE")
        operand = None
        if not self.at_kw("WHEN"):
            operand = self.parse_expr()
        whens: list[tuple[Expr, Expr]] = []
        while self.eat_kw("WHEN"):
            cond = self.parse_expr()
            self.expect_kw("THEN")
            whens.append((cond, self.parse_expr()))
        if not whens:
            raise ParseError("CASE requires at least one WHEN", self.cur.pos, expected="WHEN")
        else_ = None
        if self.eat_kw("ELSE"):
            else_ = self.parse_expr()
        self.expect_kw("END")
        return CaseExpr(operand=operand, whens=whens, else_=else_)

    def parse_cast(self) -> Expr:
        self.expect_kw("CAST")
        self.expect_op("(")
        inner = self.parse_expr()
        self.expect_kw("AS")
        parts = [self.advance().value]
        while self.cur.kind == "IDENT" and not self.at_op(")"):
            parts.append(self.advance().value)
        self.expect_op(")")
        return Cast(expr=inner, type_name=" ".join(parts).lower())

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        direction = "ASC"
        tok = self.eat_kw("ASC", "DESC")
        if tok is not None:
            direction = tok.upper
        return OrderItem(expr=expr, direction=direction)
