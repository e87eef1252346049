"""Hypothesis strategies generating ASTs the parser itself could produce,
plus a plain seeded-random query generator for bulk metric checks."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from sqlaudit.sqlast import (
    Between,
    BinaryOp,
    BoolOp,
    CaseExpr,
    Cast,
    ColumnRef,
    Comparison,
    Exists,
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
    contains_aggregate,
)

TABLES = ("t0", "t1", "t2")
COLUMNS = ("c0", "c1", "c2", "c3")
ALIASES = ("a0", "a1", "a2")
FUNCS = ("min", "max", "count", "sum", "avg", "abs", "length", "upper")

names = st.sampled_from(COLUMNS)
table_names = st.sampled_from(TABLES)

_numbers = st.one_of(
    st.integers(min_value=0, max_value=999),
    st.floats(min_value=0.0, max_value=99.0, allow_nan=False).map(lambda f: round(f, 3)),
)
_strings = st.text(alphabet="abcxyz'_ ", min_size=0, max_size=6)

literals = st.one_of(
    _numbers.map(lambda v: Literal(value=v)),
    _strings.map(lambda s: Literal(value=s)),
    st.just(Literal(value=None)),
)

column_refs = st.builds(
    ColumnRef,
    name=names,
    table=st.one_of(st.none(), table_names),
)


def _scalar_exprs(depth: int):
    base = st.one_of(literals, column_refs)
    if depth <= 0:
        return base
    sub = _scalar_exprs(depth - 1)
    return st.one_of(
        base,
        st.builds(
            FuncCall,
            name=st.sampled_from(FUNCS),
            args=st.lists(sub, min_size=1, max_size=2),
            distinct=st.booleans(),
        ),
        st.builds(
            BinaryOp,
            op=st.sampled_from(["+", "-", "*", "/"]),
            left=sub,
            right=sub,
        ),
        st.builds(Cast, expr=sub, type_name=st.sampled_from(["integer", "real", "text"])),
        st.builds(
            CaseExpr,
            operand=st.one_of(st.none(), sub),
            whens=st.lists(st.tuples(sub, sub), min_size=1, max_size=2),
            else_=st.one_of(st.none(), sub),
        ),
    )


def _predicates(depth: int, query_strategy):
    scalar = _scalar_exprs(1)
    atoms = st.one_of(
        st.builds(
            Comparison,
            op=st.sampled_from(["=", "!=", "<", ">", "<=", ">="]),
            left=scalar,
            right=scalar,
        ),
        st.builds(Between, expr=scalar, low=scalar, high=scalar, negated=st.booleans()),
        st.builds(
            InList,
            expr=scalar,
            items=st.lists(literals, min_size=1, max_size=3),
            negated=st.booleans(),
        ),
        st.builds(
            Like,
            expr=column_refs,
            pattern=st.sampled_from(["%x%", "a_", "%"]).map(lambda p: Literal(value=p)),
            negated=st.booleans(),
        ),
        st.builds(IsNull, expr=scalar, negated=st.booleans()),
    )
    if depth > 0 and query_strategy is not None:
        atoms = st.one_of(
            atoms,
            st.builds(InSubquery, expr=scalar, query=query_strategy, negated=st.booleans()),
            st.builds(Exists, query=query_strategy, negated=st.booleans()),
            st.builds(
                Comparison,
                op=st.just("="),
                left=scalar,
                right=st.builds(ScalarSubquery, query=query_strategy),
            ),
        )
    if depth <= 0:
        return atoms
    sub = _predicates(depth - 1, query_strategy)
    return st.one_of(
        atoms,
        st.builds(Not, operand=sub),
        # same-op nesting never comes out of the parser (it flattens n-ary)
        st.builds(
            BoolOp,
            op=st.just("AND"),
            operands=st.lists(atoms, min_size=2, max_size=3),
        ),
        st.builds(
            BoolOp,
            op=st.just("OR"),
            operands=st.lists(
                st.one_of(
                    atoms,
                    st.builds(
                        BoolOp, op=st.just("AND"), operands=st.lists(atoms, min_size=2, max_size=2)
                    ),
                ),
                min_size=2,
                max_size=3,
            ),
        ),
    )


def _select_item(expr) -> SelectItem:
    return SelectItem(expr=expr, aggregated=contains_aggregate(expr))


def _queries(depth: int):
    inner = _queries(depth - 1) if depth > 0 else None
    preds = _predicates(1, inner)
    scalar = _scalar_exprs(1)

    from_items = st.builds(TableRef, name=table_names, alias=st.one_of(st.none(), st.sampled_from(ALIASES)))
    if inner is not None:
        from_items = st.one_of(
            from_items,
            st.builds(SubquerySource, query=inner, alias=st.sampled_from(ALIASES)),
        )

    def build(
        select_exprs,
        distinct,
        first_source,
        joins,
        where,
        group_by,
        having,
        order_by,
        limit,
        offset,
        set_rhs,
    ) -> SelectQuery:
        q = SelectQuery(
            select=[_select_item(e) for e in select_exprs],
            distinct=distinct,
            from_=[first_source]
            + [Join(join_type=jt, source=src, on=on) for jt, src, on in joins],
            where=where,
            group_by=group_by,
            having=having,
            order_by=[OrderItem(expr=e, direction=d) for e, d in order_by],
            limit=limit,
            offset=offset if limit is not None else None,
        )
        if set_rhs is not None:
            q.set_op = SetOp(op=set_rhs[0], query=set_rhs[1])
        return q

    set_rhs = st.none()
    if inner is not None:
        set_rhs = st.one_of(
            st.none(),
            st.tuples(st.sampled_from(["UNION", "UNION ALL", "INTERSECT", "EXCEPT"]), inner),
        )

    return st.builds(
        build,
        select_exprs=st.lists(st.one_of(scalar, st.just(Star())), min_size=1, max_size=3),
        distinct=st.booleans(),
        first_source=from_items,
        joins=st.lists(
            st.tuples(
                st.sampled_from(["INNER", "LEFT", "CROSS"]),
                from_items,
                st.one_of(
                    st.none(),
                    st.builds(
                        Comparison, op=st.just("="), left=column_refs, right=column_refs
                    ),
                ),
            ),
            min_size=0,
            max_size=2,
        ),
        where=st.one_of(st.none(), preds),
        group_by=st.lists(column_refs, min_size=0, max_size=2),
        having=st.one_of(st.none(), preds),
        order_by=st.lists(
            st.tuples(scalar, st.sampled_from(["ASC", "DESC"])), min_size=0, max_size=2
        ),
        limit=st.one_of(st.none(), st.integers(min_value=0, max_value=9)),
        offset=st.one_of(st.none(), st.integers(min_value=0, max_value=5)),
        set_rhs=set_rhs,
    )


#: queries up to two nesting levels deep
queries = _queries(2)


# ---------------------------------------------------------------------------
# Plain seeded generator (fast bulk pair generation without hypothesis)
# ---------------------------------------------------------------------------


def random_query(rng: random.Random, allow_sub: bool = True) -> SelectQuery:
    def col():
        return ColumnRef(name=rng.choice(COLUMNS), table=rng.choice((None,) + TABLES))

    def lit():
        kind = rng.random()
        if kind < 0.4:
            return Literal(value=rng.randint(0, 99))
        if kind < 0.6:
            return Literal(value=round(rng.uniform(0, 9), 2))
        return Literal(value=rng.choice(["x", "abc", "Canada", "a'b"]))

    def scalar(depth=1):
        r = rng.random()
        if depth <= 0 or r < 0.5:
            return col() if rng.random() < 0.6 else lit()
        if r < 0.75:
            return FuncCall(
                name=rng.choice(FUNCS), args=[scalar(depth - 1)], distinct=rng.random() < 0.2
            )
        return BinaryOp(op=rng.choice("+-*/"), left=scalar(depth - 1), right=scalar(depth - 1))

    def predicate(depth=2):
        r = rng.random()
        if depth <= 0 or r < 0.45:
            choice = rng.random()
            if choice < 0.5:
                return Comparison(
                    op=rng.choice(["=", "!=", "<", ">", "<=", ">="]),
                    left=scalar(),
                    right=scalar(),
                )
            if choice < 0.65:
                return Between(expr=col(), low=lit(), high=lit(), negated=rng.random() < 0.3)
            if choice < 0.8:
                return InList(expr=col(), items=[lit() for _ in range(rng.randint(1, 3))])
            if choice < 0.9:
                return IsNull(expr=col(), negated=rng.random() < 0.5)
            if allow_sub:
                return InSubquery(expr=col(), query=random_query(rng, False))
            return Like(expr=col(), pattern=Literal(value="%x%"))
        if r < 0.55:
            return Not(operand=predicate(depth - 1))
        op = "AND" if rng.random() < 0.6 else "OR"
        return BoolOp(op=op, operands=[predicate(0) for _ in range(rng.randint(2, 3))])

    n_items = rng.randint(1, 3)
    items = []
    for _ in range(n_items):
        e = scalar()
        items.append(SelectItem(expr=e, aggregated=contains_aggregate(e)))
    from_: list = [TableRef(name=rng.choice(TABLES), alias=rng.choice((None, "a0", "a1")))]
    if rng.random() < 0.4:
        from_.append(
            Join(
                join_type="INNER",
                source=TableRef(name=rng.choice(TABLES)),
                on=Comparison(op="=", left=col(), right=col()),
            )
        )
    q = SelectQuery(
        select=items,
        distinct=rng.random() < 0.3,
        from_=from_,
        where=predicate() if rng.random() < 0.8 else None,
        group_by=[col() for _ in range(rng.randint(0, 2))],
        having=predicate(1) if rng.random() < 0.2 else None,
        order_by=[
            OrderItem(expr=col(), direction=rng.choice(["ASC", "DESC"]))
            for _ in range(rng.randint(0, 2))
        ],
        limit=rng.choice([None, None, 1, 3]),
    )
    return q
