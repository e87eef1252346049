"""Evaluation metrics: exact set match and execution accuracy.

Exact set match compares queries clause by clause after normalization:
column identity is alias-insensitive (resolution annotations), predicate
order is ignored at each AND/OR level, `=`/`!=` operand order is ignored,
and `<`/`<=` are flipped to `>`/`>=` form. INNER-join ON conjuncts are folded
into the WHERE comparison; source relations count toward the `select`
verdict (the output's identity includes what it selects from). Subqueries
are compared recursively. With `with_values=False` every literal collapses
to a placeholder and LIMIT is compared by presence only.

Execution accuracy runs both queries per instance through a backend adapter
and compares result tables: ordered comparison iff the gold query carries a
top-level ORDER BY, multiset comparison otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .backend import Backend, ResultTable, SqliteBackend
from .errors import BackendError, SchemaMismatch
from .instances import DbInstance
from .printer import print_sql
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
    TableRef,
    UnaryOp,
    top_level_order_by,
)

MATCH_CLAUSES = ("select", "where", "groupBy", "having", "orderBy", "limit", "setOp")


@dataclass
class MatchResult:
    matched: bool
    clause_verdicts: dict[str, bool]
    mismatch_notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "clauses": dict(self.clause_verdicts),
            "notes": list(self.mismatch_notes),
        }


@dataclass
class ExecOutcome:
    per_instance: list[tuple[str, object]]  # (instance id, True | False | error str)
    overall: bool

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "per_instance": [
                {"instance": iid, "verdict": v} for iid, v in self.per_instance
            ],
        }


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

_FLIP = {"<": ">", "<=": ">="}


def _sorted_canon(items: list) -> tuple:
    return tuple(sorted(items, key=repr))


def canon_expr(e: Expr, with_values: bool):
    if isinstance(e, ColumnRef):
        if e.resolved is not None:
            return ("col", e.resolved.table.lower(), e.resolved.column.lower())
        return ("col?", e.name.lower())
    if isinstance(e, Star):
        return ("star", (e.table or "").lower())
    if isinstance(e, Literal):
        if not with_values:
            return ("lit",)
        return ("lit", e.kind, e.value)
    if isinstance(e, FuncCall):
        return (
            "func",
            e.name,
            e.distinct,
            tuple(canon_expr(a, with_values) for a in e.args),
        )
    if isinstance(e, BinaryOp):
        left = canon_expr(e.left, with_values)
        right = canon_expr(e.right, with_values)
        if e.op in ("+", "*"):
            return ("bin", e.op, _sorted_canon([left, right]))
        return ("bin", e.op, (left, right))
    if isinstance(e, UnaryOp):
        return ("unary", e.op, canon_expr(e.operand, with_values))
    if isinstance(e, Comparison):
        left = canon_expr(e.left, with_values)
        right = canon_expr(e.right, with_values)
        op = e.op
        if op == "<>":
            op = "!="
        if op in ("=", "!="):
            return ("cmp", op, _sorted_canon([left, right]))
        if op in _FLIP:
            op, left, right = _FLIP[op], right, left
        return ("cmp", op, (left, right))
    if isinstance(e, BoolOp):
        return (
            e.op.lower(),
            _sorted_canon([canon_expr(x, with_values) for x in e.operands]),
        )
    if isinstance(e, Not):
        return ("not", canon_expr(e.operand, with_values))
    if isinstance(e, Between):
        return (
            "between",
            e.negated,
            canon_expr(e.expr, with_values),
            canon_expr(e.low, with_values),
            canon_expr(e.high, with_values),
        )
    if isinstance(e, InList):
        return (
            "in",
            e.negated,
            canon_expr(e.expr, with_values),
            _sorted_canon([canon_expr(x, with_values) for x in e.items]),
        )
    if isinstance(e, InSubquery):
        return (
            "insubq",
            e.negated,
            canon_expr(e.expr, with_values),
            canon_query(e.query, with_values),
        )
    if isinstance(e, Like):
        return (
            "like",
            e.op,
            e.negated,
            canon_expr(e.expr, with_values),
            canon_expr(e.pattern, with_values),
        )
    if isinstance(e, IsNull):
        return ("isnull", e.negated, canon_expr(e.expr, with_values))
    if isinstance(e, Exists):
        return ("exists", e.negated, canon_query(e.query, with_values))
    if isinstance(e, ScalarSubquery):
        return ("subq", canon_query(e.query, with_values))
    if isinstance(e, CaseExpr):
        return (
            "case",
            None if e.operand is None else canon_expr(e.operand, with_values),
            tuple(
                (canon_expr(w, with_values), canon_expr(t, with_values))
                for w, t in e.whens
            ),
            None if e.else_ is None else canon_expr(e.else_, with_values),
        )
    if isinstance(e, Cast):
        return ("cast", e.type_name.lower(), canon_expr(e.expr, with_values))
    raise TypeError(f"unknown expression node: {type(e).__name__}")


def _from_parts(q: SelectQuery, with_values: bool):
    """(source multiset incl. join types, WHERE-foldable INNER-join ON canons)."""
    sources = []
    folded_ons = []
    for fi in q.from_:
        if isinstance(fi, Join):
            src, jtype, on = fi.source, fi.join_type, fi.on
        else:
            src, jtype, on = fi, "base", None
        if isinstance(src, TableRef):
            src_canon = ("table", (src.resolved_table or src.name).lower())
        else:
            src_canon = ("derived", canon_query(src.query, with_values))
        if on is not None:
            if jtype == "INNER":
                folded_ons.append(canon_expr(on, with_values))
                sources.append((jtype, src_canon))
            else:
                sources.append((jtype, src_canon, canon_expr(on, with_values)))
        else:
            sources.append((jtype, src_canon))
    return _sorted_canon(sources), folded_ons


def _where_canon(q: SelectQuery, with_values: bool):
    _, folded = _from_parts(q, with_values)
    conjuncts = list(folded)
    if q.where is not None:
        w = canon_expr(q.where, with_values)
        if w[0] == "and":
            conjuncts.extend(w[1])
        else:
            conjuncts.append(w)
    if not conjuncts:
        return None
    if len(conjuncts) == 1:
        return conjuncts[0]
    return ("and", _sorted_canon(conjuncts))


def clause_canons(q: SelectQuery, with_values: bool) -> dict[str, object]:
    sources, _ = _from_parts(q, with_values)
    select_items = _sorted_canon([canon_expr(it.expr, with_values) for it in q.select])
    if with_values:
        limit = (q.limit, q.offset)
    else:
        limit = (q.limit is not None, q.offset is not None)
    return {
        "select": (q.distinct, select_items, sources),
        "where": _where_canon(q, with_values),
        "groupBy": _sorted_canon([canon_expr(e, with_values) for e in q.group_by]),
        "having": None if q.having is None else canon_expr(q.having, with_values),
        "orderBy": tuple(
            (canon_expr(oi.expr, with_values), oi.direction) for oi in q.order_by
        ),
        "limit": limit,
        "setOp": None
        if q.set_op is None
        else (q.set_op.op, canon_query(q.set_op.query, with_values)),
    }


def canon_query(q: SelectQuery, with_values: bool):
    canons = clause_canons(q, with_values)
    return tuple(canons[k] for k in MATCH_CLAUSES)


def exact_set_match(
    pred: SelectQuery, gold: SelectQuery, with_values: bool = True
) -> MatchResult:
    """Clause-wise set comparison; see module docstring for the normalization."""
    if (
        pred.database_id is not None
        and gold.database_id is not None
        and pred.database_id != gold.database_id
    ):
        raise SchemaMismatch(pred.database_id, gold.database_id)
    pred_canons = clause_canons(pred, with_values)
    gold_canons = clause_canons(gold, with_values)
    verdicts = {}
    notes = []
    for clause in MATCH_CLAUSES:
        ok = pred_canons[clause] == gold_canons[clause]
        verdicts[clause] = ok
        if not ok:
            notes.append(f"{clause} clause differs")
    return MatchResult(
        matched=all(verdicts.values()), clause_verdicts=verdicts, mismatch_notes=notes
    )


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def execute(
    sql: SelectQuery | str,
    instance: DbInstance,
    backend: Backend | None = None,
) -> ResultTable:
    """Run a query on one instance via a backend adapter (SQLite reference
    adapter by default); row order is preserved as returned."""
    backend = backend or SqliteBackend()
    text = sql if isinstance(sql, str) else print_sql(sql)
    handle = backend.open(instance)
    try:
        return backend.run(handle, text)
    finally:
        handle.close()


def _cell_equal(a, b, float_tol: float, case_insensitive: bool) -> bool:
    if a is None or b is None:
        return a is None and b is None
    a_num = isinstance(a, (int, float)) and not isinstance(a, bool)
    b_num = isinstance(b, (int, float)) and not isinstance(b, bool)
    if a_num and b_num:
        return math.isclose(a, b, rel_tol=float_tol, abs_tol=float_tol)
    if isinstance(a, str) and isinstance(b, str):
        if case_insensitive:
            return a.lower() == b.lower()
        return a == b
    return a == b


def _row_equal(ra, rb, float_tol: float, case_insensitive: bool) -> bool:
    return len(ra) == len(rb) and all(
        _cell_equal(x, y, float_tol, case_insensitive) for x, y in zip(ra, rb)
    )


def _multiset_equal(
    rows_a: list[tuple], rows_b: list[tuple], float_tol: float, case_insensitive: bool
) -> bool:
    if len(rows_a) != len(rows_b):
        return False
    remaining = list(rows_b)
    for ra in rows_a:
        for i, rb in enumerate(remaining):
            if _row_equal(ra, rb, float_tol, case_insensitive):
                remaining.pop(i)
                break
        else:
            return False
    return True


def compare_results(
    a: ResultTable,
    b: ResultTable,
    ordered: bool = False,
    float_tol: float = 1e-6,
    column_permutation: bool = False,
    case_insensitive: bool = False,
    set_mode: bool = False,
) -> bool:
    """Compare result tables: multisets by default (duplicates significant),
    sequences when `ordered`; `column_permutation` reproduces harnesses that
    allow permuted output columns; `set_mode` reproduces laxer set-based ones."""
    if len(a.columns) != len(b.columns):
        return False
    perms = (
        itertools.permutations(range(len(b.columns)))
        if column_permutation and 1 < len(b.columns) <= 8
        else [tuple(range(len(b.columns)))]
    )
    rows_a = a.rows
    for perm in perms:
        rows_b = [tuple(row[i] for i in perm) for row in b.rows]
        ra, rb = rows_a, rows_b
        if set_mode:
            ra = _dedupe(ra, float_tol, case_insensitive)
            rb = _dedupe(rb, float_tol, case_insensitive)
        if ordered:
            if len(ra) == len(rb) and all(
                _row_equal(x, y, float_tol, case_insensitive) for x, y in zip(ra, rb)
            ):
                return True
        elif _multiset_equal(ra, rb, float_tol, case_insensitive):
            return True
    return False


def _dedupe(rows: list[tuple], float_tol: float, case_insensitive: bool) -> list[tuple]:
    out: list[tuple] = []
    for row in rows:
        if not any(_row_equal(row, seen, float_tol, case_insensitive) for seen in out):
            out.append(row)
    return out


def execution_accuracy(
    pred: SelectQuery | str,
    gold: SelectQuery | str,
    instances: list[DbInstance],
    backend: Backend | None = None,
    float_tol: float = 1e-6,
    column_permutation: bool = False,
    set_mode: bool = False,
) -> ExecOutcome:
    """Both queries on every instance; overall true iff equal everywhere.
    Ordered comparison iff the gold query has a top-level ORDER BY."""
    backend = backend or SqliteBackend()
    if isinstance(gold, str):
        from .parser import parse_sql

        gold_ast = parse_sql(gold)
    else:
        gold_ast = gold
    ordered = bool(top_level_order_by(gold_ast))
    per_instance: list[tuple[str, object]] = []
    overall = True
    for inst in instances:
        iid = inst.instance_id
        try:
            res_gold = execute(gold, inst, backend)
            res_pred = execute(pred, inst, backend)
        except BackendError as exc:
            per_instance.append((iid, f"error: {exc.message}"))
            overall = False
            continue
        equal = compare_results(
            res_pred,
            res_gold,
            ordered=ordered,
            float_tol=float_tol,
            column_permutation=column_permutation,
            set_mode=set_mode,
        )
        per_instance.append((iid, equal))
        overall = overall and equal
    return ExecOutcome(per_instance=per_instance, overall=overall)
