"""Deterministic rewrites for tie-prone queries.

Two rules:

* Limit1ToExtreme   - `ORDER BY k DESC LIMIT 1` becomes a filter against the
  extreme value: `WHERE k = (SELECT MAX(k) FROM <same FROM/WHERE>)` (ASC uses
  MIN). When the ordering key aggregates over a GROUP BY, the filter moves to
  HAVING and the extreme is taken over the same grouping as a nested query.
* GroupByCompletion - every non-aggregated select column missing from an
  existing GROUP BY is appended to it, in select-list order.

Rewrites target the outer query; `LIMIT n` for n>1 is never rewritten. The
MAX/MIN form ignores NULL ordering keys where the original LIMIT form could
surface a NULL-keyed row on some engines; outcomes carry a note when a rewrite
makes that substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .sqlast import (
    BoolOp,
    ColumnRef,
    Comparison,
    Expr,
    FuncCall,
    Join,
    ScalarSubquery,
    SelectItem,
    SelectQuery,
    Star,
    SubquerySource,
    TableRef,
    contains_aggregate,
    walk_expr,
)

if TYPE_CHECKING:
    from .corpus import Corpus

_EXTREME_FOR_DIRECTION = {"DESC": "max", "ASC": "min"}

# scalar functions safe to duplicate into the extreme subquery
_DETERMINISTIC_FUNCS = frozenset(
    {"abs", "round", "length", "upper", "lower", "coalesce", "nullif", "substr",
     "substring", "trim", "ltrim", "rtrim", "replace", "instr"}
)

_AGG_ALIAS = "extreme_key"


class RewriteRule(Enum):
    LIMIT1_TO_EXTREME = "Limit1ToExtreme"
    GROUP_BY_COMPLETION = "GroupByCompletion"
    NONE = "None"


class RewriteStatus(Enum):
    REWRITTEN = "rewritten"
    NOT_APPLICABLE = "not_applicable"
    UNREWRITABLE = "unrewritable"


@dataclass
class RewriteOutcome:
    original: SelectQuery
    rewritten: SelectQuery | None
    rule: RewriteRule
    status: RewriteStatus
    reason_unrewritten: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return self.status is RewriteStatus.REWRITTEN


def _not_applicable(q: SelectQuery, rule: RewriteRule, reason: str) -> RewriteOutcome:
    return RewriteOutcome(q, None, RewriteRule.NONE, RewriteStatus.NOT_APPLICABLE, reason)


def _unrewritable(q: SelectQuery, reason: str) -> RewriteOutcome:
    return RewriteOutcome(q, None, RewriteRule.NONE, RewriteStatus.UNREWRITABLE, reason)


# ---------------------------------------------------------------------------
# Limit1ToExtreme
# ---------------------------------------------------------------------------


def limit1_applicability(q: SelectQuery) -> tuple[bool, str]:
    """Check the outer query against the rewrite's preconditions."""
    if q.limit != 1 or not q.order_by:
        return False, "no LIMIT 1 with ORDER BY"
    if q.set_op is not None:
        return False, "set operation"
    if len(q.order_by) > 1:
        return False, "multi-key ORDER BY"
    if q.offset is not None:
        return False, "LIMIT with OFFSET"
    key = q.order_by[0].expr
    ok, why = _deterministic_key(key)
    if not ok:
        return False, why
    if contains_aggregate(key) and not q.group_by:
        return False, "aggregate ordering key without GROUP BY"
    if _has_correlated_reference(q):
        return False, "correlated outer reference"
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, SubquerySource) and src.alias is None:
            return False, "unaliased derived table"
    return True, ""


def _deterministic_key(key: Expr, in_aggregate: bool = False) -> tuple[bool, str]:
    if isinstance(key, ScalarSubquery):
        return False, "subquery in ordering key"
    if isinstance(key, Star):
        if in_aggregate:  # count(*) is deterministic
            return True, ""
        return False, "star in ordering key"
    if isinstance(key, FuncCall):
        if key.is_aggregate:
            for arg in key.args:
                ok, why = _deterministic_key(arg, in_aggregate=True)
                if not ok:
                    return ok, why
            return True, ""
        if key.name == "random":
            return False, "non-deterministic ordering key"
        if key.name not in _DETERMINISTIC_FUNCS:
            return False, f"unsupported function in ordering key: {key.name}"
    if isinstance(key, ColumnRef) and key.select_index is not None:
        return False, "ordering key references a select alias"
    from .sqlast import child_expressions

    for child in child_expressions(key):
        ok, why = _deterministic_key(child, in_aggregate)
        if not ok:
            return ok, why
    return True, ""


def _has_correlated_reference(q: SelectQuery) -> bool:
    """True when the query's own clauses reference a qualifier not bound in its
    FROM list (duplicating them into a subquery would change scoping)."""
    local: set[str] = set()
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, TableRef):
            local.add(src.binding.lower())
            local.add(src.name.lower())
        elif isinstance(src, SubquerySource) and src.alias:
            local.add(src.alias.lower())
    from .sqlast import query_expressions

    for e in query_expressions(q):
        for node in walk_expr(e):
            if isinstance(node, ColumnRef) and node.table:
                if node.table.lower() not in local:
                    return True
    return False


def rewrite_limit1(ast: SelectQuery) -> RewriteOutcome:
    """Replace `ORDER BY k <dir> LIMIT 1` with an extreme-value filter."""
    import copy

    q = ast
    if q.limit != 1 or not q.order_by:
        return _not_applicable(q, RewriteRule.LIMIT1_TO_EXTREME, "no LIMIT 1 with ORDER BY")
    ok, reason = limit1_applicability(q)
    if not ok:
        return _unrewritable(q, reason)

    extreme = _EXTREME_FOR_DIRECTION[q.order_by[0].direction]
    new_q = q.copy()
    key_outer = new_q.order_by[0].expr
    key_inner = copy.deepcopy(key_outer)

    if new_q.group_by or contains_aggregate(key_outer):
        subquery = _grouped_extreme_subquery(new_q, key_inner, extreme)
        conjunct = Comparison(op="=", left=key_outer, right=ScalarSubquery(query=subquery))
        new_q.having = _conjoin(new_q.having, conjunct)
    else:
        dup = q.copy()
        inner = SelectQuery(
            select=[SelectItem(expr=FuncCall(name=extreme, args=[key_inner]), aggregated=True)],
            from_=dup.from_,
            where=dup.where,
        )
        conjunct = Comparison(op="=", left=key_outer, right=ScalarSubquery(query=inner))
        new_q.where = _conjoin(new_q.where, conjunct)

    new_q.order_by = []
    new_q.limit = None
    return RewriteOutcome(
        q,
        new_q,
        RewriteRule.LIMIT1_TO_EXTREME,
        RewriteStatus.REWRITTEN,
        notes=[
            f"{extreme.upper()} skips NULL ordering keys; the original LIMIT 1 form "
            "could return a NULL-keyed row on some engines"
        ],
    )


def _grouped_extreme_subquery(q: SelectQuery, key: Expr, extreme: str) -> SelectQuery:
    """(SELECT MAX(extreme_key) FROM (SELECT <key> AS extreme_key FROM ...
    WHERE ... GROUP BY ... HAVING ...) AS grouped)

    `key` must be a fresh copy owned by the subquery being built.
    """
    base = q.copy()
    inner = SelectQuery(
        select=[SelectItem(expr=key, alias=_AGG_ALIAS, aggregated=contains_aggregate(key))],
        from_=base.from_,
        where=base.where,
        group_by=base.group_by,
        having=base.having,
    )
    return SelectQuery(
        select=[
            SelectItem(
                expr=FuncCall(name=extreme, args=[ColumnRef(name=_AGG_ALIAS)]),
                aggregated=True,
            )
        ],
        from_=[SubquerySource(query=inner, alias="grouped")],
    )


def _conjoin(existing: Expr | None, extra: Expr) -> Expr:
    if existing is None:
        return extra
    if isinstance(existing, BoolOp) and existing.op == "AND":
        return BoolOp(op="AND", operands=[*existing.operands, extra])
    return BoolOp(op="AND", operands=[existing, extra])


# ---------------------------------------------------------------------------
# GroupByCompletion
# ---------------------------------------------------------------------------


def complete_group_by(ast: SelectQuery, schema=None) -> RewriteOutcome:
    """Append every non-aggregated select column missing from GROUP BY.

    `schema` (a DbSchema) is only needed to expand a `*` select item; without
    it such queries are reported unrewritable.
    """
    from .tie_audit import _column_in_group_by, _grouped_keys

    q = ast
    bare = [it for it in q.select if not it.aggregated]
    if not q.group_by:
        if bare and any(it.aggregated for it in q.select):
            return _not_applicable(
                q,
                RewriteRule.GROUP_BY_COMPLETION,
                "aggregates mixed with bare columns but no GROUP BY clause to complete",
            )
        return _not_applicable(q, RewriteRule.GROUP_BY_COMPLETION, "no GROUP BY clause")

    group_keys = _grouped_keys(q)
    missing: list[Expr] = []
    for it in bare:
        if isinstance(it.expr, Star):
            expanded = _expand_star(q, it.expr, schema)
            if expanded is None:
                return _unrewritable(q, "star select needs schema resolution to complete")
            candidates: list[Expr] = expanded
        else:
            candidates = [it.expr]
        for col in candidates:
            if not _column_in_group_by(col, group_keys):
                missing.append(col)
                group_keys.add(_key_of(col))
    if not missing:
        return _not_applicable(q, RewriteRule.GROUP_BY_COMPLETION, "grouping already complete")

    new_q = q.copy()
    new_q.group_by = [*new_q.group_by, *(_copy_expr(e) for e in missing)]
    return RewriteOutcome(q, new_q, RewriteRule.GROUP_BY_COMPLETION, RewriteStatus.REWRITTEN)


def _key_of(e: Expr) -> tuple:
    from .tie_audit import expr_key

    return expr_key(e)


def _copy_expr(e: Expr) -> Expr:
    import copy

    return copy.deepcopy(e)


def _expand_star(q: SelectQuery, star: Star, schema) -> list[ColumnRef] | None:
    """Expand `*` / `t.*` into qualified column refs via the schema."""
    if schema is None:
        return None
    out: list[ColumnRef] = []
    matched = False
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if not isinstance(src, TableRef):
            return None
        if star.table and src.binding.lower() != star.table.lower():
            continue
        table = schema.table(src.resolved_table or src.name)
        if table is None:
            return None
        matched = True
        for col in table.columns:
            from .sqlast import ResolvedColumn

            out.append(
                ColumnRef(
                    name=col.name,
                    table=src.binding,
                    resolved=ResolvedColumn(table.name, col.name.lower(), col.affinity),
                )
            )
    return out if matched else None


# ---------------------------------------------------------------------------
# Corpus-level application
# ---------------------------------------------------------------------------


@dataclass
class QueryRewrite:
    example_id: str
    outcomes: list[RewriteOutcome]
    final: SelectQuery | None  # None when nothing changed

    @property
    def changed(self) -> bool:
        return self.final is not None

    @property
    def rules_applied(self) -> list[RewriteRule]:
        return [o.rule for o in self.outcomes if o.changed]


def rewrite_query(ast: SelectQuery, schema=None) -> list[RewriteOutcome]:
    """Apply both rules in order (LIMIT 1 first, then GROUP BY completion)."""
    outcomes = [rewrite_limit1(ast)]
    current = outcomes[0].rewritten if outcomes[0].changed else ast
    outcomes.append(complete_group_by(current, schema))
    return outcomes


def apply_rewrites(example_id: str, ast: SelectQuery, schema=None) -> QueryRewrite:
    outcomes = rewrite_query(ast, schema)
    final = None
    current = ast
    for o in outcomes:
        if o.changed:
            current = o.rewritten
            final = current
    return QueryRewrite(example_id=example_id, outcomes=outcomes, final=final)


@dataclass
class RewriteReport:
    corpus_size: int
    affected: int
    per_rule: dict[str, int]
    unrewritable: list[tuple[str, str]]  # (example_id, reason)
    unparsed: int
    rewrites: list[QueryRewrite] = field(default_factory=list)

    @property
    def affected_pct(self) -> float:
        return 100.0 * self.affected / self.corpus_size if self.corpus_size else 0.0

    def to_dict(self) -> dict:
        from .printer import print_sql

        return {
            "corpus_size": self.corpus_size,
            "affected": self.affected,
            "affected_pct": round(self.affected_pct, 2),
            "per_rule": dict(self.per_rule),
            "unrewritable": [
                {"example_id": ex, "reason": reason} for ex, reason in self.unrewritable
            ],
            "unparsed": self.unparsed,
            "rewritten": {
                r.example_id: print_sql(r.final) for r in self.rewrites if r.changed
            },
        }


def rewrite_corpus(corpus: "Corpus") -> RewriteReport:
    """Apply both rules to every gold query of a loaded corpus."""
    per_rule = {RewriteRule.LIMIT1_TO_EXTREME.value: 0, RewriteRule.GROUP_BY_COMPLETION.value: 0}
    unrewritable: list[tuple[str, str]] = []
    rewrites: list[QueryRewrite] = []
    affected = 0
    unparsed = 0
    for entry in corpus.entries:
        if entry.ast is None:
            unparsed += 1
            continue
        schema = corpus.schemas.get(entry.example.database_id)
        qr = apply_rewrites(entry.example.example_id, entry.ast, schema)
        rewrites.append(qr)
        if qr.changed:
            affected += 1
            for rule in qr.rules_applied:
                per_rule[rule.value] += 1
        for o in qr.outcomes:
            if o.status is RewriteStatus.UNREWRITABLE:
                unrewritable.append((entry.example.example_id, o.reason_unrewritten or ""))
    return RewriteReport(
        corpus_size=len(corpus.entries),
        affected=affected,
        per_rule=per_rule,
        unrewritable=unrewritable,
        unparsed=unparsed,
        rewrites=rewrites,
    )
