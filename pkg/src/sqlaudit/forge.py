"""Database-instance generators: random, tie-provoking, and tie-free.

Forging is constraint-targeted row injection into a small random base
instance: witness "bundles" (one row per FROM table, join-linked, WHERE
satisfying) are appended so that the targeted tie condition holds, then the
construction is verified by executing a divergence probe on the result.
Verification failures retry with perturbed seeds before raising CannotForge.

Tie-free instances make the query's ordering keys / grouped columns
injective so every extreme is unique and grouping keys functionally
determine the rest of their row.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import CannotForge, InfeasibleConstraints, ResolutionError
from .instances import DbInstance, Provenance
from .resolver import resolve_columns
from .schema import DbSchema, Table
from .sqlast import (
    Between,
    BoolOp,
    ColumnRef,
    Comparison,
    Expr,
    FuncCall,
    InList,
    IsNull,
    Join,
    Like,
    Literal,
    SelectItem,
    SelectQuery,
    Star,
    SubquerySource,
    contains_aggregate,
    walk_expr,
)
from .tie_audit import TieCategory, TieFinding, audit_query, outer_findings

# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

_TEXT_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _random_value(rng: random.Random, affinity: str):
    if affinity == "integer":
        return rng.randint(0, 100)
    if affinity == "real":
        return round(rng.uniform(0.0, 100.0), 2)
    if affinity == "boolean":
        return rng.randint(0, 1)
    if affinity == "date":
        return f"20{rng.randint(0, 29):02d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
    if affinity == "blob":
        return "".join(rng.choice(_TEXT_ALPHABET) for _ in range(6))
    return "".join(rng.choice(_TEXT_ALPHABET) for _ in range(4))


def _injective_value(affinity: str, i: int, tag: str = "v"):
    if affinity == "integer":
        return 10 + 7 * i
    if affinity == "real":
        return round(3.25 + 1.5 * i, 2)
    if affinity == "boolean":
        return i % 2  # boolean cannot be injective beyond two rows
    if affinity == "date":
        return f"{2000 + i}-01-15"
    return f"{tag}_{i:04d}"


def _unique_key_columns(table: Table) -> set[str]:
    cols: set[str] = set()
    for key_set in table.unique_column_sets():
        cols.update(key_set)
    return cols


def _topo_tables(schema: DbSchema) -> list[Table]:
    """Parents before children; cyclic leftovers appended in schema order."""
    name_to_table = {t.name.lower(): t for t in schema.tables}
    deps = {
        t.name.lower(): {
            fk.ref_table.lower() for fk in t.foreign_keys if fk.ref_table.lower() != t.name.lower()
        }
        for t in schema.tables
    }
    ordered: list[Table] = []
    placed: set[str] = set()
    while len(ordered) < len(schema.tables):
        progressed = False
        for t in schema.tables:
            key = t.name.lower()
            if key in placed:
                continue
            if deps[key] <= placed:
                ordered.append(t)
                placed.add(key)
                progressed = True
        if not progressed:
            for t in schema.tables:  # FK cycle: emit the rest as-is
                if t.name.lower() not in placed:
                    ordered.append(t)
                    placed.add(t.name.lower())
            break
    return ordered


def random_instance(
    schema: DbSchema, seed: int, rows_per_table: int | dict[str, int] = 3
) -> DbInstance:
    """Deterministic random instance; FKs satisfied by sampling parent keys."""

    def rows_for(name: str) -> int:
        if isinstance(rows_per_table, dict):
            return rows_per_table.get(name, rows_per_table.get("*", 3))
        return rows_per_table

    rng = random.Random(seed)
    tables: dict[str, list[tuple]] = {}
    for table in _topo_tables(schema):
        n = rows_for(table.name)
        if n < 0:
            raise InfeasibleConstraints(f"negative row count for {table.name}")
        unique_cols = _unique_key_columns(table)
        fk_by_col: dict[str, tuple[str, str]] = {}
        for fk in table.foreign_keys:
            for local, ref in zip(fk.columns, fk.ref_columns):
                fk_by_col[local.lower()] = (fk.ref_table, ref)
        col_index = {c.name.lower(): i for i, c in enumerate(table.columns)}
        rows: list[tuple] = []
        for i in range(n):
            row: list = []
            for c in table.columns:
                lname = c.name.lower()
                if lname in fk_by_col:
                    ref_table, ref_col = fk_by_col[lname]
                    parent = schema.table(ref_table)
                    parent_rows = tables.get(parent.name, [])
                    if not parent_rows:
                        raise InfeasibleConstraints(
                            f"{table.name}.{c.name} references empty table {ref_table}"
                        )
                    ref_idx = {
                        pc.name.lower(): j for j, pc in enumerate(parent.columns)
                    }[ref_col.lower()]
                    if lname in unique_cols:
                        pool = sorted({r[ref_idx] for r in parent_rows}, key=repr)
                        if i >= len(pool):
                            raise InfeasibleConstraints(
                                f"unique FK column {table.name}.{c.name} needs more "
                                f"parent keys than {ref_table} has"
                            )
                        row.append(pool[i])
                    else:
                        row.append(rng.choice(parent_rows)[ref_idx])
                elif lname in unique_cols:
                    row.append(_injective_value(c.affinity, i, tag=lname[:4]))
                else:
                    row.append(_random_value(rng, c.affinity))
            rows.append(tuple(row))
        tables[table.name] = rows
    return DbInstance(
        schema=schema, tables=tables, provenance=Provenance("Random", seed=seed)
    )


# ---------------------------------------------------------------------------
# Constraint extraction (WHERE conjuncts + join equalities)
# ---------------------------------------------------------------------------


@dataclass
class _Constraints:
    pinned: dict[tuple[str, str], object] = field(default_factory=dict)
    lower: dict[tuple[str, str], float] = field(default_factory=dict)  # strict >
    lower_eq: dict[tuple[str, str], float] = field(default_factory=dict)
    upper: dict[tuple[str, str], float] = field(default_factory=dict)
    upper_eq: dict[tuple[str, str], float] = field(default_factory=dict)
    like: dict[tuple[str, str], str] = field(default_factory=dict)
    non_null: set[tuple[str, str]] = field(default_factory=set)
    groups: dict[tuple[str, str], set[tuple[str, str]]] = field(default_factory=dict)

    def union(self, a: tuple[str, str], b: tuple[str, str]) -> None:
        ga = self.groups.setdefault(a, {a})
        gb = self.groups.setdefault(b, {b})
        merged = ga | gb
        for key in merged:
            self.groups[key] = merged

    def group_of(self, key: tuple[str, str]) -> set[tuple[str, str]]:
        return self.groups.get(key, {key})


def _col_key(e: Expr) -> tuple[str, str] | None:
    if isinstance(e, ColumnRef) and e.resolved is not None:
        return (e.resolved.table.lower(), e.resolved.column.lower())
    return None


def _conjuncts(e: Expr | None) -> list[Expr]:
    if e is None:
        return []
    if isinstance(e, BoolOp) and e.op == "AND":
        out = []
        for part in e.operands:
            out.extend(_conjuncts(part))
        return out
    if isinstance(e, BoolOp) and e.op == "OR" and e.operands:
        # satisfy the first disjunct; verification catches bad picks
        return _conjuncts(e.operands[0])
    return [e]


def _extract_constraints(q: SelectQuery) -> _Constraints:
    cons = _Constraints()
    conjuncts: list[Expr] = []
    for fi in q.from_:
        if isinstance(fi, Join) and fi.on is not None:
            conjuncts.extend(_conjuncts(fi.on))
    conjuncts.extend(_conjuncts(q.where))
    for c in conjuncts:
        if isinstance(c, Comparison):
            lk, rk = _col_key(c.left), _col_key(c.right)
            if lk and rk and c.op == "=":
                cons.union(lk, rk)
                continue
            col, lit, op = None, None, c.op
            if lk and isinstance(c.right, Literal):
                col, lit = lk, c.right.value
            elif rk and isinstance(c.left, Literal):
                col, lit = rk, c.left.value
                op = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}.get(op, op)
            if col is None:
                continue
            if op == "=":
                cons.pinned[col] = lit
            elif isinstance(lit, (int, float)):
                if op == ">":
                    cons.lower[col] = max(cons.lower.get(col, float("-inf")), lit)
                elif op == ">=":
                    cons.lower_eq[col] = max(cons.lower_eq.get(col, float("-inf")), lit)
                elif op == "<":
                    cons.upper[col] = min(cons.upper.get(col, float("inf")), lit)
                elif op == "<=":
                    cons.upper_eq[col] = min(cons.upper_eq.get(col, float("inf")), lit)
        elif isinstance(c, Like) and not c.negated:
            key = _col_key(c.expr)
            if key and isinstance(c.pattern, Literal) and isinstance(c.pattern.value, str):
                cons.like[key] = c.pattern.value
        elif isinstance(c, InList) and not c.negated:
            key = _col_key(c.expr)
            if key and c.items and isinstance(c.items[0], Literal):
                cons.pinned[key] = c.items[0].value
        elif isinstance(c, IsNull):
            key = _col_key(c.expr)
            if key and c.negated:
                cons.non_null.add(key)
        elif isinstance(c, Between) and not c.negated:
            key = _col_key(c.expr)
            if key and isinstance(c.low, Literal) and isinstance(c.low.value, (int, float)):
                cons.lower_eq[key] = max(cons.lower_eq.get(key, float("-inf")), c.low.value)
            if key and isinstance(c.high, Literal) and isinstance(c.high.value, (int, float)):
                cons.upper_eq[key] = min(cons.upper_eq.get(key, float("inf")), c.high.value)
    return cons


def _satisfying_value(
    cons: _Constraints, key: tuple[str, str], affinity: str, fallback
) -> object:
    group = cons.group_of(key)
    for member in group:
        if member in cons.pinned:
            return cons.pinned[member]
    low = max(
        [cons.lower.get(m, float("-inf")) + 1 for m in group]
        + [cons.lower_eq.get(m, float("-inf")) for m in group]
    )
    high = min(
        [cons.upper.get(m, float("inf")) - 1 for m in group]
        + [cons.upper_eq.get(m, float("inf")) for m in group]
    )
    for member in group:
        if member in cons.like:
            return cons.like[member].replace("%", "x").replace("_", "y")
    if low > float("-inf") or high < float("inf"):
        if low > high:
            raise CannotForge(f"unsatisfiable range on {key[0]}.{key[1]}")
        if low > float("-inf") and high < float("inf"):
            value = (low + high) / 2
        elif low > float("-inf"):
            value = low
        else:
            value = high
        return int(value) if affinity == "integer" else round(float(value), 2)
    return fallback


# ---------------------------------------------------------------------------
# Tie forging
# ---------------------------------------------------------------------------

_EXTREME_VALUES = {
    ("integer", "DESC"): 1_000_000,
    ("integer", "ASC"): -1_000_000,
    ("real", "DESC"): 1_000_000.5,
    ("real", "ASC"): -1_000_000.5,
    ("text", "DESC"): "zzzz_tie",
    ("text", "ASC"): "!tie",
    ("date", "DESC"): "9999-12-31",
    ("date", "ASC"): "0001-01-01",
    ("boolean", "DESC"): 1,
    ("boolean", "ASC"): 0,
    ("blob", "DESC"): "zzzz_tie",
    ("blob", "ASC"): "!tie",
}


def _from_tables(q: SelectQuery, schema: DbSchema) -> list[tuple[str, Table]]:
    """(binding, schema table) per FROM entry; CannotForge on derived tables."""
    out = []
    for fi in q.from_:
        src = fi.source if isinstance(fi, Join) else fi
        if isinstance(src, SubquerySource):
            raise CannotForge("derived table in FROM")
        table = schema.table(src.resolved_table or src.name)
        if table is None:
            raise CannotForge(f"unknown table {src.name}")
        out.append((src.binding.lower(), table))
    return out


def _resolved_query(query: SelectQuery, schema: DbSchema) -> SelectQuery:
    try:
        return resolve_columns(query, schema)
    except ResolutionError as exc:
        raise CannotForge(f"query does not resolve against schema: {exc}") from exc


def _selected_columns(q: SelectQuery) -> list[ColumnRef]:
    cols = []
    for it in q.select:
        for node in walk_expr(it.expr):
            if isinstance(node, ColumnRef) and node.resolved is not None:
                cols.append(node)
    return cols


def _key_columns(e: Expr) -> list[ColumnRef]:
    return [
        n for n in walk_expr(e) if isinstance(n, ColumnRef) and n.resolved is not None
    ]


def _pk_counter(instance_tables: dict[str, list[tuple]], table: Table) -> dict[str, int]:
    """Next free integer per unique integer-ish column (for fresh key values)."""
    counters: dict[str, int] = {}
    rows = instance_tables.get(table.name, [])
    for i, c in enumerate(table.columns):
        if c.name.lower() in _unique_key_columns(table) and c.affinity == "integer":
            existing = [r[i] for r in rows if isinstance(r[i], int)]
            counters[c.name.lower()] = (max(existing) + 1) if existing else 1000
    return counters


class _BundleBuilder:
    """Builds join-linked witness rows across the FROM tables of a query."""

    def __init__(self, q: SelectQuery, schema: DbSchema, seed: int):
        self.q = q
        self.schema = schema
        self.rng = random.Random(seed)
        self.tables = _from_tables(q, schema)
        self.cons = _extract_constraints(q)
        self.overrides_shared: dict[tuple[str, str], object] = {}
        self.overrides_per_bundle: dict[tuple[str, str], list[object]] = {}
        self.group_values: dict[frozenset, object] = {}

    def table_for(self, resolved_table: str) -> Table | None:
        for _, t in self.tables:
            if t.name.lower() == resolved_table.lower():
                return t
        return None

    def share(self, key: tuple[str, str], value) -> None:
        for member in self.cons.group_of(key):
            self.overrides_shared[member] = value

    def vary(self, key: tuple[str, str], values: list) -> None:
        for member in self.cons.group_of(key):
            self.overrides_per_bundle[member] = values

    def check_unique_violation(self, n_bundles: int) -> None:
        """The tie columns (shared across bundles) must not cover a unique key."""
        if n_bundles < 2:
            return
        shared_by_table: dict[str, set[str]] = {}
        for (tname, cname) in self.overrides_shared:
            shared_by_table.setdefault(tname, set()).add(cname)
        for tname, shared_cols in shared_by_table.items():
            table = self.schema.table(tname)
            if table is None:
                continue
            varied = {
                c for (t, c) in self.overrides_per_bundle if t == tname
            }
            for key_set in table.unique_column_sets():
                if key_set <= shared_cols and not (key_set & varied):
                    raise CannotForge(
                        f"tie would duplicate unique key ({', '.join(sorted(key_set))}) "
                        f"of table {table.name}"
                    )

    def _bundle_fixed_columns(self, table: Table) -> set[str]:
        """Columns of `table` whose value is pinned for a whole bundle (shared,
        per-bundle, or join-linked); a table repeats within a bundle only when
        no unique key set is fully bundle-fixed."""
        tname = table.name.lower()
        fixed = {c for (t, c) in self.overrides_shared if t == tname}
        fixed |= {c for (t, c) in self.overrides_per_bundle if t == tname}
        for c in table.columns:
            key = (tname, c.name.lower())
            if len(self.cons.group_of(key)) > 1:
                fixed.add(c.name.lower())
        fixed |= {c for (t, c) in self.cons.pinned if t == tname}
        return fixed

    def _can_repeat(self, table: Table) -> bool:
        fixed = self._bundle_fixed_columns(table)
        return not any(ks <= fixed for ks in table.unique_column_sets())

    def build(self, instance: DbInstance, n_bundles: int, group_size: int = 1) -> None:
        """Append witness rows: per bundle, one row per FROM table, plus
        `group_size - 1` extra member rows for tables free to repeat."""
        self.check_unique_violation(n_bundles)
        counters = {t.name: _pk_counter(instance.tables, t) for _, t in self.tables}
        for b in range(n_bundles):
            bundle_joins: dict[frozenset, object] = {}
            for member in range(group_size):
                for _binding, table in self.tables:
                    if member > 0 and not self._can_repeat(table):
                        continue
                    row = self._build_row(
                        table, b, member, counters[table.name], bundle_joins
                    )
                    instance.tables[table.name].append(tuple(row))

    def _build_row(
        self,
        table: Table,
        bundle: int,
        member: int,
        counters: dict[str, int],
        bundle_joins: dict[frozenset, object],
    ) -> list:
        unique_cols = _unique_key_columns(table)
        row: list = []
        for i, c in enumerate(table.columns):
            key = (table.name.lower(), c.name.lower())
            group = frozenset(self.cons.group_of(key))
            joined = len(group) > 1
            if key in self.overrides_per_bundle:
                value = self.overrides_per_bundle[key][bundle % len(self.overrides_per_bundle[key])]
                if member > 0 and c.name.lower() in unique_cols:
                    raise CannotForge(
                        f"group size {member + 1} duplicates unique column {c.name}"
                    )
            elif key in self.overrides_shared:
                value = self.overrides_shared[key]
            elif joined and group in bundle_joins:
                value = bundle_joins[group]
            elif c.name.lower() in unique_cols:
                if c.affinity == "integer":
                    value = counters[c.name.lower()]
                    counters[c.name.lower()] += 1
                else:
                    value = f"{c.name[:4]}_{bundle}_{member}_{self.rng.randint(0, 9999)}"
                if joined:
                    bundle_joins[group] = value  # anchor join partners on this key
            elif joined:
                bundle_joins[group] = self._join_value(group, c.affinity, bundle)
                value = bundle_joins[group]
            else:
                value = _satisfying_value(
                    self.cons, key, c.affinity, _random_value(self.rng, c.affinity)
                )
            if key in self.cons.pinned:
                value = self.cons.pinned[key]
            row.append(value)
        return row

    def _join_value(self, group: frozenset, affinity: str, bundle: int):
        for member in group:
            if member in self.cons.pinned:
                return self.cons.pinned[member]
        if affinity == "integer":
            return 500_000 + bundle
        if affinity == "real":
            return 500_000.5 + bundle
        return f"join_{bundle:04d}"


def _min_group_size(q: SelectQuery) -> int:
    """Minimum group cardinality implied by HAVING count(*) comparisons."""
    size = 1
    for c in _conjuncts(q.having):
        if not isinstance(c, Comparison):
            continue
        func, lit, op = None, None, c.op
        if isinstance(c.left, FuncCall) and isinstance(c.right, Literal):
            func, lit = c.left, c.right.value
        elif isinstance(c.right, FuncCall) and isinstance(c.left, Literal):
            func, lit = c.right, c.left.value
            op = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}.get(op, op)
        if func is None or func.name != "count" or not isinstance(lit, int):
            continue
        if op == ">":
            size = max(size, lit + 1)
        elif op in (">=", "="):
            size = max(size, lit)
    return size


def forge_tie_instance(
    schema: DbSchema,
    query: SelectQuery,
    seed: int = 0,
    rows_per_table: int = 3,
    target_id: str | None = None,
    max_attempts: int = 4,
) -> DbInstance:
    """Instance on which the query's tie finding provably bites (verified by
    executing a divergence probe)."""
    q = _resolved_query(query, schema)
    findings = outer_findings(audit_query(q, schema))
    if not findings:
        raise CannotForge("query carries no tie findings")
    last_reason = "no forgeable finding"
    for finding in findings:
        for attempt in range(max_attempts):
            try:
                inst = _forge_for_finding(
                    schema, q, finding, seed + attempt * 101, rows_per_table
                )
            except CannotForge as exc:
                last_reason = exc.reason
                break
            if _verify_tie(inst, q, finding):
                inst.provenance = Provenance("TieForged", seed=seed, target=target_id)
                return inst
            last_reason = f"verification failed for {finding.category.value}"
    raise CannotForge(last_reason)


def _forge_for_finding(
    schema: DbSchema,
    q: SelectQuery,
    finding: TieFinding,
    seed: int,
    rows_per_table: int,
) -> DbInstance:
    instance = random_instance(schema, seed, rows_per_table)
    instance.provenance = Provenance("TieForged", seed=seed)
    builder = _BundleBuilder(q, schema, seed)
    cat = finding.category

    if cat in (TieCategory.LIMIT1, TieCategory.LIMITN) and q.order_by:
        group_size = 1
        if contains_aggregate(q.order_by[0].expr) or q.group_by:
            # tie between groups: bundles are groups of equal size, so every
            # aggregate over them (count/sum/avg/min/max of shared values) ties
            group_size = max(_min_group_size(q), rows_per_table + 2)
            shared_cols: set[tuple[str, str]] = set()
            for oi in q.order_by:
                for col in _key_columns(oi.expr):
                    key = (col.resolved.table.lower(), col.resolved.column.lower())
                    shared_cols.add(key)
                    builder.share(
                        key,
                        _satisfying_value(
                            builder.cons, key, col.resolved.affinity,
                            _EXTREME_VALUES[(col.resolved.affinity, "DESC")],
                        ),
                    )
            diff = _pick_diff_column(builder, q, exclude=shared_cols)
            builder.vary(diff[0], diff[1])
        else:
            # every ordering key equal across bundles; the first one extreme
            excluded: set[tuple[str, str]] = set()
            for i, oi in enumerate(q.order_by):
                key_cols = _key_columns(oi.expr)
                if i == 0 and not key_cols:
                    raise CannotForge("ordering key has no resolvable columns")
                for col in key_cols:
                    key = (col.resolved.table.lower(), col.resolved.column.lower())
                    excluded.add(key)
                    extreme = _EXTREME_VALUES[(col.resolved.affinity, oi.direction)]
                    builder.share(
                        key,
                        _satisfying_value(builder.cons, key, col.resolved.affinity, extreme),
                    )
            diff = _pick_diff_column(builder, q, exclude=excluded)
            builder.vary(diff[0], diff[1])
        n = 2 if cat is TieCategory.LIMIT1 else max(2, (q.limit or 1) + 1)
        builder.build(instance, n, group_size=group_size)
        return instance

    if cat is TieCategory.LIMITN:  # LIMIT with no ORDER BY
        n = (q.limit or 1) + 1
        key, _ = _pick_diff_column(builder, q, exclude=set())
        builder.vary(key, _distinct_values(builder, key, n))
        builder.build(instance, n)
        return instance

    if cat is TieCategory.GROUP_BY_MISUSE:
        # bundles all land in one group (shared grouped columns) while an
        # ungrouped selected column varies across them
        n = max(2, _min_group_size(q))
        grouped: set[tuple[str, str]] = set()
        for e in q.group_by:
            for col in _key_columns(e):
                key = (col.resolved.table.lower(), col.resolved.column.lower())
                grouped.add(key)
                builder.share(
                    key,
                    _satisfying_value(
                        builder.cons, key, col.resolved.affinity,
                        "tie_group"
                        if col.resolved.affinity in ("text", "blob", "date")
                        else 777_777,
                    ),
                )
        diff = _pick_diff_column(builder, q, exclude=grouped, prefer_ungrouped=True)
        builder.vary(diff[0], _distinct_values(builder, diff[0], n))
        builder.build(instance, n)
        return instance

    if cat is TieCategory.ORDER_BY_DISTINCT:
        selected = set()
        for col in _selected_columns(q):
            key = (col.resolved.table.lower(), col.resolved.column.lower())
            selected.add(key)
            builder.share(
                key,
                _satisfying_value(
                    builder.cons,
                    key,
                    col.resolved.affinity,
                    "tie_dist" if col.resolved.affinity in ("text", "blob") else 888_888,
                ),
            )
        order_cols = [c for oi in q.order_by for c in _key_columns(oi.expr)]
        diff_key = None
        for col in order_cols:
            key = (col.resolved.table.lower(), col.resolved.column.lower())
            if key not in selected:
                diff_key = (key, col.resolved.affinity)
                break
        if diff_key is None:
            raise CannotForge("no ordering column outside the select list")
        builder.overrides_shared.pop(diff_key[0], None)
        builder.vary(diff_key[0], _distinct_values(builder, diff_key[0], 2))
        builder.check_unique_violation(2)
        builder.build(instance, 2)
        return instance

    raise CannotForge(f"no forge strategy for {cat.value}")


def _distinct_values(builder: _BundleBuilder, key: tuple[str, str], n: int) -> list:
    table = builder.schema.table(key[0])
    affinity = "text"
    if table is not None:
        col = table.column(key[1])
        if col is not None:
            affinity = col.affinity
    if key in builder.cons.pinned:
        raise CannotForge(f"column {key[0]}.{key[1]} pinned by predicates; cannot vary")
    if affinity == "integer":
        return [900_001 + i for i in range(n)]
    if affinity == "real":
        return [900_001.25 + i for i in range(n)]
    if affinity == "boolean":
        if n > 2:
            raise CannotForge("boolean column cannot take more than two values")
        return [0, 1][:n]
    if affinity == "date":
        return [f"{3000 + i}-06-15" for i in range(n)]
    return [f"tie_{chr(97 + i)}" for i in range(n)]


def _pick_diff_column(
    builder: _BundleBuilder,
    q: SelectQuery,
    exclude: set[tuple[str, str]],
    prefer_ungrouped: bool = False,
) -> tuple[tuple[str, str], list]:
    """A selected column the witness rows can differ in."""
    candidates: list[tuple[str, str, str]] = []
    grouped = {
        (c.resolved.table.lower(), c.resolved.column.lower())
        for e in q.group_by
        for c in _key_columns(e)
    }
    for it in q.select:
        if isinstance(it.expr, Star):
            for binding, table in builder.tables:
                for c in table.columns:
                    key = (table.name.lower(), c.name.lower())
                    if c.name.lower() not in _unique_key_columns(table):
                        candidates.append((key[0], key[1], c.affinity))
        else:
            for col in _key_columns(it.expr):
                key = (col.resolved.table.lower(), col.resolved.column.lower())
                candidates.append((key[0], key[1], col.resolved.affinity))
    for tname, cname, affinity in candidates:
        key = (tname, cname)
        if key in exclude or key in builder.cons.pinned:
            continue
        if prefer_ungrouped and key in grouped:
            continue
        # distinct per-bundle values keep unique constraints intact by construction
        return key, _distinct_values(builder, key, 4)
    raise CannotForge("no selected column free to differ between tied rows")


# ---------------------------------------------------------------------------
# Verification probes
# ---------------------------------------------------------------------------


def _probe_rows(instance: DbInstance, probe: SelectQuery) -> list[tuple]:
    from .metrics import execute

    return execute(probe, instance).rows


def _verify_tie(instance: DbInstance, q: SelectQuery, finding: TieFinding) -> bool:
    try:
        return _verify_tie_inner(instance, q, finding)
    except Exception:
        return False


def _verify_tie_inner(instance: DbInstance, q: SelectQuery, finding: TieFinding) -> bool:
    import copy

    cat = finding.category
    if cat in (TieCategory.LIMIT1, TieCategory.LIMITN) and q.order_by:
        probe = copy.deepcopy(q)
        n_keys = len(probe.order_by)
        probe.select = [
            SelectItem(expr=copy.deepcopy(oi.expr), aggregated=contains_aggregate(oi.expr))
            for oi in probe.order_by
        ] + probe.select
        probe.limit = None
        probe.offset = None
        probe.distinct = False
        rows = _probe_rows(instance, probe)
        if len(rows) < 2:
            return False
        top_key = rows[0][:n_keys]
        tied = [r for r in rows if r[:n_keys] == top_key]
        if len(tied) < max(2, (q.limit or 1) + (0 if cat is TieCategory.LIMIT1 else 1)):
            return False
        return len({r[n_keys:] for r in tied}) >= 2
    if cat is TieCategory.LIMITN:
        probe = copy.deepcopy(q)
        probe.limit = None
        probe.offset = None
        rows = _probe_rows(instance, probe)
        return len(rows) > (q.limit or 0) and len(set(rows)) > 1
    if cat is TieCategory.GROUP_BY_MISUSE:
        bare_cols = _bare_misuse_columns(q)
        if not bare_cols:
            return False
        probe = copy.deepcopy(q)
        probe.select = [
            SelectItem(
                expr=FuncCall(name="count", args=[copy.deepcopy(bare_cols[0])], distinct=True),
                aggregated=True,
            )
        ]
        probe.order_by = []
        probe.limit = None
        probe.offset = None
        rows = _probe_rows(instance, probe)
        return any(isinstance(r[0], int) and r[0] >= 2 for r in rows)
    if cat is TieCategory.ORDER_BY_DISTINCT:
        probe = copy.deepcopy(q)
        order_exprs = [copy.deepcopy(oi.expr) for oi in probe.order_by]
        probe_group = [copy.deepcopy(it.expr) for it in probe.select]
        probe.select = [
            SelectItem(
                expr=FuncCall(name="count", args=[order_exprs[0]], distinct=True),
                aggregated=True,
            )
        ]
        probe.distinct = False
        probe.group_by = probe_group
        probe.having = None
        probe.order_by = []
        probe.limit = None
        rows = _probe_rows(instance, probe)
        return any(isinstance(r[0], int) and r[0] >= 2 for r in rows)
    return False


def _bare_misuse_columns(q: SelectQuery) -> list[ColumnRef]:
    from .tie_audit import _column_in_group_by, _grouped_keys

    group_keys = _grouped_keys(q)
    out = []
    for it in q.select:
        if it.aggregated or isinstance(it.expr, Star):
            continue
        if not q.group_by or not _column_in_group_by(it.expr, group_keys):
            for col in _key_columns(it.expr):
                out.append(col)
    return out


# ---------------------------------------------------------------------------
# Tie-free forging
# ---------------------------------------------------------------------------


def forge_tie_free_instance(
    schema: DbSchema,
    query: SelectQuery,
    seed: int = 0,
    rows_per_table: int = 4,
    target_id: str | None = None,
) -> DbInstance:
    """Instance on which every extreme the query depends on is unique and the
    grouping keys functionally determine the selected columns."""
    q = _resolved_query(query, schema)
    findings = outer_findings(audit_query(q, schema))
    if not findings:
        raise CannotForge("query carries no tie findings")
    instance = random_instance(schema, seed + 17, rows_per_table)
    instance.provenance = Provenance("TieFree", seed=seed, target=target_id)

    injective_cols: set[tuple[str, str]] = set()
    truncate_to: dict[str, int] = {}
    for finding in findings:
        cat = finding.category
        if cat in (TieCategory.LIMIT1, TieCategory.LIMITN) and q.order_by:
            for oi in q.order_by:
                for col in _key_columns(oi.expr):
                    injective_cols.add(
                        (col.resolved.table.lower(), col.resolved.column.lower())
                    )
            if contains_aggregate(q.order_by[0].expr) and q.group_by:
                for e in q.group_by:
                    for col in _key_columns(e):
                        injective_cols.add(
                            (col.resolved.table.lower(), col.resolved.column.lower())
                        )
                # aggregates over equal-sized groups tie; skew join fan-out
                _skew_join_multiplicity(schema, instance, q)
        elif cat is TieCategory.LIMITN:
            for binding, table in _from_tables(q, schema):
                truncate_to[table.name] = min(
                    truncate_to.get(table.name, rows_per_table), max(q.limit or 1, 1)
                )
        elif cat is TieCategory.GROUP_BY_MISUSE:
            if q.group_by:
                for e in q.group_by:
                    for col in _key_columns(e):
                        injective_cols.add(
                            (col.resolved.table.lower(), col.resolved.column.lower())
                        )
            else:
                for binding, table in _from_tables(q, schema):
                    truncate_to[table.name] = 1
        elif cat is TieCategory.ORDER_BY_DISTINCT:
            for it in q.select:
                for col in _key_columns(it.expr):
                    injective_cols.add(
                        (col.resolved.table.lower(), col.resolved.column.lower())
                    )

    for table_name, limit_rows in truncate_to.items():
        table = schema.table(table_name)
        instance.tables[table.name] = instance.tables[table.name][:limit_rows]

    for (tname, cname) in injective_cols:
        table = schema.table(tname)
        if table is None:
            continue
        col_idx = {c.name.lower(): i for i, c in enumerate(table.columns)}[cname]
        affinity = table.column(cname).affinity
        rows = instance.tables[table.name]
        fk_pool = _fk_value_pool(schema, instance, table, cname)
        if fk_pool is not None:
            # FK columns stay valid by drawing injective values from the parent
            rows = rows[: len(fk_pool)]
            instance.tables[table.name] = [
                tuple(fk_pool[i] if j == col_idx else v for j, v in enumerate(row))
                for i, row in enumerate(rows)
            ]
        else:
            instance.tables[table.name] = [
                tuple(
                    _injective_value(affinity, i, tag=cname[:4]) if j == col_idx else v
                    for j, v in enumerate(row)
                )
                for i, row in enumerate(rows)
            ]

    _repair_foreign_keys(schema, instance, seed)
    return instance


def _skew_join_multiplicity(schema: DbSchema, instance: DbInstance, q: SelectQuery) -> None:
    """Point all but one referencing row at one parent key so per-group
    aggregates (count/sum over the join) take distinct values."""
    cons = _extract_constraints(q)
    seen: set[frozenset] = set()
    for group in map(frozenset, cons.groups.values()):
        if group in seen or len(group) < 2:
            continue
        seen.add(group)
        anchor = None
        for tname, cname in sorted(group):
            table = schema.table(tname)
            if table is not None and cname in _unique_key_columns(table):
                anchor = (tname, cname, table)
                break
        if anchor is None:
            continue
        a_idx = {c.name.lower(): i for i, c in enumerate(anchor[2].columns)}[anchor[1]]
        parent_values = sorted(
            {r[a_idx] for r in instance.tables.get(anchor[2].name, [])}, key=repr
        )
        if len(parent_values) < 2:
            continue
        for tname, cname in sorted(group - {(anchor[0], anchor[1])}):
            table = schema.table(tname)
            if table is None:
                continue
            idx = {c.name.lower(): i for i, c in enumerate(table.columns)}[cname]
            rows = instance.tables.get(table.name, [])
            instance.tables[table.name] = [
                tuple(
                    (parent_values[0] if i == 0 else parent_values[1]) if j == idx else v
                    for j, v in enumerate(row)
                )
                for i, row in enumerate(rows)
            ]


def _fk_value_pool(
    schema: DbSchema, instance: DbInstance, table: Table, cname: str
) -> list | None:
    """Distinct parent key values when `cname` is a foreign-key column."""
    for fk in table.foreign_keys:
        for local, ref in zip(fk.columns, fk.ref_columns):
            if local.lower() == cname:
                parent = schema.table(fk.ref_table)
                idx = {c.name.lower(): i for i, c in enumerate(parent.columns)}[ref.lower()]
                values = sorted(
                    {r[idx] for r in instance.tables.get(parent.name, [])}, key=repr
                )
                return values
    return None


def _repair_foreign_keys(schema: DbSchema, instance: DbInstance, seed: int) -> None:
    rng = random.Random(seed + 29)
    for table in _topo_tables(schema):
        rows = instance.tables.get(table.name, [])
        if not rows:
            continue
        col_idx = {c.name.lower(): i for i, c in enumerate(table.columns)}
        new_rows = [list(r) for r in rows]
        for fk in table.foreign_keys:
            parent = schema.table(fk.ref_table)
            parent_rows = instance.tables.get(parent.name, [])
            if not parent_rows:
                instance.tables[table.name] = []
                new_rows = []
                break
            parent_idx = {c.name.lower(): i for i, c in enumerate(parent.columns)}
            valid = {
                tuple(pr[parent_idx[rc.lower()]] for rc in fk.ref_columns)
                for pr in parent_rows
            }
            for row in new_rows:
                current = tuple(row[col_idx[lc.lower()]] for lc in fk.columns)
                if current not in valid:
                    chosen = rng.choice(sorted(valid, key=repr))
                    for lc, val in zip(fk.columns, chosen):
                        row[col_idx[lc.lower()]] = val
        if new_rows:
            instance.tables[table.name] = [tuple(r) for r in new_rows]
