from __future__ import annotations

import math
import random

import pytest

from sqlaudit.backend import ResultTable
from sqlaudit.errors import BackendError, SchemaMismatch
from sqlaudit.forge import forge_tie_instance, random_instance
from sqlaudit.instances import DbInstance, Provenance
from sqlaudit.metrics import (
    compare_results,
    exact_set_match,
    execute,
    execution_accuracy,
)
from sqlaudit.parser import parse_sql
from sqlaudit.resolver import resolve_columns

from .strategies import random_query

Q1 = "SELECT name, capacity FROM stadium WHERE average = (SELECT MAX(average) FROM stadium)"
Q2 = "SELECT name, capacity FROM stadium ORDER BY average DESC LIMIT 1"


def _esm(a, b, schema=None, with_values=True):
    qa, qb = parse_sql(a), parse_sql(b)
    if schema is not None:
        qa, qb = resolve_columns(qa, schema), resolve_columns(qb, schema)
    return exact_set_match(qa, qb, with_values=with_values)


# ---------------------------------------------------------------------------
# exact set match
# ---------------------------------------------------------------------------


def test_predicate_order_invariance():
    res = _esm("SELECT a FROM t WHERE a = 1 AND b = 2", "SELECT a FROM t WHERE b = 2 AND a = 1")
    assert res.matched
    assert res.clause_verdicts["where"] is True


def test_figure3_pair_fails_on_select_clause(car_schema):
    pred = (
        "SELECT T1.id, T1.fullname FROM car_makers AS T1 JOIN model_list AS T2 "
        "ON T1.id = T2.maker GROUP BY T1.id HAVING count(*) > 3"
    )
    gold = (
        "SELECT T1.id, T1.maker FROM car_makers AS T1 JOIN model_list AS T2 "
        "ON T1.id = T2.maker GROUP BY T1.id HAVING count(*) > 3"
    )
    res = _esm(pred, gold, car_schema)
    assert not res.matched
    assert res.clause_verdicts["select"] is False
    assert res.clause_verdicts["having"] is True


def test_canada_canadian_literal_modes(person_schema):
    pred = "SELECT name FROM person WHERE nationality = 'Canadian'"
    gold = "SELECT name FROM person WHERE nationality = 'Canada'"
    assert _esm(pred, gold, person_schema, with_values=False).matched
    strict = _esm(pred, gold, person_schema, with_values=True)
    assert not strict.matched
    assert strict.clause_verdicts["where"] is False


def test_alias_insensitivity(stadium_schema):
    res = _esm(
        "SELECT T1.name FROM stadium AS T1 WHERE T1.average > 5",
        "SELECT name FROM stadium WHERE average > 5",
        stadium_schema,
    )
    assert res.matched


def test_comparison_operand_flips_match():
    assert _esm("SELECT a FROM t WHERE 1 = a", "SELECT a FROM t WHERE a = 1").matched
    assert _esm("SELECT a FROM t WHERE 1 < a", "SELECT a FROM t WHERE a > 1").matched
    assert not _esm("SELECT a FROM t WHERE a < 1", "SELECT a FROM t WHERE a > 1").matched


def test_limit_presence_vs_value():
    with_values = _esm(
        "SELECT a FROM t ORDER BY a DESC LIMIT 5", "SELECT a FROM t ORDER BY a DESC LIMIT 3"
    )
    assert not with_values.matched and with_values.clause_verdicts["limit"] is False
    without = _esm(
        "SELECT a FROM t ORDER BY a DESC LIMIT 5",
        "SELECT a FROM t ORDER BY a DESC LIMIT 3",
        with_values=False,
    )
    assert without.matched


def test_order_by_sequence_matters():
    res = _esm("SELECT a FROM t ORDER BY a, b", "SELECT a FROM t ORDER BY b, a")
    assert not res.matched and res.clause_verdicts["orderBy"] is False


def test_from_tables_count_toward_select_verdict(stadium_schema):
    res = _esm("SELECT count(*) FROM stadium", "SELECT count(*) FROM concert", stadium_schema)
    assert not res.matched and res.clause_verdicts["select"] is False


def test_subqueries_compared_recursively():
    a = "SELECT a FROM t WHERE b IN (SELECT c FROM u WHERE d = 1 AND e = 2)"
    b = "SELECT a FROM t WHERE b IN (SELECT c FROM u WHERE e = 2 AND d = 1)"
    assert _esm(a, b).matched
    c = "SELECT a FROM t WHERE b IN (SELECT c FROM u WHERE d = 9 AND e = 2)"
    assert not _esm(a, c).matched
    assert _esm(a, c, with_values=False).matched


def test_set_op_clause_verdict():
    a = "SELECT a FROM t UNION SELECT b FROM u"
    b = "SELECT a FROM t INTERSECT SELECT b FROM u"
    res = _esm(a, b)
    assert not res.matched and res.clause_verdicts["setOp"] is False


def test_schema_mismatch_raises(stadium_schema, district_schema):
    qa = resolve_columns(parse_sql("SELECT name FROM stadium"), stadium_schema)
    qb = resolve_columns(parse_sql("SELECT district_name FROM district"), district_schema)
    with pytest.raises(SchemaMismatch):
        exact_set_match(qa, qb)


def test_reflexive_symmetric_permutation_invariant_bulk():
    rng = random.Random(20240817)
    for _ in range(200):
        q = random_query(rng)
        assert exact_set_match(q, q).matched  # reflexive
        other = random_query(rng)
        ab = exact_set_match(q, other).matched
        ba = exact_set_match(other, q).matched
        assert ab == ba  # symmetric


# ---------------------------------------------------------------------------
# execution + result comparison
# ---------------------------------------------------------------------------


def _empty_instance(schema):
    return DbInstance(
        schema=schema, tables={t.name: [] for t in schema.tables}, provenance=Provenance("Loaded")
    )


def test_execute_q1_matches_brute_force(stadium_schema):
    inst = random_instance(stadium_schema, seed=99, rows_per_table=6)
    rows = inst.tables["stadium"]
    cols = [c.name for c in stadium_schema.table("stadium").columns]
    avg_i, name_i, cap_i = cols.index("average"), cols.index("name"), cols.index("capacity")
    max_avg = max(r[avg_i] for r in rows)
    expected = sorted((r[name_i], r[cap_i]) for r in rows if r[avg_i] == max_avg)
    got = sorted(execute(parse_sql(Q1), inst).rows)
    assert got == expected


def test_execute_on_empty_instance(stadium_schema):
    inst = _empty_instance(stadium_schema)
    assert execute(parse_sql("SELECT name FROM stadium"), inst).rows == []
    assert execute(parse_sql("SELECT count(*) FROM stadium"), inst).rows == [(0,)]
    assert execute(parse_sql("SELECT max(average) FROM stadium"), inst).rows == [(None,)]


def test_execute_missing_column_error(stadium_schema):
    inst = _empty_instance(stadium_schema)
    with pytest.raises(BackendError) as exc:
        execute(parse_sql("SELECT nothere FROM stadium"), inst)
    from sqlaudit.dialect_audit import ViolationCategory

    assert exc.value.category is ViolationCategory.UNDEFINED_COLUMN


def _reference_compare(a_rows, b_rows, tol):
    # independent oracle: sorted pairing with isclose on numerics
    if len(a_rows) != len(b_rows):
        return False
    used = [False] * len(b_rows)
    for ra in a_rows:
        hit = False
        for i, rb in enumerate(b_rows):
            if used[i] or len(ra) != len(rb):
                continue
            ok = True
            for x, y in zip(ra, rb):
                if isinstance(x, (int, float)) and isinstance(y, (int, float)):
                    ok = ok and math.isclose(x, y, rel_tol=tol, abs_tol=tol)
                else:
                    ok = ok and x == y
            if ok:
                used[i] = True
                hit = True
                break
        if not hit:
            return False
    return True


def test_compare_results_basics():
    a = ResultTable(["x", "y"], [(1, "a"), (2, "b")])
    assert compare_results(a, a, ordered=False)
    assert compare_results(a, a, ordered=True)
    permuted = ResultTable(["x", "y"], [(2, "b"), (1, "a")])
    assert compare_results(a, permuted, ordered=False)
    assert not compare_results(a, permuted, ordered=True)


def test_compare_results_duplicates_significant():
    a = ResultTable(["x"], [(1,), (1,)])
    b = ResultTable(["x"], [(1,)])
    assert not compare_results(a, b)
    assert compare_results(a, b, set_mode=True)


def test_compare_results_null_semantics():
    a = ResultTable(["x"], [(None,)])
    b = ResultTable(["x"], [(None,)])
    c = ResultTable(["x"], [(0,)])
    assert compare_results(a, b)
    assert not compare_results(a, c)


def test_compare_results_float_tolerance_matches_reference():
    a = ResultTable(["i", "v"], [(1, 2.0000001)])
    b = ResultTable(["i", "v"], [(1, 2.0)])
    assert compare_results(a, b, float_tol=1e-5) == _reference_compare(a.rows, b.rows, 1e-5)
    assert compare_results(a, b, float_tol=1e-5)
    far = ResultTable(["i", "v"], [(1, 2.1)])
    assert compare_results(a, far, float_tol=1e-5) == _reference_compare(a.rows, far.rows, 1e-5)
    assert not compare_results(a, far, float_tol=1e-5)


def test_compare_results_column_permutation_mode():
    a = ResultTable(["x", "y"], [(1, "a")])
    b = ResultTable(["y", "x"], [("a", 1)])
    assert not compare_results(a, b)
    assert compare_results(a, b, column_permutation=True)
    # single-column results are unaffected by the mode
    c = ResultTable(["x"], [(1,)])
    assert compare_results(c, c, column_permutation=True) == compare_results(c, c)


def test_execution_accuracy_tie_free_vs_tie(stadium_schema, mini_corpus):
    gold = resolve_columns(parse_sql(Q2), stadium_schema)
    pred = resolve_columns(parse_sql(Q1), stadium_schema)
    from sqlaudit.backend import open_database

    loaded = open_database(mini_corpus.database_paths["stadium_league"], stadium_schema)
    assert execution_accuracy(pred, gold, [loaded]).overall  # unique max on loaded data
    tie = forge_tie_instance(stadium_schema, gold, seed=2)
    out = execution_accuracy(pred, gold, [tie])
    assert not out.overall  # Q1 returns every tied row, Q2 only one
    assert execute(pred, tie).rows != execute(gold, tie).rows


def test_execution_accuracy_reflexive(stadium_schema):
    q = resolve_columns(parse_sql(Q2), stadium_schema)
    instances = [random_instance(stadium_schema, seed=s, rows_per_table=4) for s in range(3)]
    assert execution_accuracy(q, q, instances).overall


def test_execution_accuracy_monotone_in_instances(stadium_schema):
    gold = resolve_columns(parse_sql(Q2), stadium_schema)
    pred = resolve_columns(parse_sql(Q1), stadium_schema)
    tie = forge_tie_instance(stadium_schema, gold, seed=4)
    benign = random_instance(stadium_schema, seed=1, rows_per_table=2)
    small = execution_accuracy(pred, gold, [benign])
    grown = execution_accuracy(pred, gold, [benign, tie])
    assert not grown.overall or small.overall  # adding instances never flips false->true


def test_execution_error_counts_as_not_equal(stadium_schema):
    gold = parse_sql("SELECT name FROM stadium")
    pred = parse_sql("SELECT nothere FROM stadium")
    inst = random_instance(stadium_schema, seed=0, rows_per_table=2)
    out = execution_accuracy(pred, gold, [inst])
    assert not out.overall
    assert any(isinstance(v, str) and v.startswith("error") for _, v in out.per_instance)


def test_figure3_pair_fails_execution_on_divergent_instance(car_schema):
    pred = parse_sql(
        "SELECT T1.id, T1.fullname FROM car_makers AS T1 JOIN model_list AS T2 "
        "ON T1.id = T2.maker GROUP BY T1.id HAVING count(*) > 3"
    )
    gold = parse_sql(
        "SELECT T1.id, T1.maker FROM car_makers AS T1 JOIN model_list AS T2 "
        "ON T1.id = T2.maker GROUP BY T1.id HAVING count(*) > 3"
    )
    maker_rows = [(1, "Ford", "Ford Motor Company", "USA")]
    model_rows = [(i, 1, f"model{i}") for i in range(1, 6)]  # 5 > 3 models
    inst = DbInstance(
        schema=car_schema,
        tables={"car_makers": maker_rows, "model_list": model_rows},
        provenance=Provenance("Loaded"),
    )
    out = execution_accuracy(pred, gold, [inst])
    assert not out.overall
    assert execute(pred, inst).rows == [(1, "Ford Motor Company")]
    assert execute(gold, inst).rows == [(1, "Ford")]
