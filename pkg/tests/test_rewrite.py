from __future__ import annotations

import pytest

from sqlaudit.parser import parse_sql
from sqlaudit.printer import print_sql
from sqlaudit.resolver import resolve_columns
from sqlaudit.rewrite import (
    RewriteRule,
    RewriteStatus,
    apply_rewrites,
    complete_group_by,
    rewrite_corpus,
    rewrite_limit1,
)

Q2 = "SELECT name, capacity FROM stadium ORDER BY average DESC LIMIT 1"
Q1 = "SELECT name, capacity FROM stadium WHERE average = (SELECT MAX(average) FROM stadium)"


def test_limit1_desc_becomes_max_subquery():
    out = rewrite_limit1(parse_sql(Q2))
    assert out.status is RewriteStatus.REWRITTEN
    assert out.rule is RewriteRule.LIMIT1_TO_EXTREME
    assert print_sql(out.rewritten) == Q1
    assert out.notes  # NULL-ordering divergence documented per query


def test_limit1_asc_becomes_min_subquery():
    out = rewrite_limit1(parse_sql("SELECT name FROM stadium ORDER BY average ASC LIMIT 1"))
    assert print_sql(out.rewritten) == (
        "SELECT name FROM stadium WHERE average = (SELECT MIN(average) FROM stadium)"
    )


def test_where_predicates_duplicated_into_subquery():
    out = rewrite_limit1(
        parse_sql("SELECT name FROM stadium WHERE capacity > 500 ORDER BY average ASC LIMIT 1")
    )
    assert print_sql(out.rewritten) == (
        "SELECT name FROM stadium WHERE capacity > 500 AND "
        "average = (SELECT MIN(average) FROM stadium WHERE capacity > 500)"
    )


def test_no_limit_is_not_applicable():
    q = parse_sql("SELECT name FROM stadium")
    out = rewrite_limit1(q)
    assert out.status is RewriteStatus.NOT_APPLICABLE
    assert out.rewritten is None
    assert out.original == q  # untouched


def test_limit_n_never_rewritten():
    out = rewrite_limit1(parse_sql("SELECT name FROM stadium ORDER BY average DESC LIMIT 3"))
    assert out.status is RewriteStatus.NOT_APPLICABLE


def test_multi_key_order_by_unrewritable():
    out = rewrite_limit1(
        parse_sql("SELECT x FROM t ORDER BY a, b LIMIT 1")
    )
    assert out.status is RewriteStatus.UNREWRITABLE
    assert "multi-key" in out.reason_unrewritten


def test_offset_unrewritable():
    out = rewrite_limit1(parse_sql("SELECT x FROM t ORDER BY a LIMIT 1 OFFSET 2"))
    assert out.status is RewriteStatus.UNREWRITABLE
    assert "OFFSET" in out.reason_unrewritten


def test_nondeterministic_key_unrewritable():
    out = rewrite_limit1(parse_sql("SELECT x FROM t ORDER BY random() LIMIT 1"))
    assert out.status is RewriteStatus.UNREWRITABLE


def test_correlated_reference_unrewritable():
    # a subquery shape: the inner query orders by an outer alias's column
    inner = parse_sql("SELECT x FROM u ORDER BY outer_t.k DESC LIMIT 1")
    out = rewrite_limit1(inner)
    assert out.status is RewriteStatus.UNREWRITABLE
    assert "correlated" in out.reason_unrewritten


def test_set_operation_unrewritable():
    out = rewrite_limit1(
        parse_sql("SELECT a FROM t UNION SELECT b FROM u ORDER BY a DESC LIMIT 1")
    )
    # trailing clauses attach to the right operand; the left arm carries the
    # set op and no limit, so nothing fires on the outer query
    assert out.status is RewriteStatus.NOT_APPLICABLE


def test_aggregate_key_moves_to_having(stadium_schema):
    sql = (
        "SELECT t1.name FROM stadium AS t1 JOIN concert AS t2 ON t1.id = t2.stadium_id "
        "GROUP BY t1.name ORDER BY count(*) DESC LIMIT 1"
    )
    out = rewrite_limit1(resolve_columns(parse_sql(sql), stadium_schema))
    assert out.status is RewriteStatus.REWRITTEN
    text = print_sql(out.rewritten)
    assert "HAVING COUNT(*) = (SELECT MAX(" in text
    assert "ORDER BY" not in text and "LIMIT" not in text
    # rewritten reparses and re-resolves cleanly
    resolve_columns(parse_sql(text), stadium_schema)


def test_existing_having_preserved(stadium_schema):
    sql = (
        "SELECT t1.name FROM stadium AS t1 JOIN concert AS t2 ON t1.id = t2.stadium_id "
        "GROUP BY t1.name HAVING count(*) > 1 ORDER BY count(*) DESC LIMIT 1"
    )
    out = rewrite_limit1(resolve_columns(parse_sql(sql), stadium_schema))
    text = print_sql(out.rewritten)
    assert "HAVING COUNT(*) > 1 AND COUNT(*) = (SELECT MAX(" in text
    # the grouped extreme subquery repeats the HAVING filter
    assert text.count("HAVING COUNT(*) > 1") == 2


# ---------------------------------------------------------------------------
# GROUP BY completion
# ---------------------------------------------------------------------------


def test_completion_adds_missing_columns_in_select_order():
    out = complete_group_by(parse_sql("SELECT id, name FROM t GROUP BY name"))
    assert out.status is RewriteStatus.REWRITTEN
    assert print_sql(out.rewritten) == "SELECT id, name FROM t GROUP BY name, id"


def test_completion_not_applicable_cases():
    # no non-aggregated columns
    out = complete_group_by(parse_sql("SELECT count(*) FROM t"))
    assert out.status is RewriteStatus.NOT_APPLICABLE
    # already complete
    out = complete_group_by(parse_sql("SELECT a, max(b) FROM t GROUP BY a"))
    assert out.status is RewriteStatus.NOT_APPLICABLE
    # mixed aggregates without GROUP BY: reported, never rewritten
    out = complete_group_by(parse_sql("SELECT a, max(b) FROM t"))
    assert out.status is RewriteStatus.NOT_APPLICABLE
    assert "no GROUP BY" in out.reason_unrewritten


def test_completion_select_list_unchanged(world_schema):
    sql = "SELECT country_code, language FROM countrylanguage GROUP BY country_code"
    ast = resolve_columns(parse_sql(sql), world_schema)
    out = complete_group_by(ast, world_schema)
    assert print_sql(out.rewritten) == (
        "SELECT country_code, language FROM countrylanguage "
        "GROUP BY country_code, language"
    )
    assert out.rewritten.select == ast.select


def test_completion_star_needs_schema(stadium_schema):
    sql = "SELECT *, count(*) FROM stadium GROUP BY city"
    out = complete_group_by(parse_sql(sql))
    assert out.status is RewriteStatus.UNREWRITABLE
    resolved = resolve_columns(parse_sql(sql), stadium_schema)
    out2 = complete_group_by(resolved, stadium_schema)
    assert out2.status is RewriteStatus.REWRITTEN
    assert print_sql(out2.rewritten).endswith(
        "GROUP BY city, stadium.id, stadium.name, stadium.capacity, stadium.average"
    )


def test_rewrites_idempotent(mini_corpus):
    for entry in mini_corpus.entries:
        schema = mini_corpus.schemas[entry.example.database_id]
        qr = apply_rewrites(entry.example.example_id, entry.ast, schema)
        if not qr.changed:
            continue
        again = apply_rewrites(entry.example.example_id, qr.final, schema)
        assert not again.changed, entry.example.example_id
        assert all(o.status is not RewriteStatus.REWRITTEN for o in again.outcomes)


def test_rewrite_corpus_mini_counts(mini_corpus):
    report = rewrite_corpus(mini_corpus)
    # hand classification: e01 e04 e11 limit1-rewritten, e03 completed, e09 unrewritable
    assert report.affected == 4
    assert report.per_rule == {"Limit1ToExtreme": 3, "GroupByCompletion": 1}
    assert [ex for ex, _ in report.unrewritable] == ["e09"]
    assert report.affected_pct == pytest.approx(100 * 4 / 12)
    d = report.to_dict()
    assert set(d["rewritten"]) == {"e01", "e03", "e04", "e11"}


def test_rewritten_queries_reparse_and_resolve(mini_corpus):
    report = rewrite_corpus(mini_corpus)
    for qr in report.rewrites:
        if not qr.changed:
            continue
        schema = mini_corpus.schemas[
            mini_corpus.entry(qr.example_id).example.database_id
        ]
        resolve_columns(parse_sql(print_sql(qr.final)), schema)
