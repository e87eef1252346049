from __future__ import annotations

from sqlaudit.parser import parse_sql
from sqlaudit.resolver import resolve_columns
from sqlaudit.sqlast import query_at_path
from sqlaudit.tie_audit import TieCategory, audit_query, dominant_category

Q2 = "SELECT name, capacity FROM stadium ORDER BY average DESC LIMIT 1"
DISTRICT = "SELECT DISTINCT district_name FROM district ORDER BY city_area DESC"
COUNTRY_LANGUAGE = "SELECT country_code, language FROM countrylanguage GROUP BY country_code"


def _audit(sql, schema):
    return audit_query(resolve_columns(parse_sql(sql), schema), schema)


def cats(findings):
    return [f.category for f in findings]


def test_limit1_top_with_ties(stadium_schema):
    findings = _audit(Q2, stadium_schema)
    assert cats(findings) == [TieCategory.LIMIT1]
    assert findings[0].rewritable is True
    assert findings[0].location == "query"


def test_order_by_distinct(district_schema):
    findings = _audit(DISTRICT, district_schema)
    assert cats(findings) == [TieCategory.ORDER_BY_DISTINCT]
    assert findings[0].rewritable is False


def test_group_by_misuse_bare_column(world_schema):
    findings = _audit(COUNTRY_LANGUAGE, world_schema)
    assert cats(findings) == [TieCategory.GROUP_BY_MISUSE]
    assert findings[0].rewritable is True


def test_mixed_aggregate_without_group_by(stadium_schema):
    findings = _audit("SELECT name, max(average) FROM stadium", stadium_schema)
    assert cats(findings) == [TieCategory.GROUP_BY_MISUSE]
    assert findings[0].rewritable is False


def test_fully_grouped_query_is_clean(stadium_schema):
    assert _audit("SELECT id FROM stadium GROUP BY id", stadium_schema) == []
    assert _audit("SELECT city, count(*) FROM stadium GROUP BY city", stadium_schema) == []


def test_pk_grouping_flagged_low_severity(stadium_schema):
    findings = _audit("SELECT id, name FROM stadium GROUP BY id", stadium_schema)
    assert cats(findings) == [TieCategory.GROUP_BY_MISUSE]
    assert findings[0].severity == "low"
    assert findings[0].rewritable is True
    # without the key in GROUP BY the severity stays normal
    normal = _audit("SELECT id, name FROM stadium GROUP BY city", stadium_schema)
    assert all(f.severity == "normal" for f in normal)


def test_limit_without_order_by_is_limitn_even_for_one(district_schema):
    findings = _audit("SELECT district_name FROM district LIMIT 1", district_schema)
    assert cats(findings) == [TieCategory.LIMITN]
    findings5 = _audit("SELECT district_name FROM district LIMIT 5", district_schema)
    assert cats(findings5) == [TieCategory.LIMITN]


def test_limit_n_with_order_by(world_schema):
    findings = _audit(
        "SELECT name FROM country ORDER BY population DESC LIMIT 3", world_schema
    )
    assert cats(findings) == [TieCategory.LIMITN]


def test_order_by_on_selected_column_is_clean(district_schema):
    findings = _audit(
        "SELECT DISTINCT district_name FROM district ORDER BY district_name", district_schema
    )
    assert findings == []


def test_order_by_alias_and_ordinal_count_as_selected(district_schema):
    assert (
        _audit(
            "SELECT city_area AS area, district_name FROM district ORDER BY area",
            district_schema,
        )
        == []
    )
    assert (
        _audit("SELECT DISTINCT district_name FROM district ORDER BY 1", district_schema)
        == []
    )


def test_order_by_expression_absent_counts(district_schema):
    findings = _audit(
        "SELECT DISTINCT district_name FROM district ORDER BY city_area + population",
        district_schema,
    )
    assert cats(findings) == [TieCategory.ORDER_BY_DISTINCT]


def test_subquery_findings_have_paths(stadium_schema):
    findings = _audit(
        "SELECT name FROM stadium WHERE id IN "
        "(SELECT stadium_id FROM concert ORDER BY attendance DESC LIMIT 1)",
        stadium_schema,
    )
    assert cats(findings) == [TieCategory.LIMIT1]
    assert findings[0].location != "query"
    ast = resolve_columns(parse_sql(
        "SELECT name FROM stadium WHERE id IN "
        "(SELECT stadium_id FROM concert ORDER BY attendance DESC LIMIT 1)"
    ), stadium_schema)
    node = query_at_path(ast, findings[0].location)
    assert node is not None and node.limit == 1


def test_monotonicity_where_does_not_remove_limit1(stadium_schema):
    base = cats(_audit(Q2, stadium_schema))
    widened = cats(
        _audit(
            "SELECT name, capacity FROM stadium WHERE city = 'x' "
            "ORDER BY average DESC LIMIT 1",
            stadium_schema,
        )
    )
    assert TieCategory.LIMIT1 in base and TieCategory.LIMIT1 in widened


def test_dominant_category_priority(stadium_schema):
    # both LIMIT 1 and group misuse: priority puts it under Limit1
    findings = _audit(
        "SELECT city, name FROM stadium GROUP BY city ORDER BY city DESC LIMIT 1",
        stadium_schema,
    )
    got = {f.category for f in findings}
    assert got == {TieCategory.LIMIT1, TieCategory.GROUP_BY_MISUSE}
    assert dominant_category(findings) == TieCategory.LIMIT1


def test_figure_examples_produce_named_categories(stadium_schema, world_schema, district_schema):
    # top-with-ties pair: the LIMIT 1 form is the flagged one
    assert cats(_audit(Q2, stadium_schema)) == [TieCategory.LIMIT1]
    # lenient grouping: country with several languages collapses to one row
    assert cats(_audit(COUNTRY_LANGUAGE, world_schema)) == [TieCategory.GROUP_BY_MISUSE]
    # distinct + outside ordering column
    assert cats(_audit(DISTRICT, district_schema)) == [TieCategory.ORDER_BY_DISTINCT]


def test_findings_serialize(stadium_schema):
    f = _audit(Q2, stadium_schema)[0]
    d = f.to_dict()
    assert d["category"] == "Limit1" and d["rewritable"] is True
