from __future__ import annotations

import pytest

from sqlaudit.dialect_audit import (
    StrictEmulationBackend,
    ViolationCategory,
    classify_backend_error,
    portability_report,
    static_strict_check,
    type_mismatch_notes,
)
from sqlaudit.errors import BackendError
from sqlaudit.forge import random_instance
from sqlaudit.parser import parse_sql
from sqlaudit.resolver import resolve_columns
from sqlaudit.tie_audit import TieCategory, audit_query


def _check(sql, schema):
    ast = resolve_columns(parse_sql(sql), schema)
    return static_strict_check(ast, schema)


def cats(violations):
    return [v.category for v in violations]


def test_district_query_flags_order_by(district_schema):
    got = cats(
        _check(
            "SELECT DISTINCT district_name FROM district ORDER BY city_area DESC",
            district_schema,
        )
    )
    assert got == [ViolationCategory.ORDER_BY]


def test_incomplete_grouping_flags_group_by(world_schema):
    got = cats(
        _check(
            "SELECT country_code, language FROM countrylanguage GROUP BY country_code",
            world_schema,
        )
    )
    assert got == [ViolationCategory.GROUP_BY]


def test_engine_specific_function_flagged(district_schema):
    got = cats(
        _check("SELECT strftime('%Y', district_name) FROM district", district_schema)
    )
    assert ViolationCategory.UNDEFINED_FUNCTION in got
    got2 = cats(
        _check(
            "SELECT iif(population > 5, 'big', 'small') FROM district", district_schema
        )
    )
    assert ViolationCategory.UNDEFINED_FUNCTION in got2
    clean = cats(_check("SELECT upper(district_name) FROM district", district_schema))
    assert clean == []


def test_double_quoted_literal_reads_as_missing_column(world_schema):
    got = cats(_check('SELECT name FROM country WHERE code = "USA"', world_schema))
    assert got == [ViolationCategory.UNDEFINED_COLUMN]
    # double-quoted text that happens to name a real column resolves silently
    got2 = cats(_check('SELECT name FROM country WHERE code = "name"', world_schema))
    assert got2 == []


def test_backtick_identifiers_are_syntax_errors(district_schema):
    got = cats(_check("SELECT `district_name` FROM district", district_schema))
    assert got == [ViolationCategory.SYNTAX_ERR]


def test_type_mismatch_notes(world_schema):
    notes = type_mismatch_notes(
        resolve_columns(parse_sql("SELECT name FROM country WHERE code = 5"), world_schema),
        world_schema,
    )
    assert len(notes) == 1 and "strict typing" in notes[0]
    assert (
        type_mismatch_notes(
            resolve_columns(
                parse_sql("SELECT name FROM country WHERE population = 5"), world_schema
            ),
            world_schema,
        )
        == []
    )


def test_classify_backend_error_mappings():
    cases = {
        'column "nothere" does not exist': ViolationCategory.UNDEFINED_COLUMN,
        "no such column: nothere": ViolationCategory.UNDEFINED_COLUMN,
        "function strftime(unknown, text) does not exist": ViolationCategory.UNDEFINED_FUNCTION,
        'column "t.x" must appear in the GROUP BY clause or be used in an aggregate function': ViolationCategory.GROUP_BY,
        "for SELECT DISTINCT, ORDER BY expressions must appear in select list": ViolationCategory.ORDER_BY,
        'syntax error at or near "`"': ViolationCategory.SYNTAX_ERR,
        "something entirely novel": ViolationCategory.SYNTAX_ERR,
        'relation "tt" does not exist': ViolationCategory.UNDEFINED_COLUMN,
    }
    for message, expected in cases.items():
        assert classify_backend_error({"code": "x", "message": message}) is expected
        # total + deterministic
        assert classify_backend_error({"code": "x", "message": message}) is expected


def test_classify_accepts_backend_error_objects():
    err = BackendError("no such function: iif", code="sqlite")
    assert classify_backend_error(err) is ViolationCategory.UNDEFINED_FUNCTION


def test_strict_emulation_backend_rejects_and_classifies(world_schema):
    backend = StrictEmulationBackend(schema=world_schema)
    inst = random_instance(world_schema, seed=1, rows_per_table=2)
    handle = backend.open(inst)
    try:
        with pytest.raises(BackendError) as exc:
            backend.run(handle, 'SELECT name FROM country WHERE code = "USA"')
        assert exc.value.category is ViolationCategory.UNDEFINED_COLUMN
        with pytest.raises(BackendError) as exc:
            backend.run(
                handle,
                "SELECT country_code, language FROM countrylanguage GROUP BY country_code",
            )
        assert exc.value.category is ViolationCategory.GROUP_BY
        with pytest.raises(BackendError) as exc:
            backend.run(handle, "SELECT name FROM country WHERE code = 5")
        assert exc.value.category is ViolationCategory.SYNTAX_ERR  # int/text typing
        ok = backend.run(handle, "SELECT name FROM country WHERE code = 'USA'")
        assert ok.columns == ["name"]
    finally:
        handle.close()


def test_portability_static_counts_match_tie_audit(mini_corpus):
    report = portability_report(mini_corpus)
    tie_group = 0
    tie_order = 0
    for entry in mini_corpus.entries:
        findings = audit_query(entry.ast, mini_corpus.schemas[entry.example.database_id])
        fc = {f.category for f in findings}
        tie_group += TieCategory.GROUP_BY_MISUSE in fc
        tie_order += TieCategory.ORDER_BY_DISTINCT in fc
    assert report.counts["GroupBy"] == tie_group == 2
    assert report.counts["OrderBy"] == tie_order == 1
    assert report.counts["SyntaxErr"] == 0
    assert not report.backend_attached


def test_portability_empty_corpus(tmp_path, mini_paths):
    import json

    from sqlaudit.corpus import load_corpus

    _, schemas, _ = mini_paths
    p = tmp_path / "empty.json"
    p.write_text("[]")
    report = portability_report(load_corpus(p, schemas))
    assert all(v == 0 for v in report.counts.values())


def test_portability_with_backend_reconciles(mini_corpus):
    backend = StrictEmulationBackend()
    report = portability_report(mini_corpus, backend=backend)
    assert report.backend_attached
    # static-only views agree with the backend-attached run on the mini corpus
    static = portability_report(mini_corpus)
    assert report.counts["GroupBy"] == static.counts["GroupBy"]
    assert report.counts["OrderBy"] == static.counts["OrderBy"]
    # backend counts are never below the static lower bounds
    for cat in ("GroupBy", "OrderBy", "UndefinedColumn", "UndefinedFunction"):
        assert report.counts[cat] >= static.counts[cat]


def test_portability_backend_discrepancy_recorded(tmp_path, mini_paths):
    import json

    from sqlaudit.corpus import load_corpus

    _, schemas, dbs = mini_paths
    p = tmp_path / "mix.json"
    # int/text comparison: static passes (note only), strict backend rejects
    p.write_text(
        json.dumps(
            [
                {
                    "question": "?",
                    "query": "SELECT name FROM country WHERE code = 5",
                    "db_id": "world_mini",
                }
            ]
        )
    )
    corpus = load_corpus(p, schemas, dbs)
    report = portability_report(corpus, backend=StrictEmulationBackend())
    assert len(report.discrepancies) == 1
    assert report.discrepancies[0]["backend"] == "SyntaxErr"
    assert report.counts["SyntaxErr"] == 1
    static = portability_report(corpus)
    assert static.counts["SyntaxErr"] == 0
    assert static.type_notes["0"]


def test_once_per_query_mode(tmp_path, mini_paths):
    import json

    from sqlaudit.corpus import load_corpus

    _, schemas, _ = mini_paths
    p = tmp_path / "multi.json"
    p.write_text(
        json.dumps(
            [
                {
                    "question": "?",
                    "query": (
                        "SELECT country_code, strftime('%Y', language) FROM countrylanguage "
                        "GROUP BY country_code"
                    ),
                    "db_id": "world_mini",
                }
            ]
        )
    )
    corpus = load_corpus(p, schemas)
    all_cats = portability_report(corpus)
    assert all_cats.counts["GroupBy"] == 1 and all_cats.counts["UndefinedFunction"] == 1
    once = portability_report(corpus, once_per_query=True)
    assert sum(once.counts.values()) == 1
    assert once.counts["UndefinedFunction"] == 1  # higher-priority category wins


def test_report_serialization(mini_corpus):
    report = portability_report(mini_corpus)
    d = report.to_dict()
    assert set(d["counts"]) == {
        "SyntaxErr",
        "UndefinedFunction",
        "UndefinedColumn",
        "OrderBy",
        "GroupBy",
    }
    text = report.to_text()
    assert "GroupBy" in text.splitlines()[0]
