"""Execution backend adapters.

Adapter contract: `open(instance)` yields a handle usable as a context
manager; `run(handle, sql_text)` returns a `ResultTable` or raises
`BackendError` with a structured {code, message} and a pre-classified error
category. The reference adapter targets the benchmarks' native SQLite format
(files, CSV directories, or in-memory instances). The strict-standard
adapter used by the dialect audit lives in `dialect_audit`.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import BackendError
from .instances import DbInstance, create_sqlite, from_csv_dir


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def __post_init__(self) -> None:
        arity = len(self.columns)
        for row in self.rows:
            if len(row) != arity:
                raise ValueError(f"row arity {len(row)} != {arity} columns")

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


class Backend(Protocol):
    def open(self, instance): ...

    def run(self, handle, sql_text: str) -> ResultTable: ...


class SqliteHandle:
    def __init__(self, conn: sqlite3.Connection):
        self.conn = conn

    def close(self) -> None:
        self.conn.close()

    def __enter__(self) -> "SqliteHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _classify_message(message: str):
    # lazy import: the category enum lives with the dialect audit
    from .dialect_audit import classify_backend_error

    return classify_backend_error({"code": "sqlite", "message": message})


class SqliteBackend:
    """Reference adapter over SQLite: benchmark files, CSV dirs, instances."""

    def open(self, instance) -> SqliteHandle:
        if isinstance(instance, DbInstance):
            conn = sqlite3.connect(":memory:")
            create_sqlite(instance, conn)
            return SqliteHandle(conn)
        path = Path(instance)
        if path.is_dir():
            raise BackendError(
                f"CSV directory {path} must be wrapped in a DbInstance before opening",
                code="usage",
            )
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
        return SqliteHandle(conn)

    def run(self, handle: SqliteHandle, sql_text: str) -> ResultTable:
        try:
            cur = handle.conn.execute(sql_text)
            rows = [tuple(r) for r in cur.fetchall()]
            columns = [d[0] for d in cur.description] if cur.description else []
        except sqlite3.Error as exc:
            message = str(exc)
            raise BackendError(
                message, code=type(exc).__name__, category=_classify_message(message)
            ) from exc
        return ResultTable(columns=columns, rows=rows)


def open_database(path_or_instance, schema=None) -> DbInstance:
    """Normalize a corpus database path (SQLite file or CSV dir) to an instance."""
    if isinstance(path_or_instance, DbInstance):
        return path_or_instance
    path = Path(path_or_instance)
    if path.is_dir():
        if schema is None:
            raise BackendError("CSV directory databases need a schema", code="usage")
        return from_csv_dir(schema, path)
    from .instances import load_instance_for

    if schema is None:
        raise BackendError("SQLite databases need a schema to load", code="usage")
    return load_instance_for(schema, path)
