"""Materialized database instances: schema + rows + provenance.

Instances are the unit the execution backends open and the forge generators
emit. They are immutable once built and export to SQLite files, CSV
directories (one file per table, header row = column names), and a JSON
interchange form.
"""

from __future__ import annotations

import csv
import json
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusIoError, SchemaError
from .schema import DbSchema

_SQLITE_TYPE = {
    "integer": "INTEGER",
    "real": "REAL",
    "text": "TEXT",
    "blob": "BLOB",
    "boolean": "INTEGER",
    "date": "TEXT",
}


@dataclass(frozen=True)
class Provenance:
    kind: str  # Loaded | Random | TieForged | TieFree
    seed: int | None = None
    target: str | None = None  # query/example id for forged instances

    def label(self) -> str:
        bits = [self.kind]
        if self.seed is not None:
            bits.append(f"seed={self.seed}")
        if self.target is not None:
            bits.append(f"target={self.target}")
        return ":".join(bits)


@dataclass
class DbInstance:
    schema: DbSchema
    tables: dict[str, list[tuple]]
    provenance: Provenance = field(default_factory=lambda: Provenance("Loaded"))

    def __post_init__(self) -> None:
        for t in self.schema.tables:
            rows = self.tables.setdefault(t.name, [])
            arity = len(t.columns)
            for row in rows:
                if len(row) != arity:
                    raise SchemaError(
                        f"row arity {len(row)} != {arity} columns in table {t.name}"
                    )

    @property
    def instance_id(self) -> str:
        return f"{self.schema.database_id}:{self.provenance.label()}"

    def rows(self, table_name: str) -> list[tuple]:
        table = self.schema.table(table_name)
        if table is None:
            raise SchemaError(f"no such table: {table_name}")
        return self.tables[table.name]


# ---------------------------------------------------------------------------
# SQLite materialization
# ---------------------------------------------------------------------------


def create_sqlite(instance: DbInstance, conn: sqlite3.Connection) -> None:
    cur = conn.cursor()
    for t in instance.schema.tables:
        cols = ", ".join(
            f'"{c.name}" {_SQLITE_TYPE[c.affinity]}' for c in t.columns
        )
        cur.execute(f'CREATE TABLE "{t.name}" ({cols})')
        rows = instance.tables.get(t.name, [])
        if rows:
            marks = ", ".join("?" for _ in t.columns)
            cur.executemany(f'INSERT INTO "{t.name}" VALUES ({marks})', rows)
    conn.commit()


def to_sqlite_file(instance: DbInstance, path: str | Path) -> Path:
    path = Path(path)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    try:
        create_sqlite(instance, conn)
    finally:
        conn.close()
    return path


# ---------------------------------------------------------------------------
# CSV directories
# ---------------------------------------------------------------------------


def to_csv_dir(instance: DbInstance, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t in instance.schema.tables:
        with open(directory / f"{t.name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([c.name for c in t.columns])
            for row in instance.tables.get(t.name, []):
                writer.writerow(["" if v is None else v for v in row])
    return directory


def _coerce(value: str, affinity: str):
    if value == "":
        return None
    if affinity == "integer" or affinity == "boolean":
        return int(value)
    if affinity == "real":
        return float(value)
    return value


def from_csv_dir(schema: DbSchema, directory: str | Path) -> DbInstance:
    directory = Path(directory)
    tables: dict[str, list[tuple]] = {}
    for t in schema.tables:
        path = directory / f"{t.name}.csv"
        if not path.exists():
            matches = [p for p in directory.glob("*.csv") if p.stem.lower() == t.name.lower()]
            if not matches:
                raise CorpusIoError(f"missing CSV for table {t.name} in {directory}")
            path = matches[0]
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, [])
            order = []
            by_name = {c.name.lower(): i for i, c in enumerate(t.columns)}
            for col in header:
                if col.lower() not in by_name:
                    raise CorpusIoError(f"unknown column {col} in {path}")
                order.append(by_name[col.lower()])
            rows = []
            for raw in reader:
                row: list = [None] * len(t.columns)
                for cell, target in zip(raw, order):
                    row[target] = _coerce(cell, t.columns[target].affinity)
                rows.append(tuple(row))
        tables[t.name] = rows
    return DbInstance(schema=schema, tables=tables, provenance=Provenance("Loaded"))


def load_instance_for(schema: DbSchema, path: str | Path) -> DbInstance:
    """Load a benchmark database (SQLite file or CSV directory) as an instance."""
    path = Path(path)
    if path.is_dir():
        return from_csv_dir(schema, path)
    conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    try:
        tables: dict[str, list[tuple]] = {}
        for t in schema.tables:
            cur = conn.execute(f'SELECT * FROM "{t.name}"')
            tables[t.name] = [tuple(r) for r in cur.fetchall()]
    finally:
        conn.close()
    return DbInstance(schema=schema, tables=tables, provenance=Provenance("Loaded"))


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def instance_to_json(instance: DbInstance) -> dict:
    return {
        "database_id": instance.schema.database_id,
        "provenance": {
            "kind": instance.provenance.kind,
            "seed": instance.provenance.seed,
            "target": instance.provenance.target,
        },
        "schema": {
            "database_id": instance.schema.database_id,
            "tables": [
                {
                    "name": t.name,
                    "columns": [
                        {"name": c.name, "affinity": c.affinity} for c in t.columns
                    ],
                    "primary_key": list(t.primary_key),
                    "unique": [list(u) for u in t.unique_constraints],
                    "foreign_keys": [
                        {
                            "columns": list(fk.columns),
                            "ref_table": fk.ref_table,
                            "ref_columns": list(fk.ref_columns),
                        }
                        for fk in t.foreign_keys
                    ],
                }
                for t in instance.schema.tables
            ],
        },
        "tables": {name: [list(r) for r in rows] for name, rows in instance.tables.items()},
    }


def instance_from_json(obj: dict) -> DbInstance:
    from .schema import schema_from_native

    schema = schema_from_native(obj["schema"])
    prov = obj.get("provenance", {})
    return DbInstance(
        schema=schema,
        tables={name: [tuple(r) for r in rows] for name, rows in obj["tables"].items()},
        provenance=Provenance(
            kind=prov.get("kind", "Loaded"),
            seed=prov.get("seed"),
            target=prov.get("target"),
        ),
    )


def save_instance(instance: DbInstance, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(instance_to_json(instance), indent=1))
    return path


def load_instance(path: str | Path) -> DbInstance:
    return instance_from_json(json.loads(Path(path).read_text()))
