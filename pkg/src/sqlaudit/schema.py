"""Database schema model and loaders.

Supports two JSON shapes: the toolkit's native format and the Spider-style
`tables.json` list (table_names_original / column_names_original /
column_types / primary_keys / foreign_keys).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError
from .sqlast import AFFINITIES

# Spider column_types → affinity
_SPIDER_TYPE_MAP = {
    "text": "text",
    "number": "real",
    "time": "date",
    "boolean": "boolean",
    "others": "blob",
}


@dataclass(frozen=True)
class Column:
    name: str
    affinity: str = "text"

    def __post_init__(self) -> None:
        if self.affinity not in AFFINITIES:
            raise SchemaError(f"unknown affinity {self.affinity!r} for column {self.name}")


@dataclass
class ForeignKey:
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]


@dataclass
class Table:
    name: str
    columns: list[Column]
    primary_key: tuple[str, ...] = ()
    unique_constraints: list[tuple[str, ...]] = field(default_factory=list)
    foreign_keys: list[ForeignKey] = field(default_factory=list)

    def column(self, name: str) -> Column | None:
        lname = name.lower()
        for col in self.columns:
            if col.name.lower() == lname:
                return col
        return None

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def unique_column_sets(self) -> list[frozenset[str]]:
        """Primary key plus declared unique constraints, lowercased."""
        sets = []
        if self.primary_key:
            sets.append(frozenset(c.lower() for c in self.primary_key))
        for uc in self.unique_constraints:
            sets.append(frozenset(c.lower() for c in uc))
        return sets


@dataclass
class DbSchema:
    database_id: str
    tables: list[Table]

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        seen: set[str] = set()
        for t in self.tables:
            key = t.name.lower()
            if key in seen:
                raise SchemaError(f"duplicate table name: {t.name}")
            seen.add(key)
            cols: set[str] = set()
            for c in t.columns:
                ckey = c.name.lower()
                if ckey in cols:
                    raise SchemaError(f"duplicate column {t.name}.{c.name}")
                cols.add(ckey)
        for t in self.tables:
            for fk in t.foreign_keys:
                ref = self.table(fk.ref_table)
                if ref is None:
                    raise SchemaError(
                        f"foreign key on {t.name} references missing table {fk.ref_table}"
                    )
                for col in fk.columns:
                    if t.column(col) is None:
                        raise SchemaError(f"foreign key column {t.name}.{col} not found")
                for col in fk.ref_columns:
                    if ref.column(col) is None:
                        raise SchemaError(
                            f"foreign key target {fk.ref_table}.{col} not found"
                        )

    def table(self, name: str) -> Table | None:
        lname = name.lower()
        for t in self.tables:
            if t.name.lower() == lname:
                return t
        return None

    def summary(self) -> dict:
        """Annotator-facing schema view: tables, columns, keys. No data."""
        return {
            "database_id": self.database_id,
            "tables": [
                {
                    "name": t.name,
                    "columns": [
                        {
                            "name": c.name,
                            "affinity": c.affinity,
                            "primary_key": c.name in t.primary_key,
                        }
                        for c in t.columns
                    ],
                    "foreign_keys": [
                        {
                            "columns": list(fk.columns),
                            "ref_table": fk.ref_table,
                            "ref_columns": list(fk.ref_columns),
                        }
                        for fk in t.foreign_keys
                    ],
                }
                for t in self.tables
            ],
        }


# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------


def schema_from_native(obj: dict) -> DbSchema:
    tables = []
    for t in obj["tables"]:
        columns = [
            Column(name=c["name"], affinity=c.get("affinity", "text"))
            for c in t["columns"]
        ]
        fks = [
            ForeignKey(
                columns=tuple(fk["columns"]),
                ref_table=fk["ref_table"],
                ref_columns=tuple(fk["ref_columns"]),
            )
            for fk in t.get("foreign_keys", [])
        ]
        tables.append(
            Table(
                name=t["name"],
                columns=columns,
                primary_key=tuple(t.get("primary_key", [])),
                unique_constraints=[tuple(u) for u in t.get("unique", [])],
                foreign_keys=fks,
            )
        )
    return DbSchema(database_id=obj["database_id"], tables=tables)


def schema_from_spider_entry(entry: dict) -> DbSchema:
    table_names = entry["table_names_original"]
    col_entries = entry["column_names_original"]  # [(table_idx, name)], [0] is (-1, '*')
    col_types = entry.get("column_types", ["text"] * len(col_entries))

    columns_by_table: dict[int, list[Column]] = {i: [] for i in range(len(table_names))}
    col_owner: list[tuple[int, str]] = []
    for (t_idx, col_name), ctype in zip(col_entries, col_types):
        col_owner.append((t_idx, col_name))
        if t_idx < 0:
            continue
        affinity = _SPIDER_TYPE_MAP.get(str(ctype).lower(), "text")
        columns_by_table[t_idx].append(Column(name=col_name, affinity=affinity))

    pk_by_table: dict[int, list[str]] = {}
    for pk in entry.get("primary_keys", []):
        for col_idx in pk if isinstance(pk, list) else [pk]:
            t_idx, col_name = col_owner[col_idx]
            pk_by_table.setdefault(t_idx, []).append(col_name)

    fks_by_table: dict[int, list[ForeignKey]] = {}
    for local_idx, ref_idx in entry.get("foreign_keys", []):
        lt, lc = col_owner[local_idx]
        rt, rc = col_owner[ref_idx]
        fks_by_table.setdefault(lt, []).append(
            ForeignKey(columns=(lc,), ref_table=table_names[rt], ref_columns=(rc,))
        )

    tables = [
        Table(
            name=name,
            columns=columns_by_table[i],
            primary_key=tuple(pk_by_table.get(i, [])),
            foreign_keys=fks_by_table.get(i, []),
        )
        for i, name in enumerate(table_names)
    ]
    return DbSchema(database_id=entry["db_id"], tables=tables)


def load_schemas(path: str | Path) -> dict[str, DbSchema]:
    """Load a schema file (native or Spider tables.json) into a db_id map."""
    data = json.loads(Path(path).read_text())
    schemas: dict[str, DbSchema] = {}
    if isinstance(data, dict) and "databases" in data:
        entries = data["databases"]
    elif isinstance(data, list):
        entries = data
    else:
        raise SchemaError(f"unrecognized schema file shape: {path}")
    for entry in entries:
        if "table_names_original" in entry:
            schema = schema_from_spider_entry(entry)
        else:
            schema = schema_from_native(entry)
        schemas[schema.database_id] = schema
    return schemas
