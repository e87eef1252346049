"""Benchmark corpus ingestion and Table-1-style statistics.

Reads the public distribution layout: an examples JSON array (question /
gold SQL / database id per entry, field names configurable per benchmark),
a schema file (native or Spider `tables.json`), and a databases directory
holding SQLite files (`<db_id>/<db_id>.sqlite`) or CSV directories
(`<db_id>/<table>.csv`, header row = column names).

Every gold query is parsed and resolved at load time; failures are recorded
per entry, never dropped silently. The resulting Corpus is immutable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CorpusIoError,
    MalformedExample,
    MissingSchema,
    ParseError,
    ResolutionError,
    Unsupported,
)
from .parser import parse_sql
from .resolver import resolve_columns
from .schema import DbSchema, load_schemas
from .sqlast import Dialect, SelectQuery
from .tie_audit import (
    CATEGORY_PRIORITY,
    audit_query,
    dominant_category,
    outer_findings,
)

_QUESTION_FIELDS = ("question", "Question", "nl", "text")
_SQL_FIELDS = ("query", "SQL", "sql", "gold_sql")
_DB_FIELDS = ("db_id", "database_id", "db")
_ID_FIELDS = ("question_id", "example_id", "id")


@dataclass(frozen=True)
class BenchmarkExample:
    example_id: str
    question: str
    database_id: str
    gold_sql: str


@dataclass
class CorpusEntry:
    """One example plus its parse/resolve outcome."""

    example: BenchmarkExample
    raw: dict
    ast: SelectQuery | None = None  # resolved when resolve_error is None
    parse_error: str | None = None
    unsupported: str | None = None
    resolve_error: str | None = None

    @property
    def status(self) -> str:
        if self.unsupported is not None:
            return "unsupported"
        if self.parse_error is not None:
            return "unparsed"
        return "parsed"


@dataclass
class Corpus:
    entries: list[CorpusEntry]
    schemas: dict[str, DbSchema]
    database_paths: dict[str, Path] = field(default_factory=dict)
    dialect: Dialect = Dialect.BENCHMARK_LENIENT

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, example_id: str) -> CorpusEntry | None:
        for e in self.entries:
            if e.example.example_id == example_id:
                return e
        return None

    @property
    def example_ids(self) -> list[str]:
        return [e.example.example_id for e in self.entries]

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for e in self.entries:
            h.update(e.example.example_id.encode())
            h.update(b"\x00")
            h.update(e.example.gold_sql.encode())
            h.update(b"\x01")
        return h.hexdigest()[:16]


def _pick_field(obj: dict, names: tuple[str, ...], override: str | None) -> str | None:
    if override is not None:
        return override if override in obj else None
    for name in names:
        if name in obj:
            return name
    return None


def _index_databases(databases_dir: Path | None) -> dict[str, Path]:
    paths: dict[str, Path] = {}
    if databases_dir is None or not databases_dir.exists():
        return paths
    for child in sorted(databases_dir.iterdir()):
        if child.is_dir():
            for ext in (".sqlite", ".db", ".sqlite3"):
                candidate = child / f"{child.name}{ext}"
                if candidate.exists():
                    paths[child.name] = candidate
                    break
            else:
                if any(f.suffix == ".csv" for f in child.iterdir()):
                    paths[child.name] = child  # CSV-directory fallback
        elif child.suffix in (".sqlite", ".db", ".sqlite3"):
            paths[child.stem] = child
    return paths


def load_corpus(
    examples_path: str | Path,
    schemas_path: str | Path,
    databases_dir: str | Path | None = None,
    field_map: dict[str, str] | None = None,
    dialect: Dialect = Dialect.BENCHMARK_LENIENT,
) -> Corpus:
    """Load a benchmark corpus; see module docstring for layout."""
    examples_path = Path(examples_path)
    schemas_path = Path(schemas_path)
    for p in (examples_path, schemas_path):
        if not p.exists():
            raise CorpusIoError(f"path does not exist: {p}")
    try:
        raw_examples = json.loads(examples_path.read_text())
    except json.JSONDecodeError as exc:
        raise CorpusIoError(f"examples file is not valid JSON: {exc}") from exc
    if not isinstance(raw_examples, list):
        raise CorpusIoError("examples file must be a JSON array")

    schemas = load_schemas(schemas_path)
    database_paths = _index_databases(Path(databases_dir) if databases_dir else None)
    field_map = field_map or {}

    entries: list[CorpusEntry] = []
    for idx, obj in enumerate(raw_examples):
        if not isinstance(obj, dict):
            raise MalformedExample(idx, "entry is not a JSON object")
        qf = _pick_field(obj, _QUESTION_FIELDS, field_map.get("question"))
        sf = _pick_field(obj, _SQL_FIELDS, field_map.get("sql"))
        df = _pick_field(obj, _DB_FIELDS, field_map.get("db"))
        if qf is None or sf is None or df is None:
            missing = [
                label
                for label, got in (("question", qf), ("sql", sf), ("db", df))
                if got is None
            ]
            raise MalformedExample(idx, f"missing field(s): {', '.join(missing)}")
        idf = _pick_field(obj, _ID_FIELDS, field_map.get("id"))
        example_id = str(obj[idf]) if idf is not None else str(idx)
        database_id = str(obj[df])
        if database_id not in schemas:
            raise MissingSchema(database_id)
        example = BenchmarkExample(
            example_id=example_id,
            question=str(obj[qf]),
            database_id=database_id,
            gold_sql=str(obj[sf]),
        )
        entries.append(_analyze(example, obj, schemas[database_id], dialect))
    return Corpus(
        entries=entries,
        schemas=schemas,
        database_paths=database_paths,
        dialect=dialect,
    )


def _analyze(
    example: BenchmarkExample, raw: dict, schema: DbSchema, dialect: Dialect
) -> CorpusEntry:
    entry = CorpusEntry(example=example, raw=raw)
    try:
        ast = parse_sql(example.gold_sql, dialect)
    except Unsupported as exc:
        entry.unsupported = exc.construct
        return entry
    except ParseError as exc:
        entry.parse_error = str(exc)
        return entry
    try:
        entry.ast = resolve_columns(ast, schema)
    except ResolutionError as exc:
        # keep the unresolved AST: the tie detectors degrade to name matching
        entry.ast = ast
        entry.resolve_error = str(exc)
    return entry


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------


@dataclass
class PredictionSet:
    system_name: str
    entries: dict[str, str]  # example_id -> predicted SQL text


def load_predictions(
    path: str | Path, corpus: Corpus, system_name: str | None = None
) -> PredictionSet:
    """Load predictions: either one `SQL<TAB>database_id` (or bare SQL) line
    per corpus example, or a JSON object/array keyed by example id."""
    from .errors import UnknownExample

    path = Path(path)
    if not path.exists():
        raise CorpusIoError(f"prediction file does not exist: {path}")
    name = system_name or path.stem
    text = path.read_text()
    entries: dict[str, str] = {}
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusIoError(f"prediction file is not valid JSON: {exc}") from exc
        try:
            if isinstance(data, dict):
                items = list(data.items())
            else:
                items = [(str(d["example_id"]), d["sql"]) for d in data]
        except (KeyError, TypeError) as exc:
            raise CorpusIoError(
                "JSON predictions must be {example_id: sql} or "
                "[{example_id, sql}] shaped"
            ) from exc
        known = set(corpus.example_ids)
        for ex_id, sql in items:
            if str(ex_id) not in known:
                raise UnknownExample(str(ex_id))
            entries[str(ex_id)] = str(sql)
    else:
        lines = [ln for ln in text.splitlines()]
        while lines and not lines[-1].strip():
            lines.pop()
        ids = corpus.example_ids
        if len(lines) != len(ids):
            raise CorpusIoError(
                f"prediction file has {len(lines)} lines, corpus has {len(ids)} examples"
            )
        for ex_id, line in zip(ids, lines):
            entries[ex_id] = line.split("\t")[0].strip()
    return PredictionSet(system_name=name, entries=entries)


# ---------------------------------------------------------------------------
# Table-1-style statistics
# ---------------------------------------------------------------------------


@dataclass
class CorpusStats:
    corpus_size: int
    counts: dict[str, int]  # category value -> example count (disjoint)
    unparsed: int
    unsupported: int
    denominator: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentage(self, category: str) -> float:
        return 100.0 * self.counts.get(category, 0) / self.denominator if self.denominator else 0.0

    @property
    def total_percentage(self) -> float:
        return 100.0 * self.total / self.denominator if self.denominator else 0.0

    def to_dict(self) -> dict:
        return {
            "corpus_size": self.corpus_size,
            "counts": dict(self.counts),
            "percentages": {
                cat: round(self.percentage(cat), 2) for cat in self.counts
            },
            "total": self.total,
            "total_percentage": round(self.total_percentage, 2),
            "unparsed": self.unparsed,
            "unsupported": self.unsupported,
        }

    def to_table(self) -> str:
        header = ["LIMIT 1", "LIMIT N", "GROUP BY", "ORDER BY", "Total"]
        cats = [c.value for c in CATEGORY_PRIORITY]
        cells = [
            f"{self.counts.get(c, 0)} ({self.percentage(c):.1f}%)" for c in cats
        ] + [f"{self.total} ({self.total_percentage:.2f}%)"]
        widths = [max(len(h), len(v)) for h, v in zip(header, cells)]
        line1 = "  ".join(h.ljust(w) for h, w in zip(header, widths))
        line2 = "  ".join(v.ljust(w) for v, w in zip(cells, widths))
        return f"{line1}\n{line2}"


def corpus_stats(
    corpus: Corpus,
    include_subqueries: bool = True,
    full_denominator: bool = True,
) -> CorpusStats:
    """Disjoint per-query tie-category counts (LIMIT 1 > LIMIT N > GROUP BY >
    ORDER BY priority); parse failures are surfaced, never silently ignored."""
    counts = {cat.value: 0 for cat in CATEGORY_PRIORITY}
    unparsed = 0
    unsupported = 0
    for entry in corpus.entries:
        if entry.status == "unsupported":
            unsupported += 1
            continue
        if entry.status == "unparsed":
            unparsed += 1
            continue
        schema = corpus.schemas.get(entry.example.database_id)
        findings = audit_query(entry.ast, schema)
        if not include_subqueries:
            findings = outer_findings(findings)
        cat = dominant_category(findings)
        if cat is not None:
            counts[cat.value] += 1
    denominator = len(corpus.entries) if full_denominator else (
        len(corpus.entries) - unparsed - unsupported
    )
    return CorpusStats(
        corpus_size=len(corpus.entries),
        counts=counts,
        unparsed=unparsed,
        unsupported=unsupported,
        denominator=denominator,
    )


def export_examples(corpus: Corpus, rewritten: dict[str, str] | None = None) -> list[dict]:
    """Corpus as an examples-file JSON array; `rewritten` swaps gold SQL by
    example id (drop-in replacement gold set)."""
    out = []
    rewritten = rewritten or {}
    for entry in corpus.entries:
        obj = dict(entry.raw)
        sf = _pick_field(obj, _SQL_FIELDS, None) or "query"
        if entry.example.example_id in rewritten:
            obj[sf] = rewritten[entry.example.example_id]
        out.append(obj)
    return out
