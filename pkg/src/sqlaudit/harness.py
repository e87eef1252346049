"""End-to-end evaluation orchestration.

`evaluate_corpus` scores a prediction set against gold queries with both
metric families: exact set match (with and without literal values) and
execution accuracy over the benchmark database plus generated instances
(tie-forged / tie-free / random, seed-deterministic per example). Failure
sets intersect execution failures across systems; the taxonomy report
aggregates human error-group labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .corpus import Corpus, PredictionSet
from .dialect_audit import open_database_cached
from .errors import (
    CannotForge,
    CorpusMismatch,
    ParseError,
    ResolutionError,
    UnknownExample,
)
from .forge import forge_tie_free_instance, forge_tie_instance, random_instance
from .instances import DbInstance
from .metrics import ExecOutcome, MatchResult, exact_set_match, execution_accuracy
from .parser import parse_sql
from .resolver import resolve_columns
from .tie_audit import TieCategory, audit_query


class ErrorGroup(Enum):
    SCHEMA = "Schema"
    CONDITION = "Condition"
    NESTED = "Nested"
    GROUP_BY = "GroupBy"
    LIMIT = "Limit"


@dataclass
class EvalConfig:
    seed: int = 0
    instances_per_example: int = 2
    float_tol: float = 1e-6
    column_permutation: bool = False
    set_mode: bool = False
    rows_per_table: int = 3
    use_loaded_database: bool = True

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "instances_per_example": self.instances_per_example,
            "float_tol": self.float_tol,
            "column_permutation": self.column_permutation,
            "set_mode": self.set_mode,
            "rows_per_table": self.rows_per_table,
            "use_loaded_database": self.use_loaded_database,
        }


@dataclass
class ExampleRecord:
    example_id: str
    set_match: MatchResult | None
    set_match_novalues: MatchResult | None
    exec_outcome: ExecOutcome | None
    findings: list  # gold-query tie findings
    failure_reason: str | None = None

    @property
    def set_matched(self) -> bool:
        return bool(self.set_match and self.set_match.matched)

    @property
    def exec_correct(self) -> bool:
        return bool(self.exec_outcome and self.exec_outcome.overall)

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "set_match": None if self.set_match is None else self.set_match.to_dict(),
            "set_match_novalues": None
            if self.set_match_novalues is None
            else self.set_match_novalues.to_dict(),
            "execution": None if self.exec_outcome is None else self.exec_outcome.to_dict(),
            "findings": [f.to_dict() for f in self.findings],
            "failure_reason": self.failure_reason,
        }


@dataclass
class EvalReport:
    system_name: str
    corpus_fingerprint: str
    config: EvalConfig
    records: list[ExampleRecord]

    @property
    def exec_accuracy(self) -> float:
        n = len(self.records)
        return 100.0 * sum(r.exec_correct for r in self.records) / n if n else 0.0

    @property
    def set_match_accuracy(self) -> float:
        n = len(self.records)
        return 100.0 * sum(r.set_matched for r in self.records) / n if n else 0.0

    @property
    def set_match_novalues_accuracy(self) -> float:
        n = len(self.records)
        if not n:
            return 0.0
        return (
            100.0
            * sum(bool(r.set_match_novalues and r.set_match_novalues.matched) for r in self.records)
            / n
        )

    def exec_failures(self) -> list[str]:
        return [r.example_id for r in self.records if not r.exec_correct]

    def to_dict(self) -> dict:
        return {
            "system": self.system_name,
            "corpus_fingerprint": self.corpus_fingerprint,
            "config": self.config.to_dict(),
            "aggregates": {
                "execution_accuracy": round(self.exec_accuracy, 2),
                "set_match_accuracy": round(self.set_match_accuracy, 2),
                "set_match_novalues_accuracy": round(self.set_match_novalues_accuracy, 2),
                "evaluated": len(self.records),
            },
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _example_seed(seed: int, example_id: str) -> int:
    import hashlib

    digest = hashlib.sha256(f"{seed}:{example_id}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _instances_for_example(corpus: Corpus, entry, config: EvalConfig) -> list[DbInstance]:
    instances: list[DbInstance] = []
    schema = corpus.schemas.get(entry.example.database_id)
    if config.use_loaded_database and entry.example.database_id in corpus.database_paths:
        try:
            instances.append(
                open_database_cached(corpus, entry.example.database_id, schema)
            )
        except Exception:
            pass
    if entry.ast is None or schema is None:
        return instances
    seed = _example_seed(config.seed, entry.example.example_id)
    findings = audit_query(entry.ast, schema)
    made = 0
    if findings and made < config.instances_per_example:
        try:
            instances.append(
                forge_tie_instance(
                    schema,
                    entry.ast,
                    seed=seed,
                    rows_per_table=config.rows_per_table,
                    target_id=entry.example.example_id,
                )
            )
            made += 1
        except CannotForge:
            pass
    if findings and made < config.instances_per_example:
        try:
            instances.append(
                forge_tie_free_instance(
                    schema,
                    entry.ast,
                    seed=seed,
                    rows_per_table=config.rows_per_table,
                    target_id=entry.example.example_id,
                )
            )
            made += 1
        except CannotForge:
            pass
    while made < config.instances_per_example:
        instances.append(random_instance(schema, seed + made, config.rows_per_table))
        made += 1
    return instances


def evaluate_corpus(
    predictions: PredictionSet,
    corpus: Corpus,
    instances_per_example: int | None = None,
    config: EvalConfig | None = None,
) -> EvalReport:
    """Score predictions against gold; missing predictions, parse failures,
    and execution errors are failed verdicts with reasons, never aborts."""
    config = config or EvalConfig()
    if instances_per_example is not None:
        config.instances_per_example = instances_per_example
    records: list[ExampleRecord] = []
    for entry in corpus.entries:
        ex_id = entry.example.example_id
        findings = (
            audit_query(entry.ast, corpus.schemas.get(entry.example.database_id))
            if entry.ast is not None
            else []
        )
        pred_sql = predictions.entries.get(ex_id)
        if pred_sql is None or not pred_sql.strip():
            records.append(
                ExampleRecord(ex_id, None, None, None, findings, "missing prediction")
            )
            continue
        if entry.ast is None:
            records.append(
                ExampleRecord(
                    ex_id, None, None, None, findings,
                    f"gold query unusable: {entry.unsupported or entry.parse_error}",
                )
            )
            continue
        schema = corpus.schemas.get(entry.example.database_id)
        try:
            pred_ast = parse_sql(pred_sql, corpus.dialect)
        except ParseError as exc:
            records.append(
                ExampleRecord(ex_id, None, None, None, findings, f"prediction parse: {exc}")
            )
            continue
        try:
            pred_ast = resolve_columns(pred_ast, schema)
        except ResolutionError:
            pass  # metrics degrade to name-based comparison
        set_match = exact_set_match(pred_ast, entry.ast, with_values=True)
        set_match_nv = exact_set_match(pred_ast, entry.ast, with_values=False)
        instances = _instances_for_example(corpus, entry, config)
        if instances:
            exec_outcome = execution_accuracy(
                pred_ast,
                entry.ast,
                instances,
                float_tol=config.float_tol,
                column_permutation=config.column_permutation,
                set_mode=config.set_mode,
            )
        else:
            exec_outcome = ExecOutcome(per_instance=[], overall=False)
        records.append(
            ExampleRecord(ex_id, set_match, set_match_nv, exec_outcome, findings)
        )
    return EvalReport(
        system_name=predictions.system_name,
        corpus_fingerprint=corpus.fingerprint(),
        config=config,
        records=records,
    )


# ---------------------------------------------------------------------------
# Failure sets and taxonomy
# ---------------------------------------------------------------------------


def failure_set(reports: list[EvalReport]) -> list[str]:
    """Examples every report failed on (execution accuracy), in corpus order."""
    if not reports:
        raise CorpusMismatch("failure_set needs at least one report")
    fingerprints = {r.corpus_fingerprint for r in reports}
    if len(fingerprints) > 1:
        raise CorpusMismatch(f"reports cover different corpora: {sorted(fingerprints)}")
    common = set(reports[0].exec_failures())
    for r in reports[1:]:
        common &= set(r.exec_failures())
    return [r.example_id for r in reports[0].records if r.example_id in common]


@dataclass
class TaxonomyReport:
    per_source: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        totals = {
            source: sum(groups.values()) for source, groups in self.per_source.items()
        }
        return {"per_source": self.per_source, "totals": totals}


def taxonomy_report(
    labels: list[tuple[str, str, ErrorGroup]], corpus: Corpus | None = None
) -> TaxonomyReport:
    """Histogram of (example, source, error group) labels per source."""
    known = set(corpus.example_ids) if corpus is not None else None
    per_source: dict[str, dict[str, int]] = {}
    for example_id, source, group in labels:
        if known is not None and example_id not in known:
            raise UnknownExample(example_id)
        hist = per_source.setdefault(
            source, {g.value: 0 for g in ErrorGroup}
        )
        hist[group.value] += 1
    return TaxonomyReport(per_source=per_source)


def suggest_groups(corpus: Corpus) -> list[dict]:
    """Auto-suggested GroupBy/Limit labels from tie findings; Schema /
    Condition / Nested need human judgment and are never suggested."""
    suggestions = []
    for entry in corpus.entries:
        if entry.ast is None:
            continue
        findings = audit_query(entry.ast, corpus.schemas.get(entry.example.database_id))
        cats = {f.category for f in findings}
        if TieCategory.GROUP_BY_MISUSE in cats:
            suggestions.append(
                {
                    "example_id": entry.example.example_id,
                    "group": ErrorGroup.GROUP_BY.value,
                    "suggested": True,
                }
            )
        if cats & {TieCategory.LIMIT1, TieCategory.LIMITN}:
            suggestions.append(
                {
                    "example_id": entry.example.example_id,
                    "group": ErrorGroup.LIMIT.value,
                    "suggested": True,
                }
            )
    return suggestions
