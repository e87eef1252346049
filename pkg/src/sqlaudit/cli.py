"""Command-line interface.

Subcommands: stats, audit, rewrite, eval, portability, forge, failures,
serve. Exit codes: 0 success, 1 usage error, 2 corpus error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import corpus_stats, export_examples, load_corpus, load_predictions
from .errors import CorpusError, SqlAuditError
from .harness import EvalConfig, evaluate_corpus
from .rewrite import rewrite_corpus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CORPUS = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--examples", required=True, help="examples JSON file")
    p.add_argument("--tables", required=True, help="schema file (native or tables.json)")
    p.add_argument("--databases", default=None, help="databases directory")
    p.add_argument("--field-map", default=None, help="JSON field-name mapping")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default=None, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqlaudit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="tie-category counts over a corpus")
    _add_corpus_args(p)
    _add_common_args(p)
    p.add_argument("--no-subqueries", action="store_true", help="outer query only")
    p.add_argument(
        "--parseable-denominator",
        action="store_true",
        help="use the parseable subset as the percentage denominator",
    )

    p = sub.add_parser("audit", help="per-example tie findings as JSON")
    _add_corpus_args(p)
    _add_common_args(p)

    p = sub.add_parser("rewrite", help="emit a revised gold set and rewrite report")
    _add_corpus_args(p)
    _add_common_args(p)

    p = sub.add_parser("eval", help="evaluate a prediction file")
    _add_corpus_args(p)
    _add_common_args(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--system", default=None, help="system name for the report")
    p.add_argument("--instances", type=int, default=2, help="generated instances per example")
    p.add_argument("--no-loaded-db", action="store_true")

    p = sub.add_parser("portability", help="strict-SQL violation report")
    _add_corpus_args(p)
    _add_common_args(p)
    p.add_argument("--strict-backend", action="store_true", help="attach the strict emulation backend")
    p.add_argument("--once-per-query", action="store_true")
    p.add_argument("--function-catalog", default=None, help="JSON allowlist file")

    p = sub.add_parser("forge", help="emit tie-forged / tie-free / random instances")
    _add_corpus_args(p)
    _add_common_args(p)
    p.add_argument("--example-id", action="append", default=None)
    p.add_argument("--kind", choices=["tie", "tie-free", "random"], default="tie")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--format", choices=["json", "csv", "sqlite"], default="json")

    p = sub.add_parser("failures", help="intersection of execution failures")
    p.add_argument("--reports", nargs="+", required=True, help="EvalReport JSON files")
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="run the annotation service API")
    _add_corpus_args(p)
    _add_common_args(p)
    p.add_argument("--store", default=None, help="session event-log file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--sandbox-instances", default=None, help="directory of instance JSON files")
    return parser


def _load_corpus(args) -> "Corpus":
    field_map = json.loads(Path(args.field_map).read_text()) if args.field_map else None
    return load_corpus(
        args.examples, args.tables, args.databases, field_map=field_map
    )


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload)
    else:
        print(payload)


def _cmd_stats(args) -> int:
    corpus = _load_corpus(args)
    stats = corpus_stats(
        corpus,
        include_subqueries=not args.no_subqueries,
        full_denominator=not args.parseable_denominator,
    )
    print(stats.to_table())
    if stats.unparsed or stats.unsupported:
        print(f"unparsed: {stats.unparsed}  unsupported: {stats.unsupported}")
    if args.out:
        Path(args.out).write_text(json.dumps(stats.to_dict(), indent=1, sort_keys=True))
    return EXIT_OK


def _cmd_audit(args) -> int:
    from .tie_audit import audit_query

    corpus = _load_corpus(args)
    findings_out = []
    for entry in corpus.entries:
        if entry.ast is None:
            findings_out.append(
                {
                    "example_id": entry.example.example_id,
                    "error": entry.parse_error or f"unsupported: {entry.unsupported}",
                }
            )
            continue
        schema = corpus.schemas.get(entry.example.database_id)
        for f in audit_query(entry.ast, schema):
            findings_out.append({"example_id": entry.example.example_id, **f.to_dict()})
    _emit(json.dumps(findings_out, indent=1, sort_keys=True), args.out)
    return EXIT_OK


def _cmd_rewrite(args) -> int:
    corpus = _load_corpus(args)
    report = rewrite_corpus(corpus)
    out_dir = Path(args.out or "rewrite-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    report_dict = report.to_dict()
    (out_dir / "rewrite_report.json").write_text(
        json.dumps(report_dict, indent=1, sort_keys=True)
    )
    revised = export_examples(corpus, rewritten=report_dict["rewritten"])
    (out_dir / "examples_rewritten.json").write_text(json.dumps(revised, indent=1))
    print(
        f"affected {report.affected}/{report.corpus_size} "
        f"({report.affected_pct:.1f}%); per-rule {report.per_rule}; "
        f"unrewritable {len(report.unrewritable)}; wrote {out_dir}/"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    corpus = _load_corpus(args)
    predictions = load_predictions(args.predictions, corpus, args.system)
    config = EvalConfig(seed=args.seed, instances_per_example=args.instances)
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            if hasattr(config, key):
                setattr(config, key, value)
    if args.no_loaded_db:
        config.use_loaded_database = False
    report = evaluate_corpus(predictions, corpus, config=config)
    _emit(report.to_json(), args.out)
    if args.out:
        print(
            f"exec acc {report.exec_accuracy:.2f}  "
            f"set match {report.set_match_accuracy:.2f}  "
            f"set match (no values) {report.set_match_novalues_accuracy:.2f}"
        )
    return EXIT_OK


def _cmd_portability(args) -> int:
    from .dialect_audit import (
        DEFAULT_STRICT_FUNCTIONS,
        StrictEmulationBackend,
        load_function_catalog,
        portability_report,
    )

    corpus = _load_corpus(args)
    catalog = (
        load_function_catalog(args.function_catalog)
        if args.function_catalog
        else DEFAULT_STRICT_FUNCTIONS
    )
    backend = StrictEmulationBackend(function_catalog=catalog) if args.strict_backend else None
    report = portability_report(
        corpus, backend=backend, once_per_query=args.once_per_query, function_catalog=catalog
    )
    print(report.to_text())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True))
    return EXIT_OK


def _cmd_forge(args) -> int:
    from .errors import CannotForge
    from .forge import forge_tie_free_instance, forge_tie_instance, random_instance
    from .instances import save_instance, to_csv_dir, to_sqlite_file

    corpus = _load_corpus(args)
    out_dir = Path(args.out or "forged-instances")
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = set(args.example_id) if args.example_id else None
    made, skipped = 0, 0
    for entry in corpus.entries:
        ex_id = entry.example.example_id
        if wanted is not None and ex_id not in wanted:
            continue
        schema = corpus.schemas.get(entry.example.database_id)
        if entry.ast is None or schema is None:
            skipped += 1
            continue
        try:
            if args.kind == "tie":
                inst = forge_tie_instance(
                    schema, entry.ast, seed=args.seed, rows_per_table=args.rows, target_id=ex_id
                )
            elif args.kind == "tie-free":
                inst = forge_tie_free_instance(
                    schema, entry.ast, seed=args.seed, rows_per_table=args.rows, target_id=ex_id
                )
            else:
                inst = random_instance(schema, args.seed, args.rows)
        except CannotForge as exc:
            skipped += 1
            print(f"{ex_id}: {exc.reason}", file=sys.stderr)
            continue
        stem = f"{ex_id}_{args.kind.replace('-', '_')}"
        if args.format == "json":
            save_instance(inst, out_dir / f"{stem}.json")
        elif args.format == "csv":
            to_csv_dir(inst, out_dir / stem)
        else:
            to_sqlite_file(inst, out_dir / f"{stem}.sqlite")
        made += 1
    print(f"forged {made} instance(s), skipped {skipped}; wrote {out_dir}/")
    return EXIT_OK


def _cmd_failures(args) -> int:
    ids_per_report = []
    fingerprints = set()
    for path in args.reports:
        data = json.loads(Path(path).read_text())
        fingerprints.add(data["corpus_fingerprint"])
        failures = [
            r["example_id"]
            for r in data["records"]
            if not (r.get("execution") or {}).get("overall", False)
        ]
        ids_per_report.append((data["records"], failures))
    if len(fingerprints) > 1:
        print("error: reports cover different corpora", file=sys.stderr)
        return EXIT_CORPUS
    common = set(ids_per_report[0][1])
    for _, failures in ids_per_report[1:]:
        common &= set(failures)
    ordered = [r["example_id"] for r in ids_per_report[0][0] if r["example_id"] in common]
    _emit(json.dumps(ordered, indent=1), args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .annotation import AnnotationService, examples_from_corpus
    from .api import create_app
    from .instances import load_instance

    corpus = _load_corpus(args)
    service = AnnotationService(examples_from_corpus(corpus), store_path=args.store)
    sandbox = {}
    if args.sandbox_instances:
        for path in sorted(Path(args.sandbox_instances).glob("*.json")):
            inst = load_instance(path)
            sandbox[path.stem] = inst
    for db_id, db_path in corpus.database_paths.items():
        try:
            from .backend import open_database

            sandbox[db_id] = open_database(db_path, corpus.schemas.get(db_id))
        except Exception:
            continue
    app = create_app(service, sandbox)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "stats": _cmd_stats,
    "audit": _cmd_audit,
    "rewrite": _cmd_rewrite,
    "eval": _cmd_eval,
    "portability": _cmd_portability,
    "forge": _cmd_forge,
    "failures": _cmd_failures,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except CorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except SqlAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
