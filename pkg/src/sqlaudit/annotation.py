"""Blind two-round human adjudication protocol.

Sessions present each question with candidate SQL queries from several
sources (systems and the gold set alike), shuffled per task with a fixed
seed and stripped of provenance. Round One: every annotator labels every
candidate Correct/Incorrect. Disagreements advance to Round Two, where each
annotator sees the peer's explanation and may revise. Finalization reports
per-source accuracy over consistently-labeled tasks and the count of tasks
still inconsistent.

Persistence is a single-file append-only JSONL event log; current state is
derived by replay, so the full label history survives relabeling.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    AuthError,
    DuplicateSession,
    ExplanationRequired,
    NotAMember,
    NotDisagreementTask,
    RoundIncomplete,
    SessionFinalized,
    UnknownCandidate,
    UnknownExample,
    UnknownTask,
)


class Round(Enum):
    ONE = "One"
    TWO = "Two"
    FINALIZED = "Finalized"


class Label(Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"


@dataclass
class Candidate:
    candidate_id: str
    sql: str
    hidden_source: str  # never serialized into annotator-facing views


@dataclass
class AnnotationTask:
    task_id: str
    example_id: str
    question: str
    schema_view: dict
    candidates: list[Candidate]

    def candidate(self, candidate_id: str) -> Candidate:
        for c in self.candidates:
            if c.candidate_id == candidate_id:
                return c
        raise UnknownCandidate(f"unknown candidate {candidate_id}")


@dataclass
class LabelRecord:
    task_id: str
    annotator_id: str
    candidate_id: str
    label: Label
    round: Round
    explanation: str | None
    timestamp: float
    superseded: bool = False


@dataclass
class AnnotationSession:
    session_id: str
    tasks: list[AnnotationTask]
    annotators: list[str]
    seed: int
    round: Round = Round.ONE
    labels: list[LabelRecord] = field(default_factory=list)
    tokens: dict[str, str] = field(default_factory=dict)  # annotator -> bearer token
    disagreements: list[tuple[str, str]] = field(default_factory=list)  # (task, candidate)
    report: dict | None = None

    def task(self, task_id: str) -> AnnotationTask:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise UnknownTask(f"unknown task {task_id}")

    def live_label(
        self, task_id: str, annotator_id: str, candidate_id: str, round_: Round
    ) -> LabelRecord | None:
        for rec in reversed(self.labels):
            if (
                rec.task_id == task_id
                and rec.annotator_id == annotator_id
                and rec.candidate_id == candidate_id
                and rec.round == round_
                and not rec.superseded
            ):
                return rec
        return None

    def effective_label(
        self, task_id: str, annotator_id: str, candidate_id: str
    ) -> LabelRecord | None:
        """Round-Two label when present, else the Round-One label."""
        return self.live_label(task_id, annotator_id, candidate_id, Round.TWO) or self.live_label(
            task_id, annotator_id, candidate_id, Round.ONE
        )


class AnnotationService:
    """Protocol state machine over an example provider and an event store.

    `examples` maps example_id -> {"question": ..., "schema_view": ...};
    a Corpus can be adapted with `examples_from_corpus`.
    """

    def __init__(self, examples: dict[str, dict], store_path: str | Path | None = None):
        self.examples = examples
        self.sessions: dict[str, AnnotationSession] = {}
        self.store_path = Path(store_path) if store_path else None
        self._lock = threading.Lock()
        if self.store_path and self.store_path.exists():
            self._replay()

    # --- persistence --------------------------------------------------------

    def _append_event(self, event: dict) -> None:
        if self.store_path is None:
            return
        with open(self.store_path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay(self) -> None:
        for line in self.store_path.read_text().splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            self._apply(event, record=False)

    def _apply(self, event: dict, record: bool = True) -> None:
        kind = event["type"]
        if kind == "session_created":
            session = _session_from_event(event)
            self.sessions[session.session_id] = session
        elif kind == "label":
            session = self.sessions[event["session_id"]]
            rec = LabelRecord(
                task_id=event["task_id"],
                annotator_id=event["annotator_id"],
                candidate_id=event["candidate_id"],
                label=Label(event["label"]),
                round=Round(event["round"]),
                explanation=event.get("explanation"),
                timestamp=event["timestamp"],
            )
            prior = session.live_label(
                rec.task_id, rec.annotator_id, rec.candidate_id, rec.round
            )
            if prior is not None:
                prior.superseded = True
            session.labels.append(rec)
        elif kind == "round_advanced":
            session = self.sessions[event["session_id"]]
            session.round = Round.TWO
            session.disagreements = [tuple(d) for d in event["disagreements"]]
        elif kind == "finalized":
            session = self.sessions[event["session_id"]]
            session.round = Round.FINALIZED
            session.report = event["report"]
        if record:
            self._append_event(event)

    # --- protocol operations ---------------------------------------------------

    def create_session(
        self,
        example_ids: list[str],
        candidate_sets: dict[str, dict[str, str]],  # source -> example_id -> sql
        annotators: list[str],
        seed: int,
        session_id: str | None = None,
    ) -> AnnotationSession:
        import random

        if len(annotators) < 2:
            raise NotAMember("a session needs at least two annotators")
        with self._lock:
            sid = session_id or secrets.token_hex(8)
            if sid in self.sessions:
                raise DuplicateSession(f"session {sid} already exists")
            tasks_payload = []
            for i, example_id in enumerate(example_ids):
                if example_id not in self.examples:
                    raise UnknownExample(example_id)
                sourced = [
                    (source, sqls[example_id])
                    for source, sqls in sorted(candidate_sets.items())
                    if example_id in sqls
                ]
                if not sourced:
                    raise UnknownExample(
                        f"example {example_id} has no candidates in any source"
                    )
                rng = random.Random(f"{seed}:{example_id}")
                rng.shuffle(sourced)
                tasks_payload.append(
                    {
                        "task_id": f"{sid}-t{i}",
                        "example_id": example_id,
                        "question": self.examples[example_id]["question"],
                        "schema_view": self.examples[example_id]["schema_view"],
                        "candidates": [
                            {
                                "candidate_id": f"c{j}",
                                "sql": sql,
                                "hidden_source": source,
                            }
                            for j, (source, sql) in enumerate(sourced)
                        ],
                    }
                )
            event = {
                "type": "session_created",
                "session_id": sid,
                "annotators": list(annotators),
                "seed": seed,
                "tasks": tasks_payload,
                "tokens": {a: secrets.token_hex(16) for a in annotators},
            }
            self._apply(event)
            return self.sessions[sid]

    def session(self, session_id: str) -> AnnotationSession:
        if session_id not in self.sessions:
            raise UnknownTask(f"unknown session {session_id}")
        return self.sessions[session_id]

    def _check_member(self, session: AnnotationSession, annotator_id: str) -> None:
        if annotator_id not in session.annotators:
            raise NotAMember(f"{annotator_id} is not part of session {session.session_id}")

    def authenticate(self, session_id: str, annotator_id: str, token: str) -> None:
        session = self.session(session_id)
        self._check_member(session, annotator_id)
        if session.tokens.get(annotator_id) != token:
            raise AuthError("bad annotator token")

    def find_task(self, task_id: str) -> tuple[AnnotationSession, AnnotationTask]:
        for session in self.sessions.values():
            for t in session.tasks:
                if t.task_id == task_id:
                    return session, t
        raise UnknownTask(f"unknown task {task_id}")

    def _peer_explanations(
        self, session: AnnotationSession, task: AnnotationTask, annotator_id: str
    ) -> dict[str, list[dict]]:
        out: dict[str, list[dict]] = {}
        if session.round is Round.ONE:
            return out
        disagreement_candidates = {
            cand for (tid, cand) in session.disagreements if tid == task.task_id
        }
        for cand_id in disagreement_candidates:
            peer_notes = []
            for peer in session.annotators:
                if peer == annotator_id:
                    continue
                for round_ in (Round.TWO, Round.ONE):
                    rec = session.live_label(task.task_id, peer, cand_id, round_)
                    if rec is not None and rec.explanation:
                        peer_notes.append(
                            {"label": rec.label.value, "explanation": rec.explanation}
                        )
                        break
            if peer_notes:
                out[cand_id] = peer_notes
        return out

    def task_view(self, session_id: str, annotator_id: str, task_id: str) -> dict:
        """Annotator-facing view; never contains hidden_source or the peer's
        round-one labels (peer explanations appear only for round-two
        disagreement candidates)."""
        session = self.session(session_id)
        self._check_member(session, annotator_id)
        task = session.task(task_id)
        own_labels = {}
        for cand in task.candidates:
            rec = session.effective_label(task.task_id, annotator_id, cand.candidate_id)
            if rec is not None:
                own_labels[cand.candidate_id] = rec.label.value
        disagreement_candidates = sorted(
            cand for (tid, cand) in session.disagreements if tid == task.task_id
        )
        return {
            "task_id": task.task_id,
            "example_id": task.example_id,
            "question": task.question,
            "schema": task.schema_view,
            "round": session.round.value,
            "candidates": [
                {"candidate_id": c.candidate_id, "sql": c.sql} for c in task.candidates
            ],
            "own_labels": own_labels,
            "disagreement_candidates": disagreement_candidates
            if session.round is not Round.ONE
            else [],
            "peer_explanations": self._peer_explanations(session, task, annotator_id),
        }

    def task_queue(self, session_id: str, annotator_id: str) -> list[dict]:
        session = self.session(session_id)
        self._check_member(session, annotator_id)
        out = []
        disagreement_tasks = {tid for tid, _ in session.disagreements}
        for task in session.tasks:
            labeled = sum(
                1
                for c in task.candidates
                if session.effective_label(task.task_id, annotator_id, c.candidate_id)
            )
            out.append(
                {
                    "task_id": task.task_id,
                    "example_id": task.example_id,
                    "labeled": labeled,
                    "total": len(task.candidates),
                    "disagreement": task.task_id in disagreement_tasks
                    and session.round is not Round.ONE,
                }
            )
        return out

    def submit_label(
        self,
        session_id: str,
        annotator_id: str,
        task_id: str,
        candidate_id: str,
        label: str | Label,
        explanation: str | None = None,
    ) -> dict:
        with self._lock:
            session = self.session(session_id)
            self._check_member(session, annotator_id)
            if session.round is Round.FINALIZED:
                raise SessionFinalized("session is finalized; labels are immutable")
            task = session.task(task_id)
            task.candidate(candidate_id)  # raises UnknownCandidate
            label = Label(label) if isinstance(label, str) else label
            if session.round is Round.TWO:
                if (task_id, candidate_id) not in session.disagreements:
                    raise NotDisagreementTask(
                        f"candidate {candidate_id} of task {task_id} was not "
                        "inconsistent after round one"
                    )
                if not (explanation and explanation.strip()):
                    raise ExplanationRequired(
                        "round-two relabels of disagreement candidates need an explanation"
                    )
            event = {
                "type": "label",
                "session_id": session_id,
                "task_id": task_id,
                "annotator_id": annotator_id,
                "candidate_id": candidate_id,
                "label": label.value,
                "round": session.round.value,
                "explanation": explanation,
                "timestamp": time.time(),
            }
            self._apply(event)
            history = [
                r
                for r in session.labels
                if r.task_id == task_id
                and r.annotator_id == annotator_id
                and r.candidate_id == candidate_id
            ]
            return {"status": "ok", "history_length": len(history)}

    def _round_one_missing(self, session: AnnotationSession) -> list[str]:
        missing = []
        for task in session.tasks:
            for cand in task.candidates:
                for annotator in session.annotators:
                    if session.live_label(task.task_id, annotator, cand.candidate_id, Round.ONE) is None:
                        missing.append(
                            f"{task.task_id}/{cand.candidate_id}/{annotator}"
                        )
        return missing

    def advance_round(self, session_id: str) -> list[str]:
        """Close round one, compute disagreements, open round two; returns the
        ids of tasks with at least one inconsistent candidate."""
        with self._lock:
            session = self.session(session_id)
            if session.round is Round.FINALIZED:
                raise SessionFinalized("session is finalized")
            if session.round is Round.TWO:
                return sorted({tid for tid, _ in session.disagreements})
            missing = self._round_one_missing(session)
            if missing:
                raise RoundIncomplete(
                    f"round one incomplete: {len(missing)} labels missing", missing
                )
            disagreements = []
            for task in session.tasks:
                for cand in task.candidates:
                    labels = {
                        session.live_label(
                            task.task_id, a, cand.candidate_id, Round.ONE
                        ).label
                        for a in session.annotators
                    }
                    if len(labels) > 1:
                        disagreements.append((task.task_id, cand.candidate_id))
            event = {
                "type": "round_advanced",
                "session_id": session_id,
                "disagreements": [list(d) for d in disagreements],
            }
            self._apply(event)
            return sorted({tid for tid, _ in disagreements})

    def finalize(self, session_id: str, skip_unresolved: bool = False) -> dict:
        """Compute per-source accuracy over consistently-labeled tasks; tasks
        still inconsistent are counted, excluded from accuracies, and freeze
        the session."""
        with self._lock:
            session = self.session(session_id)
            if session.round is Round.FINALIZED:
                return session.report
            if session.round is Round.ONE:
                raise RoundIncomplete("advance to round two before finalizing")
            if not skip_unresolved:
                missing = []
                for task_id, cand_id in session.disagreements:
                    for annotator in session.annotators:
                        if session.live_label(task_id, annotator, cand_id, Round.TWO) is None:
                            missing.append(f"{task_id}/{cand_id}/{annotator}")
                if missing:
                    raise RoundIncomplete(
                        f"round two incomplete: {len(missing)} relabels missing "
                        "(finalize with skip_unresolved to count them as inconsistent)",
                        missing,
                    )
            report = _accuracy_report(session)
            event = {"type": "finalized", "session_id": session_id, "report": report}
            self._apply(event)
            return report


def _accuracy_report(session: AnnotationSession) -> dict:
    inconsistent_tasks: set[str] = set()
    for task in session.tasks:
        for cand in task.candidates:
            labels = set()
            for annotator in session.annotators:
                rec = session.effective_label(task.task_id, annotator, cand.candidate_id)
                labels.add(None if rec is None else rec.label)
            if len(labels) > 1 or None in labels:
                inconsistent_tasks.add(task.task_id)

    per_source: dict[str, dict[str, int]] = {}
    for task in session.tasks:
        if task.task_id in inconsistent_tasks:
            continue
        for cand in task.candidates:
            rec = session.effective_label(
                task.task_id, session.annotators[0], cand.candidate_id
            )
            stats = per_source.setdefault(cand.hidden_source, {"correct": 0, "resolved": 0})
            stats["resolved"] += 1
            if rec.label is Label.CORRECT:
                stats["correct"] += 1

    accuracies = {
        source: round(100.0 * s["correct"] / s["resolved"], 1) if s["resolved"] else None
        for source, s in sorted(per_source.items())
    }
    return {
        "accuracies": accuracies,
        "resolved_counts": {s: per_source[s]["resolved"] for s in per_source},
        "inconsistent_count": len(inconsistent_tasks),
        "task_count": len(session.tasks),
    }


def _session_from_event(event: dict) -> AnnotationSession:
    tasks = [
        AnnotationTask(
            task_id=t["task_id"],
            example_id=t["example_id"],
            question=t["question"],
            schema_view=t["schema_view"],
            candidates=[
                Candidate(
                    candidate_id=c["candidate_id"],
                    sql=c["sql"],
                    hidden_source=c["hidden_source"],
                )
                for c in t["candidates"]
            ],
        )
        for t in event["tasks"]
    ]
    return AnnotationSession(
        session_id=event["session_id"],
        tasks=tasks,
        annotators=list(event["annotators"]),
        seed=event["seed"],
        tokens=dict(event["tokens"]),
    )


def examples_from_corpus(corpus) -> dict[str, dict]:
    """Adapt a Corpus into the service's example provider shape."""
    out = {}
    for entry in corpus.entries:
        schema = corpus.schemas.get(entry.example.database_id)
        out[entry.example.example_id] = {
            "question": entry.example.question,
            "schema_view": schema.summary() if schema else {},
        }
    return out
