"""HTTP/JSON API for the annotation service.

Thin FastAPI layer over `AnnotationService`; every error surfaces as
{code, message} with a matching HTTP status. Annotators authenticate with
the bearer token issued at session creation; the sandbox endpoint executes
read-only queries against registered instances.
"""

from __future__ import annotations

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .annotation import AnnotationService
from .errors import (
    AuthError,
    BackendError,
    NotAMember,
    ParseError,
    RoundIncomplete,
    SessionFinalized,
    SqlAuditError,
    UnknownCandidate,
    UnknownExample,
    UnknownTask,
)
from .instances import DbInstance
from .metrics import execute

_STATUS_FOR = {
    AuthError: 401,
    NotAMember: 403,
    UnknownTask: 404,
    UnknownExample: 404,
    UnknownCandidate: 404,
    SessionFinalized: 409,
    RoundIncomplete: 409,
}


class CreateSessionRequest(BaseModel):
    example_ids: list[str]
    candidate_sets: dict[str, dict[str, str]]
    annotators: list[str]
    seed: int = 0
    session_id: str | None = None


class LabelRequest(BaseModel):
    session_id: str
    task_id: str
    candidate_id: str
    label: str
    explanation: str | None = None


class FinalizeRequest(BaseModel):
    skip_unresolved: bool = False


class SandboxRequest(BaseModel):
    sql: str
    instance_id: str


def create_app(
    service: AnnotationService, sandbox: dict[str, DbInstance] | None = None
) -> FastAPI:
    app = FastAPI(title="annotation-service")
    sandbox = sandbox or {}

    @app.exception_handler(SqlAuditError)
    async def _domain_error(request: Request, exc: SqlAuditError):
        status = 400
        for klass, code in _STATUS_FOR.items():
            if isinstance(exc, klass):
                status = code
                break
        code = getattr(exc, "code", type(exc).__name__)
        return JSONResponse(status_code=status, content={"code": code, "message": str(exc)})

    def _bearer(authorization: str | None) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthError("missing bearer token")
        return authorization.removeprefix("Bearer ").strip()

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        session = service.create_session(
            example_ids=req.example_ids,
            candidate_sets=req.candidate_sets,
            annotators=req.annotators,
            seed=req.seed,
            session_id=req.session_id,
        )
        # administrative response: tokens go to the session owner, not into
        # any annotator-facing task payload
        return {
            "session_id": session.session_id,
            "task_ids": [t.task_id for t in session.tasks],
            "tokens": dict(session.tokens),
            "round": session.round.value,
        }

    @app.get("/sessions/{session_id}/tasks")
    def task_queue(
        session_id: str,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        service.authenticate(session_id, annotator, _bearer(authorization))
        return {"tasks": service.task_queue(session_id, annotator)}

    @app.get("/tasks/{task_id}")
    def task_view(
        task_id: str,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        session, _task = service.find_task(task_id)
        service.authenticate(session.session_id, annotator, _bearer(authorization))
        return service.task_view(session.session_id, annotator, task_id)

    @app.post("/labels")
    def submit_label(
        req: LabelRequest,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        service.authenticate(req.session_id, annotator, _bearer(authorization))
        return service.submit_label(
            req.session_id,
            annotator,
            req.task_id,
            req.candidate_id,
            req.label,
            req.explanation,
        )

    @app.post("/sessions/{session_id}/advance")
    def advance(
        session_id: str,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        service.authenticate(session_id, annotator, _bearer(authorization))
        return {"disagreements": service.advance_round(session_id)}

    @app.post("/sessions/{session_id}/finalize")
    def finalize(
        session_id: str,
        req: FinalizeRequest | None = None,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        service.authenticate(session_id, annotator, _bearer(authorization))
        skip = bool(req and req.skip_unresolved)
        return service.finalize(session_id, skip_unresolved=skip)

    @app.get("/sessions/{session_id}/report")
    def report(
        session_id: str,
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        service.authenticate(session_id, annotator, _bearer(authorization))
        session = service.session(session_id)
        if session.report is None:
            raise RoundIncomplete("session is not finalized yet")
        return session.report

    @app.post("/sandbox/execute")
    def sandbox_execute(req: SandboxRequest):
        if req.instance_id not in sandbox:
            raise UnknownExample(req.instance_id)
        try:
            from .parser import parse_sql

            ast = parse_sql(req.sql)  # SELECT-only grammar = read-only sandbox
            table = execute(ast, sandbox[req.instance_id])
        except (ParseError, BackendError) as exc:
            category = getattr(exc, "category", None)
            return JSONResponse(
                status_code=400,
                content={
                    "code": getattr(exc, "code", "parse_error"),
                    "message": str(exc),
                    "category": getattr(category, "value", None),
                },
            )
        return table.to_dict()

    @app.get("/sandbox/instances")
    def sandbox_instances():
        return {"instances": sorted(sandbox.keys())}

    return app
