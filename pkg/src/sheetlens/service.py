"""Stateless-per-request HTTP analysis service.

Sessions are upload-only snapshots: a workbook plus its prebuilt graph,
keyed by an opaque id and expired after an idle timeout. Every analysis is
read-only, so concurrent requests on one session are safe. Analyze
responses reuse the CLI's exact serialization path, byte for byte.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse

from . import analysis, jsontext, report
from .depgraph import DepGraph, build_graph
from .errors import SheetLensError
from .workbook import Workbook, dump_json, load_grid, load_json

DEFAULT_IDLE_TIMEOUT = 3600.0


@dataclass
class Session:
    id: str
    workbook: Workbook
    graph: DepGraph
    created: float
    last_access: float


class SessionStore:
    """Thread-safe id -> session map with idle expiry on access."""

    def __init__(self, idle_timeout: float, clock: Callable[[], float]):
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self.idle_timeout = idle_timeout
        self.clock = clock

    def put(self, wb: Workbook, graph: DepGraph) -> Session:
        now = self.clock()
        with self._lock:
            while True:
                sid = secrets.token_hex(8)
                if sid not in self._sessions:
                    break
            session = Session(sid, wb, graph, now, now)
            self._sessions[sid] = session
            return session

    def get(self, sid: str) -> Session | None:
        now = self.clock()
        with self._lock:
            session = self._sessions.get(sid)
            if session is None:
                return None
            if now - session.last_access > self.idle_timeout:
                del self._sessions[sid]
                return None
            session.last_access = now
            return session


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> Response:
    body = jsontext.dumps({"code": code, "message": message}) + "\n"
    return Response(content=body, status_code=status, media_type="application/json")


def _json_response(payload: object, status: int = 200) -> Response:
    return Response(
        content=jsontext.dumps(payload) + "\n",
        status_code=status,
        media_type="application/json",
    )


def create_app(
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
    clock: Callable[[], float] = time.monotonic,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="sheetlens", docs_url=None, redoc_url=None)
    store = SessionStore(idle_timeout, clock)
    app.state.sessions = store

    @app.exception_handler(_ApiError)
    async def _api_error(_request: Request, exc: _ApiError) -> Response:
        return _error_response(exc.status, exc.code, exc.message)

    def _session_or_404(sid: str) -> Session:
        session = store.get(sid)
        if session is None:
            raise _ApiError(404, "UNKNOWN_WORKBOOK", f"no live workbook with id {sid!r}")
        return session

    @app.post("/api/workbooks")
    async def upload(request: Request) -> Response:
        body = await request.body()
        content_type = request.headers.get("content-type", "")
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            raise _ApiError(400, "FORMAT_ERROR", "body is not valid UTF-8")
        try:
            if "json" in content_type:
                wb = load_json(text)
            else:
                wb = load_grid(text)
        except SheetLensError as exc:
            raise _ApiError(400, exc.code, str(exc))
        graph = build_graph(wb)
        session = store.put(wb, graph)
        bounds = wb.used_bounds()
        return _json_response(
            {
                "id": session.id,
                "sheets": [s.name for s in wb.sheets],
                "bounds": bounds.text(wb.default_sheet) if bounds else "",
            }
        )

    @app.get("/api/workbooks/{sid}")
    async def get_workbook(sid: str) -> Response:
        session = _session_or_404(sid)
        return Response(
            content=dump_json(session.workbook), media_type="application/json"
        )

    def _analyze(session: Session, payload: dict) -> Response:
        wb, graph = session.workbook, session.graph
        tool = payload.get("tool")
        if not isinstance(tool, str):
            raise _ApiError(400, "BAD_REQUEST", 'request needs a "tool" name')
        depth = payload.get("depth")
        if depth in (None, "all"):
            depth = None
        elif not isinstance(depth, int) or isinstance(depth, bool) or depth < 1:
            raise _ApiError(400, "BAD_REQUEST", 'depth must be a positive integer or "all"')
        checks = payload.get("checks")
        if isinstance(checks, str):
            checks = checks.split(",")
        elif checks is not None and not (
            isinstance(checks, list) and all(isinstance(c, str) for c in checks)
        ):
            raise _ApiError(400, "BAD_REQUEST", "checks must be a list of names")
        try:
            region = payload.get("region")
            block = payload.get("block")
            doc = analysis.build_document(
                wb,
                graph,
                tool,
                region=None if region is None else _parse_region(region, graph),
                block=None if block is None else _parse_region(block, graph),
                depth=depth,
                checks=checks,
            )
        except analysis.UsageError as exc:
            raise _ApiError(400, "BAD_REQUEST", str(exc))
        except SheetLensError as exc:
            raise _ApiError(400, exc.code, str(exc))
        status = 200
        if tool == "level_overlay" and analysis.has_cycle_diagnostic(doc):
            status = 409
        return Response(
            content=report.to_json(doc), status_code=status, media_type="application/json"
        )

    @app.post("/api/workbooks/{sid}/analyze")
    async def analyze(sid: str, request: Request) -> Response:
        session = _session_or_404(sid)
        try:
            payload = await request.json()
        except Exception:
            raise _ApiError(400, "BAD_REQUEST", "body must be a JSON object")
        if not isinstance(payload, dict):
            raise _ApiError(400, "BAD_REQUEST", "body must be a JSON object")
        return _analyze(session, payload)

    @app.get("/api/workbooks/{sid}/diagnostics")
    async def diagnostics(sid: str, checks: str | None = None, block: str | None = None) -> Response:
        session = _session_or_404(sid)
        payload: dict = {"tool": "lint"}
        if checks is not None:
            payload["checks"] = checks
        if block is not None:
            payload["block"] = block
        return _analyze(session, payload)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/", include_in_schema=False)
        async def index() -> HTMLResponse:
            return HTMLResponse(
                "<!doctype html><title>sheetlens</title>"
                "<p>sheetlens analysis service is running. POST a grid or workbook"
                " JSON document to <code>/api/workbooks</code> to begin.</p>"
            )

    return app


def _parse_region(text: object, graph: DepGraph):
    from .addressing import parse_region

    if not isinstance(text, str):
        raise _ApiError(400, "BAD_REQUEST", "region/block must be A1 text")
    try:
        return parse_region(text, graph.default_sheet)
    except SheetLensError as exc:
        raise _ApiError(400, exc.code, str(exc))
