"""HTTP service exposing the session to the cockpit and other clients.

Endpoints:
    GET  /store         canonical store document (round-trips the serializer)
    GET  /store/layout  structured layout for map rendering
    GET  /state         pose, localization memory, stage, active route
    POST /move          {"command": "MoveForward" | "RotateLeft" | "RotateRight"}
    POST /button        {"variant": "EnvironmentDescription" | "VoiceCommand" | "SectionDescription"}
    POST /utterance     {"text": "..."}  typed stand-in for the microphone
    GET  /events        server-sent events; each data payload is one trace line

The service adds no behavior of its own: every route delegates to the same
Session entry points the in-process harness uses, so API-driven traces equal
in-process traces.  Event-stream messages carry sequence ids and the stream
resumes from Last-Event-ID (or ?after=N) on reconnect.
"""

from __future__ import annotations

import queue
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import CartAssistError
from .events import ButtonVariant
from .session import Session
from .simulator import Command
from .store import CellKind, save_store


class PoseModel(BaseModel):
    x: int
    y: int
    heading: str


class MoveRequest(BaseModel):
    command: Command


class MoveResponse(BaseModel):
    pose: PoseModel
    bumped: bool


class ButtonRequest(BaseModel):
    variant: ButtonVariant


class UtteranceRequest(BaseModel):
    text: str = Field(min_length=1)


class LatencyModel(BaseModel):
    capture_s: float
    transcribe_s: float
    process_s: float
    synthesize_s: float


class InteractionResponse(BaseModel):
    trigger: str
    kind: str
    transcript: str | None
    spoken_text: str
    segments: list[str]
    product_id: str | None
    candidates: list[tuple[str, float]]
    route: list[PoseModel] | None
    instruction_texts: list[str]
    target_section: str | None
    announced_marker: int | None
    error_code: str | None
    latencies: LatencyModel


class StateResponse(BaseModel):
    pose: PoseModel
    stage: str
    memory: dict
    route: list[dict]
    time_s: float


def _interaction_response(record) -> InteractionResponse:
    route = None
    if record.route is not None:
        route = [PoseModel(x=x, y=y, heading="") for x, y in record.route.cells]
    return InteractionResponse(
        trigger=record.trigger,
        kind=record.kind,
        transcript=record.transcript,
        spoken_text=record.spoken_text,
        segments=record.segments,
        product_id=record.product_id,
        candidates=record.candidates,
        route=route,
        instruction_texts=[i.text for i in record.instructions],
        target_section=record.target_section,
        announced_marker=record.announced_marker,
        error_code=record.error_code,
        latencies=LatencyModel(
            capture_s=record.latencies.capture_s,
            transcribe_s=record.latencies.transcribe_s,
            process_s=record.latencies.process_s,
            synthesize_s=record.latencies.synthesize_s,
        ),
    )


def create_app(session: Session, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cartassist", docs_url=None, redoc_url=None)

    @app.exception_handler(CartAssistError)
    async def domain_error(_request: Request, exc: CartAssistError):
        return JSONResponse(status_code=400, content={"code": exc.code, "message": str(exc)})

    @app.get("/store", response_class=PlainTextResponse)
    def get_store() -> str:
        return save_store(session.store)

    @app.get("/store/layout")
    def get_layout() -> dict:
        store = session.store
        kinds = {CellKind.WALKABLE: ".", CellKind.BLOCKED: "#", CellKind.SHELF: "S"}
        rows = [
            "".join(kinds[store.map.kind_at((x, y))] for x in range(store.map.width))
            for y in range(store.map.height)
        ]
        return {
            "width": store.map.width,
            "height": store.map.height,
            "rows": rows,
            "aisle_columns": list(store.map.aisle_columns),
            "shelves": [
                {
                    "shelf_id": s.shelf_id,
                    "section": s.section_name,
                    "cell": {"x": s.shelf_cell[0], "y": s.shelf_cell[1]},
                    "approach": {"x": s.approach_cell[0], "y": s.approach_cell[1]},
                    "facing": s.facing.value,
                }
                for s in sorted(store.shelves.values(), key=lambda s: s.shelf_id)
            ],
            "markers": [
                {"marker_id": m.marker_id, "shelf_id": m.shelf_id}
                for m in sorted(store.markers.values(), key=lambda m: m.marker_id)
            ],
        }

    @app.get("/state", response_model=StateResponse)
    def get_state() -> StateResponse:
        return StateResponse(**session.state_snapshot())

    @app.post("/move", response_model=MoveResponse)
    def post_move(request: MoveRequest) -> MoveResponse:
        result = session.step_cart(request.command)
        pose = PoseModel(x=result.pose.cell[0], y=result.pose.cell[1], heading=result.pose.heading.value)
        return MoveResponse(pose=pose, bumped=result.bumped)

    @app.post("/button", response_model=InteractionResponse)
    def post_button(request: ButtonRequest) -> InteractionResponse:
        return _interaction_response(session.press_button(request.variant))

    @app.post("/utterance", response_model=InteractionResponse)
    def post_utterance(request: UtteranceRequest) -> InteractionResponse:
        return _interaction_response(session.submit_utterance(request.text))

    @app.get("/events")
    def get_events(request: Request, after: int = 0, limit: int = 0, timeout_s: float = 0.0):
        """Server-sent event stream of trace lines and pose changes.

        `limit` and `timeout_s` bound the stream for polling clients and
        tests; the cockpit leaves both at 0 and streams forever.
        """
        last_id = request.headers.get("last-event-id")
        start_after = int(last_id) if last_id and last_id.isdigit() else after

        def stream():
            subscriber, backlog = session.subscribe(after_seq=start_after)
            sent = 0
            try:
                for seq, line in backlog:
                    yield f"id: {seq}\ndata: {line}\n\n"
                    sent += 1
                    if limit and sent >= limit:
                        return
                while True:
                    try:
                        seq, line = subscriber.get(timeout=timeout_s if timeout_s else 1.0)
                    except queue.Empty:
                        if timeout_s:
                            return
                        yield ": keep-alive\n\n"
                        continue
                    yield f"id: {seq}\ndata: {line}\n\n"
                    sent += 1
                    if limit and sent >= limit:
                        return
            finally:
                session.unsubscribe(subscriber)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="cockpit")

    return app
