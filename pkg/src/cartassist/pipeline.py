"""The five-stage interaction pipeline: Listening, Capture, Processing,
Navigation and Speaking.

Stages are independently schedulable units that exchange immutable messages;
the pipeline ships with two schedulers.  The synchronous one runs stages in a
fixed scan order on one thread and is fully deterministic, which is what the
golden-trace tests pin down.  The threaded one gives every stage its own
worker and bounded inbox (puts block, so backpressure reaches the event
source and nothing is ever dropped); because at most one response cycle is in
flight, its traces match the synchronous ones up to timestamps.

Every response cycle ends back in Listening.  Stage failures are converted to
spoken apology sentences: the user interface is audio, so an error that says
nothing would strand the user.
"""

from __future__ import annotations

import queue
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .audio import (
    DEFAULT_HANGOVER_MS,
    DEFAULT_TIMEOUT_MS,
    AudioFrame,
    EnergyVoiceDetector,
    VoiceDetector,
    record_until_silence,
    scripted_utterance_frames,
)
from .clients import CapturedImage, Clock, ExternalClients, VirtualClock
from .errors import EmptyUtterance, NoPath, ProviderFailure, StreamClosed, UnknownMarker
from .events import (
    ButtonEvent,
    ButtonVariant,
    CueProcessing,
    CueRecordingStarted,
    ImagesCaptured,
    InputEvent,
    PipelineEvent,
    SpeechSegment,
    Stage,
    StateChanged,
    Transcript,
    UtteranceEvent,
    format_trace,
)
from .intent import General, Intent, Navigate, ProductInfo, classify_intent
from .localization import LocalizationTracker, MarkerObservation
from .navigation import Instruction, RoutePlan, astar, moves_to_instructions, path_to_moves, rephrase_instructions
from .search import Candidates, ExactMatch, NoMatch, ProductIndex, search
from .store import Store
from .templates import Phrasebook, format_price, number_word

DEFAULT_MAX_SEGMENT_CHARS = 200
DEFAULT_CHOICE_TIMEOUT_S = 30.0

STAGE_ORDER = ("listening", "capture", "processing", "navigation", "speaking")


def segment_for_speech(text: str, max_chars: int = DEFAULT_MAX_SEGMENT_CHARS) -> list[str]:
    """Split a response into playback segments.

    Sentences split at terminator runs; any sentence longer than max_chars is
    cut at the last word boundary before the limit (hard cut only for a
    single unbroken word).  Joining the segments reproduces the original text
    modulo the whitespace that separated them.
    """
    if not text.strip():
        return []
    sentences: list[str] = []
    start = 0
    i = 0
    while i < len(text):
        if text[i] in ".!?":
            while i + 1 < len(text) and text[i + 1] in ".!?":
                i += 1
            # a terminator mid-token ("$0.98", "v1.2") does not end a sentence
            if i + 1 >= len(text) or text[i + 1].isspace():
                sentences.append(text[start : i + 1])
                start = i + 1
        i += 1
    if start < len(text):
        sentences.append(text[start:])

    segments: list[str] = []
    for sentence in sentences:
        sentence = sentence.strip()
        while len(sentence) > max_chars:
            boundary = None
            for match in re.finditer(r"\s+", sentence[: max_chars + 1]):
                boundary = match
            if boundary is None:
                segments.append(sentence[:max_chars])
                sentence = sentence[max_chars:].lstrip()
            else:
                segments.append(sentence[: boundary.start()].rstrip())
                sentence = sentence[boundary.end() :].lstrip()
        if sentence:
            segments.append(sentence)
    return segments


@dataclass
class StageLatencies:
    capture_s: float = 0.0
    transcribe_s: float = 0.0
    process_s: float = 0.0
    synthesize_s: float = 0.0


@dataclass
class ResponseRecord:
    """What one button press produced, for the harness, service and tests."""

    trigger: str
    kind: str = ""
    transcript: str | None = None
    intent: Intent | None = None
    spoken_text: str = ""
    segments: list[str] = field(default_factory=list)
    product_id: str | None = None
    candidates: list[tuple[str, float]] = field(default_factory=list)
    route: RoutePlan | None = None
    instructions: list[Instruction] = field(default_factory=list)
    target_section: str | None = None
    announced_marker: int | None = None
    error_code: str | None = None
    latencies: StageLatencies = field(default_factory=StageLatencies)


@dataclass
class RunResult:
    trace: list[PipelineEvent]
    records: list[ResponseRecord]

    def trace_text(self, include_time: bool = False) -> str:
        return format_trace(self.trace, include_time)


# Internal stage-to-stage messages.


@dataclass(frozen=True)
class _CaptureTask:
    kind: str  # voice | images | markers
    record: ResponseRecord
    typed_text: str | None = None
    prompt_text: str | None = None
    announce_cue: bool = True


@dataclass(frozen=True)
class _ProcessVoice:
    transcript: str
    record: ResponseRecord


@dataclass(frozen=True)
class _ProcessImages:
    images: tuple[CapturedImage, ...]
    record: ResponseRecord
    prompt_text: str | None = None
    announce_cue: bool = True


@dataclass(frozen=True)
class _ProcessMarker:
    marker_id: int | None
    record: ResponseRecord


@dataclass(frozen=True)
class _ProcessFailure:
    error_code: str
    record: ResponseRecord


@dataclass(frozen=True)
class _PlanRoute:
    shelf_id: str
    section_name: str
    record: ResponseRecord


@dataclass(frozen=True)
class _Speak:
    text: str
    record: ResponseRecord


@dataclass(frozen=True)
class _CycleDone:
    record: ResponseRecord


@dataclass
class _PendingChoice:
    mode: str  # product | navigate
    candidates: list[tuple[str, float]]
    created_s: float


class _PrimedRecognizer:
    """Recognizer stand-in that yields a typed utterance."""

    def __init__(self, text: str):
        self._text = text

    def transcribe(self, clip: Sequence[AudioFrame]) -> str:
        return self._text


class PipelineCore:
    """Shared state and per-stage behavior; schedulers only move messages."""

    def __init__(
        self,
        store: Store,
        index: ProductIndex,
        tracker: LocalizationTracker,
        clients: ExternalClients,
        clock: Clock | None = None,
        phrasebook: Phrasebook | None = None,
        *,
        marker_feed: Callable[[], list[MarkerObservation]] | None = None,
        image_source: Callable[[], list[CapturedImage]] | None = None,
        frame_source: Callable[[], Iterable[AudioFrame]] | None = None,
        vad: VoiceDetector | None = None,
        search_threshold: float = 0.90,
        max_segment_chars: int = DEFAULT_MAX_SEGMENT_CHARS,
        choice_timeout_s: float = DEFAULT_CHOICE_TIMEOUT_S,
        hangover_ms: float = DEFAULT_HANGOVER_MS,
        timeout_ms: float = DEFAULT_TIMEOUT_MS,
        cell_size_m: float = 0.5,
        currency_symbol: str = "$",
        currency_decimals: int = 2,
        utterance_via_vad: bool = False,
        classify_with_responder: bool = False,
        rephrase_with_responder: bool = False,
    ):
        self.store = store
        self.index = index
        self.tracker = tracker
        self.clients = clients
        self.clock = clock or VirtualClock()
        self.phrasebook = phrasebook or Phrasebook()
        self.marker_feed = marker_feed or (lambda: [])
        self.image_source = image_source or self._default_images
        self.frame_source = frame_source or (lambda: iter(scripted_utterance_frames()))
        self.vad = vad or EnergyVoiceDetector()
        self.search_threshold = search_threshold
        self.max_segment_chars = max_segment_chars
        self.choice_timeout_s = choice_timeout_s
        self.hangover_ms = hangover_ms
        self.timeout_ms = timeout_ms
        self.cell_size_m = cell_size_m
        self.currency_symbol = currency_symbol
        self.currency_decimals = currency_decimals
        self.utterance_via_vad = utterance_via_vad
        self.classify_with_responder = classify_with_responder
        self.rephrase_with_responder = rephrase_with_responder

        self.trace: list[PipelineEvent] = []
        self._listeners: list[Callable[[PipelineEvent], None]] = []
        self._trace_lock = threading.Lock()
        self._pending: _PendingChoice | None = None
        self.current_stage = Stage.LISTENING

    @staticmethod
    def _default_images() -> list[CapturedImage]:
        return [CapturedImage(camera, "no camera attached") for camera in ("left", "front", "right")]

    def add_listener(self, listener: Callable[[PipelineEvent], None]) -> None:
        self._listeners.append(listener)

    def emit(self, event: PipelineEvent) -> None:
        with self._trace_lock:
            self.trace.append(event)
            if isinstance(event, StateChanged):
                self.current_stage = event.stage
            listeners = list(self._listeners)
        for listener in listeners:
            listener(event)

    def _now(self) -> float:
        return self.clock.now()

    # ---- stage handlers ------------------------------------------------

    def handle_listening(self, event: InputEvent):
        if isinstance(event, ButtonEvent):
            record = ResponseRecord(trigger=event.variant.value)
            self.emit(StateChanged(Stage.CAPTURING, self._now()))
            if event.variant is ButtonVariant.ENVIRONMENT_DESCRIPTION:
                return [("capture", _CaptureTask("images", record))]
            if event.variant is ButtonVariant.VOICE_COMMAND:
                return [("capture", _CaptureTask("voice", record))]
            return [("capture", _CaptureTask("markers", record))]
        record = ResponseRecord(trigger="Utterance")
        self.emit(StateChanged(Stage.CAPTURING, self._now()))
        return [("capture", _CaptureTask("voice", record, typed_text=event.text))]

    def handle_capture(self, task: _CaptureTask):
        record = task.record
        started = self._now()
        if task.kind == "voice":
            self.emit(CueRecordingStarted(self._now()))
            if task.typed_text is not None and not self.utterance_via_vad:
                transcript = task.typed_text
                record.latencies.capture_s += self._now() - started
            else:
                if task.typed_text is None:
                    frames, recognizer = self.frame_source(), self.clients.recognizer
                else:
                    frames, recognizer = iter(scripted_utterance_frames()), _PrimedRecognizer(task.typed_text)
                try:
                    clip = record_until_silence(
                        frames, self.vad, hangover_ms=self.hangover_ms, timeout_ms=self.timeout_ms
                    )
                except (EmptyUtterance, StreamClosed):
                    record.latencies.capture_s += self._now() - started
                    return [("processing", _ProcessFailure("empty_utterance", record))]
                recorded = self._now()
                record.latencies.capture_s += recorded - started
                transcript = recognizer.transcribe(clip)
                record.latencies.transcribe_s += self._now() - recorded
            if not transcript.strip():
                return [("processing", _ProcessFailure("empty_utterance", record))]
            record.transcript = transcript
            self.emit(Transcript(transcript, self._now()))
            return [("processing", _ProcessVoice(transcript, record))]
        if task.kind == "images":
            images = tuple(self.image_source())
            self.emit(ImagesCaptured(len(images), self._now()))
            record.latencies.capture_s += self._now() - started
            return [
                (
                    "processing",
                    _ProcessImages(images, record, prompt_text=task.prompt_text, announce_cue=task.announce_cue),
                )
            ]
        marker = self.tracker.select_announcement(self.marker_feed(), self._now())
        record.latencies.capture_s += self._now() - started
        return [("processing", _ProcessMarker(marker, record))]

    def handle_processing(self, msg):
        if isinstance(msg, _ProcessVoice):
            return self._process_voice(msg)
        if isinstance(msg, _ProcessImages):
            return self._process_images(msg)
        if isinstance(msg, _ProcessMarker):
            return self._process_marker(msg)
        if isinstance(msg, _ProcessFailure):
            return self._process_failure(msg)
        raise TypeError(f"unexpected processing message {msg!r}")

    def _process_voice(self, msg: _ProcessVoice):
        record = msg.record
        self.emit(StateChanged(Stage.PROCESSING, self._now()))
        self.emit(CueProcessing(self._now()))
        started = self._now()

        pending_route = self._try_pending_choice(msg.transcript, record)
        if pending_route is not None:
            record.latencies.process_s += self._now() - started
            return pending_route

        responder = self.clients.responder if self.classify_with_responder else None
        intent = classify_intent(msg.transcript, responder)
        record.intent = intent

        if isinstance(intent, ProductInfo):
            routes = self._dispatch_product(intent.query_text, record)
        elif isinstance(intent, Navigate):
            routes = self._dispatch_navigate(intent.target_text, record)
        else:
            routes = self._dispatch_general(intent, record)
        record.latencies.process_s += self._now() - started
        return routes

    def _try_pending_choice(self, transcript: str, record: ResponseRecord):
        pending = self._pending
        if pending is None:
            return None
        if self._now() - pending.created_s > self.choice_timeout_s:
            self._pending = None
            return None
        normalized = " ".join(re.sub(r"[?!.,]+", " ", transcript.lower()).split())
        ordinal = re.fullmatch(r"(?:option\s+)?(one|two|three|1|2|3)", normalized)
        chosen: int | None = None
        if ordinal:
            n = {"one": 1, "two": 2, "three": 3}.get(ordinal.group(1)) or int(ordinal.group(1))
            if n > len(pending.candidates):
                self._pending = None
                record.kind = "choice_invalid"
                return [("speaking", _Speak(self.phrasebook.render("choice_invalid"), record))]
            chosen = n - 1
        else:
            labels = [self._candidate_label(pid).lower() for pid, _ in pending.candidates]
            hits = [i for i, label in enumerate(labels) if normalized in label or label in normalized]
            if len(hits) == 1:
                chosen = hits[0]
        if chosen is None:
            self._pending = None  # not a choice: classify it normally
            return None
        product_id = pending.candidates[chosen][0]
        self._pending = None
        record.kind = "choice"
        record.product_id = product_id
        if pending.mode == "navigate":
            shelf = self.store.shelves[self.store.products[product_id].shelf_id]
            return [("navigation", _PlanRoute(shelf.shelf_id, shelf.section_name, record))]
        return [("speaking", _Speak(self._product_sentence(product_id), record))]

    def _dispatch_product(self, query_text: str, record: ResponseRecord):
        outcome = search(query_text, self.index, self.search_threshold)
        if isinstance(outcome, ExactMatch):
            record.kind = "product_exact"
            record.product_id = outcome.product_id
            return [("speaking", _Speak(self._product_sentence(outcome.product_id), record))]
        if isinstance(outcome, Candidates):
            record.kind = "product_candidates"
            record.candidates = list(outcome.items)
            self._pending = _PendingChoice("product", list(outcome.items), self._now())
            return [("speaking", _Speak(self._candidates_sentence(outcome.items), record))]
        record.kind = "product_no_match"
        return [("speaking", _Speak(self.phrasebook.render("no_match"), record))]

    def _dispatch_navigate(self, target_text: str, record: ResponseRecord):
        shelf = self.store.shelf_by_section(target_text)
        if shelf is not None:
            return [("navigation", _PlanRoute(shelf.shelf_id, shelf.section_name, record))]
        outcome = search(target_text, self.index, self.search_threshold)
        if isinstance(outcome, ExactMatch):
            record.product_id = outcome.product_id
            target = self.store.shelves[self.store.products[outcome.product_id].shelf_id]
            return [("navigation", _PlanRoute(target.shelf_id, target.section_name, record))]
        if isinstance(outcome, Candidates):
            record.kind = "navigate_candidates"
            record.candidates = list(outcome.items)
            self._pending = _PendingChoice("navigate", list(outcome.items), self._now())
            return [("speaking", _Speak(self._candidates_sentence(outcome.items), record))]
        record.kind = "navigate_no_match"
        return [("speaking", _Speak(self.phrasebook.render("no_match"), record))]

    def _dispatch_general(self, intent: General, record: ResponseRecord):
        record.kind = "general"
        if intent.wants_images:
            return [
                (
                    "capture",
                    _CaptureTask("images", record, prompt_text=intent.query_text, announce_cue=False),
                )
            ]
        try:
            reply = self.clients.responder.respond(intent.query_text)
        except ProviderFailure:
            record.error_code = "responder_failure"
            reply = self.phrasebook.render("apology")
        return [("speaking", _Speak(reply, record))]

    def _process_images(self, msg: _ProcessImages):
        record = msg.record
        if msg.announce_cue:
            self.emit(StateChanged(Stage.PROCESSING, self._now()))
            self.emit(CueProcessing(self._now()))
            record.kind = "environment"
        started = self._now()
        prompt = msg.prompt_text or self.phrasebook.render("environment_prompt")
        try:
            reply = self.clients.responder.respond(prompt, msg.images)
        except ProviderFailure:
            record.error_code = "responder_failure"
            reply = self.phrasebook.render("apology")
        record.latencies.process_s += self._now() - started
        return [("speaking", _Speak(reply, record))]

    def _process_marker(self, msg: _ProcessMarker):
        record = msg.record
        self.emit(StateChanged(Stage.PROCESSING, self._now()))
        record.kind = "section"
        if msg.marker_id is None:
            return [("speaking", _Speak(self.phrasebook.render("no_section"), record))]
        try:
            section = self.store.section_of_marker(msg.marker_id)
        except UnknownMarker:
            record.error_code = "unknown_marker"
            return [("speaking", _Speak(self.phrasebook.render("unknown_marker"), record))]
        record.announced_marker = msg.marker_id
        return [("speaking", _Speak(self.phrasebook.render("section_announcement", section=section), record))]

    def _process_failure(self, msg: _ProcessFailure):
        record = msg.record
        self.emit(StateChanged(Stage.PROCESSING, self._now()))
        record.kind = "error"
        record.error_code = msg.error_code
        key = "empty_utterance" if msg.error_code == "empty_utterance" else "apology"
        return [("speaking", _Speak(self.phrasebook.render(key), record))]

    def handle_navigation(self, msg: _PlanRoute):
        record = msg.record
        self.emit(StateChanged(Stage.NAVIGATING, self._now()))
        started = self._now()
        record.target_section = msg.section_name
        try:
            pose = self.tracker.pose_estimate(self.store)
        except UnknownMarker:
            record.error_code = "unknown_marker"
            record.kind = "navigate_no_pose"
            return [("speaking", _Speak(self.phrasebook.render("no_pose"), record))]
        if pose is None:
            record.kind = "navigate_no_pose"
            return [("speaking", _Speak(self.phrasebook.render("no_pose"), record))]
        goal = self.store.shelves[msg.shelf_id].approach_cell
        try:
            plan = astar(self.store.map, pose.cell, goal)
        except NoPath:
            record.kind = "navigate_no_route"
            return [("speaking", _Speak(self.phrasebook.render("no_route"), record))]
        moves = path_to_moves(plan, pose.heading)
        instructions = moves_to_instructions(
            moves,
            self.store.map,
            self.phrasebook,
            start_cell=pose.cell,
            start_heading=pose.heading,
            destination_section=msg.section_name,
            cell_size_m=self.cell_size_m,
        )
        if self.rephrase_with_responder:
            instructions = rephrase_instructions(instructions, self.clients.responder)
        record.kind = "navigate"
        record.route = plan
        record.instructions = instructions
        record.latencies.process_s += self._now() - started
        return [("speaking", _Speak(" ".join(i.text for i in instructions), record))]

    def handle_speaking(self, msg: _Speak):
        record = msg.record
        self.emit(StateChanged(Stage.SPEAKING, self._now()))
        started = self._now()
        segments = segment_for_speech(msg.text, self.max_segment_chars)
        for seq, segment in enumerate(segments, start=1):
            try:
                self.clients.synthesizer.synthesize(segment)
            except ProviderFailure:
                pass  # the segment still reaches the trace; audio quality is out of scope
            self.emit(SpeechSegment(segment, seq, self._now()))
        record.spoken_text = msg.text
        record.segments = segments
        record.latencies.synthesize_s += self._now() - started
        self.emit(StateChanged(Stage.LISTENING, self._now()))
        return [("done", _CycleDone(record))]

    # ---- sentence builders ---------------------------------------------

    def _candidate_label(self, product_id: str) -> str:
        product = self.store.products[product_id]
        parts = [p for p in (product.name, product.brand, product.variety) if p.strip()]
        return ", ".join(parts)

    def _product_sentence(self, product_id: str) -> str:
        product = self.store.products[product_id]
        target = self.store.product_target(product_id)
        return self.phrasebook.render(
            "product_found",
            name=product.name,
            shelf=target.shelf_id,
            row=number_word(target.row_from_top),
            col=number_word(target.col_from_left),
            price=format_price(target.price, self.currency_symbol, self.currency_decimals),
        )

    def _candidates_sentence(self, items) -> str:
        parts = [self.phrasebook.render("candidates_intro", count=number_word(len(items)))]
        for number, (product_id, _) in enumerate(items, start=1):
            parts.append(
                self.phrasebook.render(
                    "candidate_item", number=number_word(number), label=self._candidate_label(product_id)
                )
            )
        parts.append(self.phrasebook.render("candidates_outro"))
        return " ".join(parts)

    # ---- shared dispatch wrapper ----------------------------------------

    def safe_handle(self, stage: str, msg):
        handler = {
            "listening": self.handle_listening,
            "capture": self.handle_capture,
            "processing": self.handle_processing,
            "navigation": self.handle_navigation,
            "speaking": self.handle_speaking,
        }[stage]
        try:
            return handler(msg)
        except Exception:
            record = getattr(msg, "record", None)
            if record is None:
                record = ResponseRecord(trigger="unknown")
            record.kind = "error"
            record.error_code = record.error_code or "internal_error"
            if stage == "speaking":
                self.emit(StateChanged(Stage.LISTENING, self._now()))
                return [("done", _CycleDone(record))]
            return [("speaking", _Speak(self.phrasebook.render("apology"), record))]


class SyncPipeline:
    """Deterministic single-threaded scheduler: scan stages in fixed order."""

    def __init__(self, core: PipelineCore):
        self.core = core
        self._inboxes: dict[str, deque] = {name: deque() for name in STAGE_ORDER}
        self._started = False

    def start(self) -> None:
        if not self._started:
            self._started = True
            self.core.emit(StateChanged(Stage.LISTENING, self.core.clock.now()))

    def submit(self, event: InputEvent) -> ResponseRecord:
        self.start()
        self._inboxes["listening"].append(event)
        records = self._drain()
        return records[-1]

    def run(self, events: Iterable[InputEvent]) -> RunResult:
        self.start()
        records: list[ResponseRecord] = []
        for event in events:
            records.append(self.submit(event))
        return RunResult(self.core.trace, records)

    def _drain(self) -> list[ResponseRecord]:
        done: list[ResponseRecord] = []
        while True:
            for name in STAGE_ORDER:
                if self._inboxes[name]:
                    msg = self._inboxes[name].popleft()
                    for dest, out in self.core.safe_handle(name, msg):
                        if dest == "done":
                            done.append(out.record)
                        else:
                            self._inboxes[dest].append(out)
                    break
            else:
                return done


_STOP = object()


class ThreadedPipeline:
    """One worker thread per stage over bounded queues.

    Only one response cycle is in flight at a time (the pump waits for the
    cycle-done signal before feeding the next event), so event traces are
    identical to the synchronous scheduler's up to timestamps.
    """

    def __init__(self, core: PipelineCore, queue_size: int = 8):
        self.core = core
        self._queues: dict[str, queue.Queue] = {name: queue.Queue(maxsize=queue_size) for name in STAGE_ORDER}
        self._done: queue.Queue = queue.Queue()
        self._threads: list[threading.Thread] = []

    def _worker(self, name: str) -> None:
        inbox = self._queues[name]
        while True:
            msg = inbox.get()
            if msg is _STOP:
                return
            for dest, out in self.core.safe_handle(name, msg):
                if dest == "done":
                    self._done.put(out)
                else:
                    self._queues[dest].put(out)  # blocking put: backpressure, never drop

    def run(self, events: Iterable[InputEvent], cycle_timeout_s: float = 30.0) -> RunResult:
        self._threads = [
            threading.Thread(target=self._worker, args=(name,), daemon=True, name=f"stage-{name}")
            for name in STAGE_ORDER
        ]
        for thread in self._threads:
            thread.start()
        self.core.emit(StateChanged(Stage.LISTENING, self.core.clock.now()))
        records: list[ResponseRecord] = []
        try:
            for event in events:
                self._queues["listening"].put(event)
                records.append(self._done.get(timeout=cycle_timeout_s).record)
        finally:
            for name in STAGE_ORDER:
                self._queues[name].put(_STOP)
            for thread in self._threads:
                thread.join(timeout=5.0)
        return RunResult(self.core.trace, records)


def run_pipeline(core: PipelineCore, events: Sequence[InputEvent], scheduler: str = "sync") -> RunResult:
    """Run a scripted event sequence to completion and return its trace."""
    if scheduler == "sync":
        return SyncPipeline(core).run(events)
    if scheduler == "threaded":
        return ThreadedPipeline(core).run(events)
    raise ValueError(f"unknown scheduler {scheduler!r}")
