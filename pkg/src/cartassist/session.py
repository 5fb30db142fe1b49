"""One running assistant: store + simulated world + localization + pipeline.

The session is the single owner of all mutable state.  The HTTP service and
the scenario harness both drive it through the same three entry points
(step_cart, press_button, submit_utterance), which is what makes API traces
identical to in-process traces.  Every pipeline event and pose change is
published to subscribers as a trace line with a monotonically increasing
sequence number so event-stream clients can resume after a reconnect.
"""

from __future__ import annotations

import queue
import threading
from collections import deque

from .clients import ExternalClients, VirtualClock, mock_clients
from .config import Config, parse_start_pose
from .events import ButtonEvent, ButtonVariant, PipelineEvent, UtteranceEvent, trace_line
from .localization import LocalizationTracker
from .audio import EnergyVoiceDetector
from .pipeline import PipelineCore, ResponseRecord, SyncPipeline
from .search import build_index
from .simulator import CartPose, Command, DetectionModel, SimWorld, StepResult
from .store import Store
from .templates import Phrasebook, load_templates

EVENT_BUFFER_SIZE = 1000


def pose_line(pose: CartPose, bumped: bool = False) -> str:
    suffix = " bumped=true" if bumped else ""
    return f"PoseChanged x={pose.cell[0]} y={pose.cell[1]} heading={pose.heading.value}{suffix}"


class Session:
    def __init__(
        self,
        store: Store,
        config: Config | None = None,
        clients: ExternalClients | None = None,
        clock: VirtualClock | None = None,
        start_pose: CartPose | None = None,
    ):
        self.config = config or Config()
        self.clock = clock or VirtualClock()
        self.store = store
        self.clients = clients or mock_clients(self.clock)
        self.index = build_index(store, self.clients.embedder)
        self.tracker = LocalizationTracker(self.config.t_expire_s, self.config.t_repeat_s)
        model = DetectionModel(
            fov_deg=self.config.fov_deg,
            max_range_m=self.config.max_range_m,
            focal_px=self.config.focal_px,
            cell_size_m=self.config.cell_size_m,
        )
        self.world = SimWorld(
            store,
            model,
            self.clock,
            start_pose or parse_start_pose(self.config.start_pose),
            self.config.step_duration_s,
        )
        phrasebook = Phrasebook(load_templates(self.config.templates_path), self.config.locale)
        self.core = PipelineCore(
            store,
            self.index,
            self.tracker,
            self.clients,
            self.clock,
            phrasebook,
            marker_feed=self.world.observe,
            image_source=self.world.capture_images,
            vad=EnergyVoiceDetector(self.config.energy_floor),
            search_threshold=self.config.search_threshold,
            max_segment_chars=self.config.max_segment_chars,
            choice_timeout_s=self.config.choice_timeout_s,
            hangover_ms=self.config.hangover_ms,
            timeout_ms=self.config.timeout_ms,
            cell_size_m=self.config.cell_size_m,
            currency_symbol=self.config.currency_symbol,
            currency_decimals=self.config.currency_decimals,
            utterance_via_vad=self.config.utterance_via_vad,
            classify_with_responder=self.config.classify_with_responder,
            rephrase_with_responder=self.config.rephrase_with_responder,
        )
        self.records: list[ResponseRecord] = []
        self.active_route: list[tuple[int, int]] = []
        self._seq = 0
        self._buffer: deque[tuple[int, str]] = deque(maxlen=EVENT_BUFFER_SIZE)
        self._subscribers: list[queue.Queue] = []
        self._publish_lock = threading.Lock()
        self._mutate_lock = threading.Lock()
        self.core.add_listener(self._on_pipeline_event)
        self.pipeline = SyncPipeline(self.core)
        self.pipeline.start()
        self._ingest()  # cameras run from power-on

    # ---- event publishing -------------------------------------------------

    def _on_pipeline_event(self, event: PipelineEvent) -> None:
        self._publish(trace_line(event))

    def _publish(self, line: str) -> None:
        with self._publish_lock:
            self._seq += 1
            self._buffer.append((self._seq, line))
            subscribers = list(self._subscribers)
        for subscriber in subscribers:
            subscriber.put((self._seq, line))

    def subscribe(self, after_seq: int = 0) -> tuple[queue.Queue, list[tuple[int, str]]]:
        """Register an event-stream consumer; returns (live queue, backlog)."""
        subscriber: queue.Queue = queue.Queue()
        with self._publish_lock:
            backlog = [(seq, line) for seq, line in self._buffer if seq > after_seq]
            self._subscribers.append(subscriber)
        return subscriber, backlog

    def unsubscribe(self, subscriber: queue.Queue) -> None:
        with self._publish_lock:
            if subscriber in self._subscribers:
                self._subscribers.remove(subscriber)

    # ---- interaction entry points ------------------------------------------

    def _ingest(self) -> None:
        self.tracker.ingest_frame(self.world.observe(), self.clock.now())

    def step_cart(self, command: Command) -> StepResult:
        with self._mutate_lock:
            result = self.world.step(command)
            self._ingest()
        self._publish(pose_line(result.pose, result.bumped))
        return result

    def press_button(self, variant: ButtonVariant) -> ResponseRecord:
        with self._mutate_lock:
            self.active_route = []
            record = self.pipeline.submit(ButtonEvent(variant, self.clock.now()))
            self._finish(record)
        return record

    def submit_utterance(self, text: str) -> ResponseRecord:
        with self._mutate_lock:
            self.active_route = []
            record = self.pipeline.submit(UtteranceEvent(text, self.clock.now()))
            self._finish(record)
        return record

    def _finish(self, record: ResponseRecord) -> None:
        self.records.append(record)
        if record.kind == "navigate" and record.route is not None:
            self.active_route = list(record.route.cells)

    # ---- introspection -------------------------------------------------------

    @property
    def query_count(self) -> int:
        return sum(1 for r in self.records if r.trigger == ButtonVariant.VOICE_COMMAND.value)

    def state_snapshot(self) -> dict:
        state = self.tracker.state
        memory = {}
        for side, slot in (("left", state.last_left), ("right", state.last_right)):
            memory[side] = None if slot is None else {"marker_id": slot.marker_id, "timestamp": slot.timestamp}
        return {
            "pose": {
                "x": self.world.pose.cell[0],
                "y": self.world.pose.cell[1],
                "heading": self.world.pose.heading.value,
            },
            "stage": self.core.current_stage.value,
            "memory": memory,
            "route": [{"x": x, "y": y} for x, y in self.active_route],
            "time_s": self.clock.now(),
        }
