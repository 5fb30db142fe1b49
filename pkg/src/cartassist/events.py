"""Pipeline events, button events and the line-oriented trace format.

Trace lines are the interchange format for golden-trace tests and the HTTP
event stream: one event per line, `EventName key=value ...`, with free text
JSON-quoted.  Timestamps are optional so golden fixtures stay byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum


class Stage(str, Enum):
    LISTENING = "Listening"
    CAPTURING = "Capturing"
    PROCESSING = "Processing"
    NAVIGATING = "Navigating"
    SPEAKING = "Speaking"


class ButtonVariant(str, Enum):
    ENVIRONMENT_DESCRIPTION = "EnvironmentDescription"
    VOICE_COMMAND = "VoiceCommand"
    SECTION_DESCRIPTION = "SectionDescription"


@dataclass(frozen=True)
class ButtonEvent:
    variant: ButtonVariant
    timestamp: float = 0.0


@dataclass(frozen=True)
class UtteranceEvent:
    """Typed stand-in for the microphone (cockpit text box)."""

    text: str
    timestamp: float = 0.0


InputEvent = ButtonEvent | UtteranceEvent


@dataclass(frozen=True)
class CueRecordingStarted:
    timestamp: float


@dataclass(frozen=True)
class CueProcessing:
    timestamp: float


@dataclass(frozen=True)
class Transcript:
    text: str
    timestamp: float


@dataclass(frozen=True)
class ImagesCaptured:
    count: int
    timestamp: float


@dataclass(frozen=True)
class SpeechSegment:
    text: str
    seq: int
    timestamp: float


@dataclass(frozen=True)
class StateChanged:
    stage: Stage
    timestamp: float


PipelineEvent = CueRecordingStarted | CueProcessing | Transcript | ImagesCaptured | SpeechSegment | StateChanged


def trace_line(event: PipelineEvent, include_time: bool = False) -> str:
    prefix = f"t={event.timestamp:.3f} " if include_time else ""
    if isinstance(event, StateChanged):
        return f"{prefix}StateChanged stage={event.stage.value}"
    if isinstance(event, CueRecordingStarted):
        return f"{prefix}CueRecordingStarted"
    if isinstance(event, CueProcessing):
        return f"{prefix}CueProcessing"
    if isinstance(event, Transcript):
        return f"{prefix}Transcript text={json.dumps(event.text)}"
    if isinstance(event, ImagesCaptured):
        return f"{prefix}ImagesCaptured count={event.count}"
    if isinstance(event, SpeechSegment):
        return f"{prefix}SpeechSegment seq={event.seq} text={json.dumps(event.text)}"
    raise TypeError(f"not a pipeline event: {event!r}")


def format_trace(events: list[PipelineEvent], include_time: bool = False) -> str:
    return "\n".join(trace_line(e, include_time) for e in events) + "\n" if events else ""
