"""Audio frames, energy-based voice activity detection and endpointing.

Recording spans from the first frame until sustained silence: once speech has
been heard, hangover_ms of continuous non-speech ends the clip (so short
pauses between words stay inside one utterance).  If no speech arrives within
timeout_ms the recording is abandoned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

from .errors import EmptyUtterance, StreamClosed

DEFAULT_FRAME_MS = 30
DEFAULT_HANGOVER_MS = 800
DEFAULT_TIMEOUT_MS = 5000
DEFAULT_ENERGY_FLOOR = 0.01


@dataclass(frozen=True)
class AudioFrame:
    samples: tuple[float, ...]
    frame_ms: float
    energy: float  # RMS over the frame

    @classmethod
    def make(cls, samples: Sequence[float], frame_ms: float = DEFAULT_FRAME_MS) -> "AudioFrame":
        samples = tuple(samples)
        rms = math.sqrt(sum(s * s for s in samples) / len(samples)) if samples else 0.0
        return cls(samples, frame_ms, rms)


class VoiceDetector(Protocol):
    def is_speech(self, frame: AudioFrame) -> bool: ...


class EnergyVoiceDetector:
    """Per-frame RMS against a configured floor."""

    def __init__(self, energy_floor: float = DEFAULT_ENERGY_FLOOR):
        self.energy_floor = energy_floor

    def is_speech(self, frame: AudioFrame) -> bool:
        return frame.energy > self.energy_floor


def record_until_silence(
    frames: Iterable[AudioFrame],
    vad: VoiceDetector,
    *,
    hangover_ms: float = DEFAULT_HANGOVER_MS,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
    on_start: Callable[[], None] | None = None,
) -> list[AudioFrame]:
    """Record one utterance from a frame stream.

    Returns every frame from the start of recording through the end of the
    hangover window.  Raises EmptyUtterance when no speech frame arrives
    within timeout_ms (or the stream ends all-silent) and StreamClosed when
    the stream yields nothing at all.  A stream that closes mid-utterance
    simply ends the clip; the utterance is whatever was heard.
    """
    if on_start is not None:
        on_start()
    clip: list[AudioFrame] = []
    speech_seen = False
    silence_ms = 0.0
    waited_ms = 0.0
    for frame in frames:
        clip.append(frame)
        if vad.is_speech(frame):
            speech_seen = True
            silence_ms = 0.0
        elif speech_seen:
            silence_ms += frame.frame_ms
            if silence_ms >= hangover_ms:
                return clip
        else:
            waited_ms += frame.frame_ms
            if waited_ms >= timeout_ms:
                raise EmptyUtterance(f"no speech within {timeout_ms:g} ms")
    if speech_seen:
        return clip
    if clip:
        raise EmptyUtterance("stream ended before any speech")
    raise StreamClosed("audio stream yielded no frames")


def speech_frames(count: int, level: float = 0.5, frame_ms: float = DEFAULT_FRAME_MS) -> list[AudioFrame]:
    """Synthesized constant-level speech frames for scripts and tests."""
    return [AudioFrame.make((level,) * 8, frame_ms) for _ in range(count)]


def silence_frames(count: int, frame_ms: float = DEFAULT_FRAME_MS) -> list[AudioFrame]:
    return [AudioFrame.make((0.0,) * 8, frame_ms) for _ in range(count)]


def scripted_utterance_frames(
    speech_count: int = 10,
    *,
    hangover_ms: float = DEFAULT_HANGOVER_MS,
    frame_ms: float = DEFAULT_FRAME_MS,
) -> list[AudioFrame]:
    """A speech burst followed by enough silence to close the recording."""
    tail = int(hangover_ms // frame_ms) + 1
    return speech_frames(speech_count, frame_ms=frame_ms) + silence_frames(tail, frame_ms=frame_ms)
