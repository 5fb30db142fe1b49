"""External AI-service clients: protocols, deterministic mocks, HTTP adapters.

The pipeline only ever talks to these interfaces.  Mocks make the whole
system runnable and testable offline; the remote adapters are thin HTTP
shims kept behind configuration and never exercised by the test suite.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .audio import AudioFrame
from .errors import ProviderFailure
from .search import EmbeddingProvider, TrigramEmbedder


class Clock(Protocol):
    def now(self) -> float: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()


class VirtualClock:
    """Deterministic clock advanced explicitly by the simulator and mocks."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("cannot advance a clock backwards")
        with self._lock:
            self._now += seconds
            return self._now


@dataclass(frozen=True)
class CapturedImage:
    """Stand-in for a camera photograph in the simulated world."""

    camera: str
    description: str


@dataclass(frozen=True)
class SpeechAudio:
    text: str
    duration_s: float = 0.0


class SpeechRecognizer(Protocol):
    def transcribe(self, clip: Sequence[AudioFrame]) -> str: ...


class ChatResponder(Protocol):
    def respond(self, prompt: str, images: Sequence[CapturedImage] = ()) -> str: ...


class SpeechSynthesizer(Protocol):
    def synthesize(self, text: str) -> SpeechAudio: ...


@dataclass
class ExternalClients:
    recognizer: SpeechRecognizer
    responder: ChatResponder
    synthesizer: SpeechSynthesizer
    embedder: EmbeddingProvider


class MockRecognizer:
    """Returns scripted transcripts in order; empty script transcribes to ''."""

    def __init__(self, transcripts: Sequence[str] = (), latency_s: float = 0.0, clock: VirtualClock | None = None):
        self._transcripts = list(transcripts)
        self.latency_s = latency_s
        self._clock = clock
        self.calls = 0

    def prime(self, text: str) -> None:
        self._transcripts.append(text)

    def transcribe(self, clip: Sequence[AudioFrame]) -> str:
        self.calls += 1
        if self._clock is not None and self.latency_s:
            self._clock.advance(self.latency_s)
        if self._transcripts:
            return self._transcripts.pop(0)
        return ""


class MockResponder:
    """Scripted replies, then a fixed fallback line; can be told to fail."""

    def __init__(
        self,
        replies: Sequence[str] = (),
        *,
        fail: bool = False,
        latency_s: float = 0.0,
        clock: VirtualClock | None = None,
    ):
        self._replies = list(replies)
        self.fail = fail
        self.latency_s = latency_s
        self._clock = clock
        self.calls = 0
        self.last_prompt: str | None = None
        self.last_image_count = 0

    def respond(self, prompt: str, images: Sequence[CapturedImage] = ()) -> str:
        self.calls += 1
        self.last_prompt = prompt
        self.last_image_count = len(images)
        if self._clock is not None and self.latency_s:
            self._clock.advance(self.latency_s)
        if self.fail:
            raise ProviderFailure("scripted responder failure")
        if self._replies:
            return self._replies.pop(0)
        return "This is a simulated response."


class EchoResponder:
    """Repeats the prompt back; handy for rephrasing tests."""

    def respond(self, prompt: str, images: Sequence[CapturedImage] = ()) -> str:
        return prompt


class MockSynthesizer:
    def __init__(self, latency_s: float = 0.0, clock: VirtualClock | None = None):
        self.latency_s = latency_s
        self._clock = clock
        self.synthesized: list[str] = []

    def synthesize(self, text: str) -> SpeechAudio:
        if self._clock is not None and self.latency_s:
            self._clock.advance(self.latency_s)
        self.synthesized.append(text)
        return SpeechAudio(text=text, duration_s=0.0)


def mock_clients(clock: VirtualClock | None = None, transcripts: Sequence[str] = ()) -> ExternalClients:
    return ExternalClients(
        recognizer=MockRecognizer(transcripts, clock=clock),
        responder=MockResponder(clock=clock),
        synthesizer=MockSynthesizer(clock=clock),
        embedder=TrigramEmbedder(),
    )


def _api_key(env_var: str) -> str:
    key = os.environ.get(env_var, "")
    if not key:
        raise ProviderFailure(f"remote client requires {env_var} to be set")
    return key


class RemoteRecognizer:
    """OpenAI-style transcription endpoint; optional, untested by CI."""

    def __init__(self, endpoint: str, model: str = "whisper-1", api_key_env: str = "CARTASSIST_API_KEY"):
        self._endpoint = endpoint.rstrip("/")
        self._model = model
        self._key = _api_key(api_key_env)

    def transcribe(self, clip: Sequence[AudioFrame]) -> str:
        import httpx

        pcm = b"".join(int(max(-1.0, min(1.0, s)) * 32767).to_bytes(2, "little", signed=True)
                       for frame in clip for s in frame.samples)
        try:
            response = httpx.post(
                f"{self._endpoint}/audio/transcriptions",
                headers={"Authorization": f"Bearer {self._key}"},
                files={"file": ("clip.raw", pcm)},
                data={"model": self._model},
                timeout=60.0,
            )
            response.raise_for_status()
            return response.json()["text"]
        except Exception as exc:
            raise ProviderFailure(f"transcription failed: {exc}") from exc


class RemoteResponder:
    def __init__(self, endpoint: str, model: str = "gpt-4o", api_key_env: str = "CARTASSIST_API_KEY"):
        self._endpoint = endpoint.rstrip("/")
        self._model = model
        self._key = _api_key(api_key_env)

    def respond(self, prompt: str, images: Sequence[CapturedImage] = ()) -> str:
        import httpx

        content = prompt
        if images:
            content += "\n\nCamera views: " + "; ".join(f"{i.camera}: {i.description}" for i in images)
        try:
            response = httpx.post(
                f"{self._endpoint}/chat/completions",
                headers={"Authorization": f"Bearer {self._key}"},
                json={"model": self._model, "messages": [{"role": "user", "content": content}]},
                timeout=60.0,
            )
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise ProviderFailure(f"chat request failed: {exc}") from exc


class RemoteSynthesizer:
    def __init__(self, endpoint: str, model: str = "tts-1", voice: str = "onyx",
                 api_key_env: str = "CARTASSIST_API_KEY"):
        self._endpoint = endpoint.rstrip("/")
        self._model = model
        self._voice = voice
        self._key = _api_key(api_key_env)

    def synthesize(self, text: str) -> SpeechAudio:
        import httpx

        try:
            response = httpx.post(
                f"{self._endpoint}/audio/speech",
                headers={"Authorization": f"Bearer {self._key}"},
                json={"model": self._model, "voice": self._voice, "input": text},
                timeout=60.0,
            )
            response.raise_for_status()
        except Exception as exc:
            raise ProviderFailure(f"speech synthesis failed: {exc}") from exc
        return SpeechAudio(text=text, duration_s=0.0)
