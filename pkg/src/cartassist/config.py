"""Runtime configuration: YAML file, CLI overrides, client construction.

Mock mode needs no credentials and is the default everywhere.  Remote mode
constructs HTTP adapters and refuses to start when the API key environment
variable is absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from .clients import (
    ExternalClients,
    MockRecognizer,
    MockResponder,
    MockSynthesizer,
    RemoteRecognizer,
    RemoteResponder,
    RemoteSynthesizer,
    VirtualClock,
)
from .errors import ConfigError, ProviderFailure
from .geometry import Direction
from .search import RemoteEmbedder, TrigramEmbedder
from .simulator import CartPose

_CLIENT_NAMES = ("recognizer", "responder", "synthesizer", "embedder")


@dataclass
class Config:
    store_path: str | None = None
    templates_path: str | None = None
    locale: str = "en"
    host: str = "127.0.0.1"
    port: int = 8000
    provider_mode: str = "mock"  # default for every client
    providers: dict = field(default_factory=dict)  # per-client overrides
    remote_endpoint: str = "https://api.openai.com/v1"
    api_key_env: str = "CARTASSIST_API_KEY"
    embed_model: str = "text-embedding-ada-002"
    embed_dimension: int = 1536
    chat_model: str = "gpt-4o"
    asr_model: str = "whisper-1"
    tts_model: str = "tts-1"
    tts_voice: str = "onyx"
    t_expire_s: float = 3.0
    t_repeat_s: float = 10.0
    fov_deg: float = 120.0
    max_range_m: float = 5.0
    focal_px: float = 800.0
    cell_size_m: float = 0.5
    step_duration_s: float = 1.0
    hangover_ms: float = 800.0
    timeout_ms: float = 5000.0
    energy_floor: float = 0.01
    max_segment_chars: int = 200
    search_threshold: float = 0.90
    choice_timeout_s: float = 30.0
    currency_symbol: str = "$"
    currency_decimals: int = 2
    utterance_via_vad: bool = False
    classify_with_responder: bool = False
    rephrase_with_responder: bool = False
    start_pose: str | None = None  # "x,y,H"
    seed: int = 0

    def provider_for(self, client: str) -> str:
        mode = self.providers.get(client, self.provider_mode)
        if mode not in ("mock", "remote"):
            raise ConfigError(f"provider for {client} must be mock or remote, got {mode!r}")
        return mode


def load_config(path: str | Path | None = None) -> Config:
    if path is None:
        return Config()
    with open(path, encoding="utf-8") as handle:
        raw = yaml.safe_load(handle) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    known = {f.name for f in fields(Config)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return Config(**raw)


def default_store_path() -> Path:
    return Path(str(resources.files("cartassist").joinpath("data/sample.store")))


def parse_start_pose(text: str | None) -> CartPose | None:
    if not text:
        return None
    try:
        x_s, y_s, heading_s = (part.strip() for part in text.split(","))
        return CartPose((int(x_s), int(y_s)), Direction(heading_s.upper()))
    except (ValueError, KeyError):
        raise ConfigError(f"start pose must look like '2,3,E', got {text!r}") from None


def build_clients(config: Config, clock: VirtualClock | None = None) -> ExternalClients:
    """Construct the four external clients per the configured provider modes."""
    try:
        if config.provider_for("recognizer") == "remote":
            recognizer = RemoteRecognizer(config.remote_endpoint, config.asr_model, config.api_key_env)
        else:
            recognizer = MockRecognizer(clock=clock)
        if config.provider_for("responder") == "remote":
            responder = RemoteResponder(config.remote_endpoint, config.chat_model, config.api_key_env)
        else:
            responder = MockResponder(clock=clock)
        if config.provider_for("synthesizer") == "remote":
            synthesizer = RemoteSynthesizer(config.remote_endpoint, config.tts_model, config.tts_voice,
                                            config.api_key_env)
        else:
            synthesizer = MockSynthesizer(clock=clock)
        if config.provider_for("embedder") == "remote":
            embedder = RemoteEmbedder(config.remote_endpoint, config.embed_model, config.embed_dimension,
                                      config.api_key_env)
        else:
            embedder = TrigramEmbedder()
    except ProviderFailure as exc:
        raise ConfigError(str(exc)) from exc
    return ExternalClients(recognizer, responder, synthesizer, embedder)
