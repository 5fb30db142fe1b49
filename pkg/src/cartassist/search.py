"""Embedding-based product lookup.

A query is embedded, compared against precomputed vectors for every catalog
entry with cosine similarity, and either announced directly (best score at or
above the exact-match threshold) or answered with the top three candidates.

The default provider is a hashed character-trigram bag: offline, deterministic
and cheap, which keeps tests hermetic.  Remote embedding services plug in
behind the same EmbeddingProvider protocol.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyText, ProviderFailure, ZeroVector
from .store import ProductRecord, Store

DEFAULT_THRESHOLD = 0.90
CANDIDATE_LIMIT = 3


class EmbeddingVector:
    """Fixed-dimension real vector; zero and non-finite vectors are rejected."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float] | np.ndarray):
        array = np.asarray(values, dtype=np.float64)
        if array.ndim != 1 or array.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(array)):
            raise ValueError("embedding entries must be finite")
        if not np.any(array):
            raise ZeroVector("embedding must have at least one nonzero entry")
        array.flags.writeable = False
        self.values = array

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dimension})"


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """(a.b) / (|a||b|), clamped into [-1, 1] against rounding overshoot."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"dimensions differ: {a.dimension} vs {b.dimension}")
    value = float(np.dot(a.values, b.values) / (np.linalg.norm(a.values) * np.linalg.norm(b.values)))
    return max(-1.0, min(1.0, value))


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> EmbeddingVector: ...


def normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


class TrigramEmbedder:
    """Hashed character-trigram bag, L2-normalized.

    Texts shorter than three characters hash as a single gram so nothing
    embeds to the zero vector.
    """

    def __init__(self, dimension: int = 256):
        self.name = f"trigram-{dimension}"
        self.dimension = dimension

    def embed(self, text: str) -> EmbeddingVector:
        normalized = normalize_text(text)
        if not normalized:
            raise EmptyText("cannot embed empty text")
        counts = np.zeros(self.dimension, dtype=np.float64)
        if len(normalized) < 3:
            grams = [normalized]
        else:
            grams = [normalized[i : i + 3] for i in range(len(normalized) - 2)]
        for gram in grams:
            counts[zlib.crc32(gram.encode("utf-8")) % self.dimension] += 1.0
        counts /= np.linalg.norm(counts)
        return EmbeddingVector(counts)


class RemoteEmbedder:
    """Adapter for an HTTP embedding service (OpenAI-style API).

    Optional and never used by tests; the API key comes from the environment.
    """

    def __init__(self, endpoint: str, model: str, dimension: int, api_key_env: str = "CARTASSIST_API_KEY"):
        self.name = f"remote-{model}"
        self.dimension = dimension
        self._endpoint = endpoint.rstrip("/")
        self._model = model
        self._api_key = os.environ.get(api_key_env, "")
        if not self._api_key:
            raise ProviderFailure(f"remote embedder requires {api_key_env} to be set")

    def embed(self, text: str) -> EmbeddingVector:
        import httpx

        if not normalize_text(text):
            raise EmptyText("cannot embed empty text")
        try:
            response = httpx.post(
                f"{self._endpoint}/embeddings",
                headers={"Authorization": f"Bearer {self._api_key}"},
                json={"model": self._model, "input": text},
                timeout=30.0,
            )
            response.raise_for_status()
            values = response.json()["data"][0]["embedding"]
        except Exception as exc:
            raise ProviderFailure(f"embedding request failed: {exc}") from exc
        return EmbeddingVector(values)


@dataclass(frozen=True)
class ExactMatch:
    product_id: str
    similarity: float


@dataclass(frozen=True)
class Candidates:
    items: tuple[tuple[str, float], ...]  # (product_id, similarity), best first


@dataclass(frozen=True)
class NoMatch:
    pass


SearchOutcome = ExactMatch | Candidates | NoMatch


def indexed_text(product: ProductRecord) -> str:
    """The text embedded for a product: name, brand and variety."""
    parts = [p for p in (product.name, product.brand, product.variety) if p.strip()]
    return normalize_text(" ".join(parts))


@dataclass(frozen=True)
class ProductIndex:
    entries: dict[str, EmbeddingVector]
    provider: EmbeddingProvider
    provider_tag: str
    dimension: int


def build_index(store: Store, provider: EmbeddingProvider) -> ProductIndex:
    entries = {pid: provider.embed(indexed_text(p)) for pid, p in store.products.items()}
    return ProductIndex(entries, provider, provider.name, provider.dimension)


def search(query_text: str, index: ProductIndex, threshold: float = DEFAULT_THRESHOLD) -> SearchOutcome:
    """Rank the catalog against the query.

    Exact match when the best similarity reaches the threshold, otherwise the
    top three candidates.  Ties break toward the ascending product id so
    results are deterministic.
    """
    if not index.entries:
        return NoMatch()
    query = index.provider.embed(query_text)
    scored = sorted(
        ((pid, cosine_similarity(query, vec)) for pid, vec in index.entries.items()),
        key=lambda item: (-item[1], item[0]),
    )
    best_id, best_sim = scored[0]
    if best_sim >= threshold:
        return ExactMatch(best_id, best_sim)
    return Candidates(tuple(scored[:CANDIDATE_LIMIT]))
