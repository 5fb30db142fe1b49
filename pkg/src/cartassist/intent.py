"""Rule-based intent classification with an optional chat-model override.

The rules are deliberately simple and deterministic: navigation verbs win,
then product/price interrogatives, and everything else is a general query.
A configured responder may override the label through a constrained prompt,
with the rules as the fallback whenever it fails or answers off-script.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

NAVIGATE_PHRASES = ("take me", "guide me", "guide", "go to", "navigate to", "bring me")
PRODUCT_PHRASES = ("where is", "where are", "where can i find", "how much", "price of", "what is the price of")
IMAGE_HINT_WORDS = ("around", "surroundings", "environment", "see", "look", "in front")
_FILLER_WORDS = ("to", "the", "a", "an", "me", "is", "are", "of", "for", "my")


@dataclass(frozen=True)
class ProductInfo:
    query_text: str


@dataclass(frozen=True)
class Navigate:
    target_text: str


@dataclass(frozen=True)
class General:
    query_text: str
    wants_images: bool = False


Intent = ProductInfo | Navigate | General


def _clean(text: str) -> str:
    text = re.sub(r"[?!.,]+", " ", text.lower())
    return " ".join(text.split())


def _extract_after(text: str, phrase: str) -> str:
    tail = text.split(phrase, 1)[1]
    words = tail.split()
    while words and words[0] in _FILLER_WORDS:
        words.pop(0)
    while words and words[-1] == "please":
        words.pop()
    return " ".join(words)


def _classify_by_rules(text: str) -> Intent:
    cleaned = _clean(text)
    for phrase in NAVIGATE_PHRASES:
        if phrase in cleaned:
            target = _extract_after(cleaned, phrase)
            if target:
                return Navigate(target)
    for phrase in PRODUCT_PHRASES:
        if phrase in cleaned:
            query = _extract_after(cleaned, phrase)
            if query:
                return ProductInfo(query)
    wants_images = any(word in cleaned.split() or word in cleaned for word in IMAGE_HINT_WORDS)
    return General(cleaned or text, wants_images)


_LABEL_PROMPT = (
    "Classify the shopper request into exactly one label and answer with that "
    "single word: PRODUCT, NAVIGATE, or GENERAL.\nRequest: {text}"
)


def classify_intent(text: str, responder=None) -> Intent:
    """Classify a transcript; `responder` may override the rule-based label."""
    if not text or not text.strip():
        raise ValueError("cannot classify empty text")
    ruled = _classify_by_rules(text)
    if responder is None:
        return ruled
    try:
        label = responder.respond(_LABEL_PROMPT.format(text=text)).strip().upper()
    except Exception:
        return ruled
    cleaned = _clean(text)
    if label == "NAVIGATE":
        if isinstance(ruled, Navigate):
            return ruled
        return Navigate(cleaned)
    if label == "PRODUCT":
        if isinstance(ruled, ProductInfo):
            return ruled
        return ProductInfo(cleaned)
    if label == "GENERAL":
        return ruled if isinstance(ruled, General) else General(cleaned, False)
    return ruled
