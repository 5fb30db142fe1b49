"""Spoken-sentence templates and small rendering helpers.

Every sentence the assistant speaks comes from one locale-keyed YAML table so
tests can assert exact strings and operators can re-word or translate without
touching code.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import yaml

NUMBER_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten",
}


def number_word(n: int) -> str:
    """Words up to ten, digits beyond; keeps synthesized speech natural."""
    return NUMBER_WORDS.get(n, str(n))


def format_price(minor_units: int, symbol: str = "$", decimals: int = 2) -> str:
    if decimals <= 0:
        return f"{symbol}{minor_units}"
    scale = 10**decimals
    return f"{symbol}{minor_units // scale}.{minor_units % scale:0{decimals}d}"


def aisle_phrase(count: int) -> str:
    unit = "aisle" if count == 1 else "aisles"
    return f"{number_word(count)} {unit}"


def meters_phrase(cells: int, cell_size_m: float) -> str:
    meters = cells * cell_size_m
    if meters == int(meters):
        whole = int(meters)
        unit = "meter" if whole == 1 else "meters"
        return f"{number_word(whole)} {unit}"
    return f"{meters:g} meters"


def default_templates_path() -> Path:
    return Path(str(resources.files("cartassist").joinpath("data/templates.yaml")))


def load_templates(path: str | Path | None = None) -> dict:
    with open(path or default_templates_path(), encoding="utf-8") as handle:
        return yaml.safe_load(handle)


class Phrasebook:
    """Renders template keys for one locale; unknown keys fail loudly."""

    def __init__(self, table: dict | None = None, locale: str = "en"):
        table = table if table is not None else load_templates()
        if locale not in table:
            raise KeyError(f"no templates for locale {locale!r}")
        self.locale = locale
        self._phrases: dict[str, str] = table[locale]

    def render(self, key: str, **kwargs) -> str:
        return self._phrases[key].format(**kwargs)
