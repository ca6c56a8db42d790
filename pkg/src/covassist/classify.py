"""Maps ranked keywords to one of four request classes.

Precedence: country > symptom > global info > unknown. Country matching
goes through a static gazetteer (canonical names, aliases, cities), so a
city name like "tunis" resolves to its country.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .kb import KnowledgeBase, SYMPTOM
from .rake import ScoredKeyword


class GazetteerError(Exception):
    pass


@dataclass
class Gazetteer:
    countries: set[str]
    aliases: dict[str, str] = field(default_factory=dict)
    cities: dict[str, str] = field(default_factory=dict)
    centroids: dict[str, tuple[float, float]] = field(default_factory=dict)
    _by_name: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._by_name = {name.lower(): name for name in self.countries}
        for table, label in ((self.aliases, "alias"), (self.cities, "city")):
            for key, target in table.items():
                if target not in self.countries:
                    raise GazetteerError(f"{label} '{key}' targets unknown country '{target}'")
        for country, (lat, lon) in self.centroids.items():
            if country not in self.countries:
                raise GazetteerError(f"centroid for unknown country '{country}'")
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise GazetteerError(f"centroid for '{country}' out of range: ({lat}, {lon})")

    def resolve(self, token: str) -> str | None:
        key = " ".join(token.split()).lower()
        return self._by_name.get(key) or self.aliases.get(key) or self.cities.get(key)


def load_gazetteer(path: str | Path) -> Gazetteer:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GazetteerError(f"{path}: parse error: {exc}") from exc
    try:
        return Gazetteer(
            countries=set(doc["countries"]),
            aliases={k.lower(): v for k, v in doc.get("aliases", {}).items()},
            cities={k.lower(): v for k, v in doc.get("cities", {}).items()},
            centroids={k: (float(v[0]), float(v[1])) for k, v in doc.get("centroids", {}).items()},
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise GazetteerError(f"{path}: malformed gazetteer: {exc}") from exc


class RequestKind(str, Enum):
    COUNTRY = "Country"
    SYMPTOM = "Symptom"
    GLOBAL_INFO = "GlobalInfo"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Classification:
    kind: RequestKind
    matched: tuple[str, ...] = ()  # canonical country names, Country only
    keyword: str = ""  # the triggering keyword, kept for context

    def __post_init__(self) -> None:
        if self.kind is RequestKind.COUNTRY and not self.matched:
            raise ValueError("country classification requires at least one match")
        if self.kind is not RequestKind.COUNTRY and self.matched:
            raise ValueError(f"{self.kind.value} classification must not carry matches")


def resolve_country(token: str, gaz: Gazetteer) -> str | None:
    """First country the token resolves to: whole token, then word by word."""
    matches = _countries_in(token, gaz)
    return matches[0] if matches else None


def _countries_in(token: str, gaz: Gazetteer) -> list[str]:
    found: list[str] = []
    whole = gaz.resolve(token)
    if whole is not None:
        found.append(whole)
    for word in token.split():
        hit = gaz.resolve(word)
        if hit is not None and hit not in found:
            found.append(hit)
    return found


def _symptom_terms(kb: KnowledgeBase) -> set[str]:
    terms = {SYMPTOM.lower(), SYMPTOM.lower() + "s"}
    for name, synonyms, _ in kb.symptoms():
        terms.add(name.lower())
        terms.update(s.lower() for s in synonyms)
    return terms


def _matches_any(keyword: str, terms: set[str]) -> bool:
    return keyword in terms or any(word in terms for word in keyword.split())


def classify(
    keywords: list[ScoredKeyword], kb: KnowledgeBase, gaz: Gazetteer
) -> Classification:
    """Classify a ranked keyword list (highest-scored keyword first).

    All distinct country matches across all keywords are collected so the
    caller can offer a numbered choice; the stored keyword is the
    highest-scored trigger of the winning class.
    """
    symptom_terms = _symptom_terms(kb)
    related = kb.related_words()

    countries: list[str] = []
    country_kw: str | None = None
    symptom_kw: str | None = None
    global_kw: str | None = None

    for kw in keywords:
        text = kw.phrase
        hits = _countries_in(text, gaz)
        if hits and country_kw is None:
            country_kw = text
        for hit in hits:
            if hit not in countries:
                countries.append(hit)
        if symptom_kw is None and _matches_any(text, symptom_terms):
            symptom_kw = text
        if global_kw is None and _matches_any(text, related):
            global_kw = text

    if countries:
        return Classification(RequestKind.COUNTRY, tuple(countries), country_kw or "")
    if symptom_kw is not None:
        return Classification(RequestKind.SYMPTOM, (), symptom_kw)
    if global_kw is not None:
        return Classification(RequestKind.GLOBAL_INFO, (), global_kw)
    return Classification(RequestKind.UNKNOWN)
