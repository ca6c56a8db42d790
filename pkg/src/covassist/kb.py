"""In-memory ontology store for the disease knowledge base.

The knowledge base holds a small concept hierarchy (countries, regions,
current statuses, trends, symptoms, related words), individuals typed by
those concepts, and three property kinds: data properties (typed scalars),
object properties (links between individuals) and annotations (free text).

A KnowledgeBase is immutable after load; `upsert_status` returns a new
snapshot instead of mutating, so readers can share an instance freely.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, NamedTuple

if TYPE_CHECKING:  # avoids a runtime cycle; ingest imports this module
    from .ingest import StatusRecord

# Concept names with structural meaning.
COUNTRY = "Country"
REGION = "Region"
CURRENT_STATUS = "CurrentStatus"
TREND = "Trend"
SYMPTOM = "Symptom"
RELATED_WORD = "RelatedWord"

# Every current-status individual must carry these data properties.
REQUIRED_STATUS_PROPS = ("Cases", "Recovered", "Deaths", "Retrieved")

SOURCE_ANNOTATION = "Data Source"
PUBLISHER_ANNOTATION = "Data Publisher"
SYNONYM_ANNOTATION = "Has Synonym"
PREVALENCE_ANNOTATION = "Prevalence"

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class KbError(Exception):
    """Base class for knowledge-base failures."""


class KbParseError(KbError):
    """The file could not be parsed or is structurally malformed."""


class KbInvariantError(KbError):
    """The knowledge base violates a consistency rule."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"knowledge base is inconsistent: {lines}")


class TrendValue(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    STABLE = "stable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Concept:
    name: str
    parent: str | None = None
    disjoint_with: frozenset[str] = frozenset()


@dataclass
class Individual:
    id: str
    concept: str
    data: dict[str, object] = field(default_factory=dict)
    objects: dict[str, str] = field(default_factory=dict)
    annotations: dict[str, list[str]] = field(default_factory=dict)

    def label(self) -> str:
        value = self.data.get("Label")
        return value if isinstance(value, str) else self.id


@dataclass(frozen=True)
class Violation:
    kind: str  # disjointness | dangling_ref | missing_property | cycle
    entity: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.entity}: {self.detail}"


@dataclass(frozen=True)
class StatusView:
    """Read model for one region's current status."""

    region_name: str
    cases: int
    deaths: int
    recovered: int
    retrieved: dt.date
    trend: TrendValue
    source: str = ""
    publisher: str = ""

    def __post_init__(self) -> None:
        if min(self.cases, self.deaths, self.recovered) < 0:
            raise ValueError(f"{self.region_name}: counts must be non-negative")
        if self.deaths > self.cases:
            raise ValueError(f"{self.region_name}: deaths exceed cases")
        if self.recovered > self.cases:
            raise ValueError(f"{self.region_name}: recovered exceed cases")


class SymptomInfo(NamedTuple):
    name: str
    synonyms: tuple[str, ...]
    prevalence_percent: float


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


@dataclass
class KnowledgeBase:
    concepts: dict[str, Concept]
    individuals: list[Individual]
    meta: dict[str, list[str]] = field(default_factory=dict)

    # -- hierarchy helpers ---------------------------------------------------

    def ancestors(self, concept: str) -> tuple[str, ...]:
        """Concept plus its parent chain; stops on unknown or cyclic links."""
        chain: list[str] = []
        seen: set[str] = set()
        current: str | None = concept
        while current is not None and current in self.concepts and current not in seen:
            chain.append(current)
            seen.add(current)
            current = self.concepts[current].parent
        return tuple(chain)

    def is_a(self, concept: str, target: str) -> bool:
        return target in self.ancestors(concept)

    def individuals_of(self, concept: str) -> Iterator[Individual]:
        for ind in self.individuals:
            if self.is_a(ind.concept, concept):
                yield ind

    def individual(self, ind_id: str) -> Individual | None:
        for ind in self.individuals:
            if ind.id == ind_id:
                return ind
        return None

    # -- consistency ---------------------------------------------------------

    def check_consistency(self) -> list[Violation]:
        """Structural consistency: disjointness, dangling references,
        required status properties, hierarchy acyclicity."""
        violations: list[Violation] = []

        reported_cycles: set[frozenset[str]] = set()
        for name, concept in self.concepts.items():
            if concept.parent is not None and concept.parent not in self.concepts:
                violations.append(
                    Violation("dangling_ref", name, f"parent concept '{concept.parent}' does not exist")
                )
            for other in concept.disjoint_with:
                if other not in self.concepts:
                    violations.append(
                        Violation("dangling_ref", name, f"disjoint concept '{other}' does not exist")
                    )
            # walk the parent chain looking for a loop back
            path = [name]
            seen = {name}
            current = concept.parent
            while current is not None and current in self.concepts:
                if current in seen:
                    cycle = frozenset(path[path.index(current):] if current in path else path)
                    if cycle not in reported_cycles:
                        reported_cycles.add(cycle)
                        violations.append(
                            Violation("cycle", current, "parent links form a cycle")
                        )
                    break
                path.append(current)
                seen.add(current)
                current = self.concepts[current].parent

        ids = {ind.id for ind in self.individuals}
        for ind in self.individuals:
            if ind.concept not in self.concepts:
                violations.append(
                    Violation("dangling_ref", ind.id, f"unknown concept '{ind.concept}'")
                )
            for prop, target in ind.objects.items():
                if target not in ids:
                    violations.append(
                        Violation("dangling_ref", ind.id, f"object property '{prop}' targets missing individual '{target}'")
                    )

        # merge type assertions per individual id, then apply disjointness
        disjoint_pairs = {
            frozenset((c.name, other))
            for c in self.concepts.values()
            for other in c.disjoint_with
            if other in self.concepts
        }
        asserted: dict[str, set[str]] = {}
        merged_data: dict[str, set[str]] = {}
        for ind in self.individuals:
            asserted.setdefault(ind.id, set()).update(self.ancestors(ind.concept))
            merged_data.setdefault(ind.id, set()).update(ind.data)
        for ind_id, types in asserted.items():
            for pair in disjoint_pairs:
                if pair <= types:
                    first, second = sorted(pair)
                    violations.append(
                        Violation("disjointness", ind_id, f"asserts disjoint concepts '{first}' and '{second}'")
                    )

        status_ids = {
            ind.id for ind in self.individuals if self.is_a(ind.concept, CURRENT_STATUS)
        }
        for ind_id in sorted(status_ids):
            for prop in REQUIRED_STATUS_PROPS:
                if prop not in merged_data.get(ind_id, set()):
                    violations.append(
                        Violation("missing_property", ind_id, f"current status lacks data property '{prop}'")
                    )

        return violations

    # -- queries ---------------------------------------------------------

    def _find_region(self, region_name: str) -> Individual | None:
        query = " ".join(region_name.split()).casefold()
        if not query:
            return None
        for ind in self.individuals:
            if not (self.is_a(ind.concept, COUNTRY) or self.is_a(ind.concept, REGION)):
                continue
            if query in (ind.label().casefold(), ind.id.casefold(), ind.id.replace("_", " ").casefold()):
                return ind
        return None

    def _linked(self, concept: str, region_id: str) -> Individual | None:
        for ind in self.individuals_of(concept):
            if region_id in (ind.objects.get(COUNTRY), ind.objects.get(REGION)):
                return ind
        return None

    def status_of(self, region_name: str) -> StatusView | None:
        """Case-insensitive region lookup resolving the linked current status."""
        region = self._find_region(region_name)
        if region is None:
            return None
        status = self._linked(CURRENT_STATUS, region.id)
        if status is None:
            return None
        trend = TrendValue.UNKNOWN
        trend_ind = self._linked(TREND, region.id)
        if trend_ind is not None:
            raw = trend_ind.data.get("Value")
            try:
                trend = TrendValue(str(raw))
            except ValueError:
                trend = TrendValue.UNKNOWN
        retrieved = status.data.get("Retrieved")
        if not isinstance(retrieved, dt.date):
            raise KbError(f"{status.id}: 'Retrieved' is not a date")
        return StatusView(
            region_name=region.label(),
            cases=int(status.data.get("Cases", 0)),  # type: ignore[arg-type]
            deaths=int(status.data.get("Deaths", 0)),  # type: ignore[arg-type]
            recovered=int(status.data.get("Recovered", 0)),  # type: ignore[arg-type]
            retrieved=retrieved,
            trend=trend,
            source=(status.annotations.get(SOURCE_ANNOTATION) or [""])[0],
            publisher=(status.annotations.get(PUBLISHER_ANNOTATION) or [""])[0],
        )

    def symptoms(self) -> list[SymptomInfo]:
        """Symptoms sorted by prevalence descending, name as tiebreak."""
        rows = []
        for ind in self.individuals_of(SYMPTOM):
            raw = ind.annotations.get(PREVALENCE_ANNOTATION) or ["0"]
            try:
                prevalence = float(raw[0])
            except ValueError:
                prevalence = 0.0
            synonyms = tuple(ind.annotations.get(SYNONYM_ANNOTATION) or ())
            rows.append(SymptomInfo(ind.label(), synonyms, prevalence))
        rows.sort(key=lambda s: (-s.prevalence_percent, s.name.casefold()))
        return rows

    def related_words(self) -> set[str]:
        return {ind.label().lower() for ind in self.individuals_of(RELATED_WORD)}

    # -- updates ---------------------------------------------------------

    def upsert_status(self, record: "StatusRecord", trend: TrendValue) -> "KnowledgeBase":
        """New snapshot where the region holds exactly this status and trend.

        Creates the country individual when the region is unseen; drops any
        previous CurrentStatus/Trend individuals linked to the region.
        """
        if record.deaths > record.cases:
            raise ValueError(f"{record.region}: deaths exceed cases")
        if record.recovered > record.cases:
            raise ValueError(f"{record.region}: recovered exceed cases")

        region = self._find_region(record.region)
        individuals = list(self.individuals)
        if region is None:
            region = Individual(
                id=_slug(record.region), concept=COUNTRY, data={"Label": record.region}
            )
            individuals.append(region)
        link_prop = REGION if self.is_a(region.concept, REGION) else COUNTRY

        def linked_to_region(ind: Individual) -> bool:
            if not (self.is_a(ind.concept, CURRENT_STATUS) or self.is_a(ind.concept, TREND)):
                return False
            return region.id in (ind.objects.get(COUNTRY), ind.objects.get(REGION))

        individuals = [ind for ind in individuals if not linked_to_region(ind)]

        annotations: dict[str, list[str]] = {}
        if record.source_url:
            annotations[SOURCE_ANNOTATION] = [record.source_url]
        if record.publisher:
            annotations[PUBLISHER_ANNOTATION] = [record.publisher]
        individuals.append(
            Individual(
                id=f"{region.id}_status",
                concept=CURRENT_STATUS,
                data={
                    "Cases": record.cases,
                    "Deaths": record.deaths,
                    "Recovered": record.recovered,
                    "Retrieved": record.retrieved,
                },
                objects={link_prop: region.id},
                annotations=annotations,
            )
        )
        individuals.append(
            Individual(
                id=f"{region.id}_trend",
                concept=TREND,
                data={"Value": trend.value},
                objects={link_prop: region.id},
            )
        )
        return KnowledgeBase(concepts=dict(self.concepts), individuals=individuals, meta=dict(self.meta))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        """Canonical form: entities sorted, dates as ISO strings."""

        def scalar(value: object) -> object:
            return value.isoformat() if isinstance(value, dt.date) else value

        concepts = []
        for concept in sorted(self.concepts.values(), key=lambda c: c.name):
            entry: dict[str, object] = {"name": concept.name}
            if concept.parent is not None:
                entry["parent"] = concept.parent
            if concept.disjoint_with:
                entry["disjoint_with"] = sorted(concept.disjoint_with)
            concepts.append(entry)

        individuals = []
        for ind in sorted(self.individuals, key=lambda i: (i.id, i.concept)):
            entry = {"id": ind.id, "concept": ind.concept}
            if ind.data:
                entry["data"] = {k: scalar(v) for k, v in sorted(ind.data.items())}
            if ind.objects:
                entry["object"] = dict(sorted(ind.objects.items()))
            if ind.annotations:
                entry["annotations"] = {k: list(v) for k, v in sorted(ind.annotations.items())}
            individuals.append(entry)

        return {"meta": dict(sorted(self.meta.items())), "concepts": concepts, "individuals": individuals}


def _parse_scalar(value: object, where: str) -> object:
    if isinstance(value, bool) or value is None:
        raise KbParseError(f"{where}: unsupported data value {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return int(value) if value.is_integer() else value
    if isinstance(value, str):
        if _DATE_RE.match(value):
            try:
                return dt.date.fromisoformat(value)
            except ValueError as exc:
                raise KbParseError(f"{where}: bad date {value!r}: {exc}") from exc
        return value
    raise KbParseError(f"{where}: unsupported data value {value!r}")


def _parse_individual(raw: object, index: int) -> Individual:
    where = f"individuals[{index}]"
    if not isinstance(raw, dict):
        raise KbParseError(f"{where}: expected an object")
    ind_id = raw.get("id")
    concept = raw.get("concept")
    if not isinstance(ind_id, str) or not ind_id:
        raise KbParseError(f"{where}: missing field 'id'")
    if not isinstance(concept, str) or not concept:
        raise KbParseError(f"{where} ({ind_id}): missing field 'concept'")
    data_raw = raw.get("data", {})
    objects = raw.get("object", {})
    annotations_raw = raw.get("annotations", {})
    if not isinstance(data_raw, dict) or not isinstance(objects, dict) or not isinstance(annotations_raw, dict):
        raise KbParseError(f"{where} ({ind_id}): 'data', 'object' and 'annotations' must be objects")
    data = {str(k): _parse_scalar(v, f"{where}.data.{k}") for k, v in data_raw.items()}
    for k, v in objects.items():
        if not isinstance(v, str):
            raise KbParseError(f"{where} ({ind_id}): object property '{k}' must name an individual")
    annotations: dict[str, list[str]] = {}
    for k, v in annotations_raw.items():
        if not isinstance(v, list) or not all(isinstance(item, str) for item in v):
            raise KbParseError(f"{where} ({ind_id}): annotation '{k}' must be a list of strings")
        annotations[str(k)] = list(v)
    return Individual(id=ind_id, concept=concept, data=data, objects=dict(objects), annotations=annotations)


def load_kb(path: str | Path, *, check: bool = True) -> KnowledgeBase:
    """Load a knowledge base file, failing atomically on any violation.

    With check=False the consistency pass is skipped so callers (kb-check)
    can inspect a broken file's violations themselves.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise KbParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise KbParseError(f"{path}: parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise KbParseError(f"{path}: top level must be an object")

    raw_concepts = doc.get("concepts", [])
    if not isinstance(raw_concepts, list):
        raise KbParseError(f"{path}: 'concepts' must be a list")
    if not raw_concepts:
        raise KbParseError(f"{path}: empty knowledge base (no concepts)")

    concepts: dict[str, Concept] = {}
    for i, raw in enumerate(raw_concepts):
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str) or not raw["name"]:
            raise KbParseError(f"{path}: concepts[{i}]: missing field 'name'")
        name = raw["name"]
        if name in concepts:
            raise KbParseError(f"{path}: duplicate concept name '{name}'")
        parent = raw.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise KbParseError(f"{path}: concepts[{i}] ({name}): 'parent' must be a string")
        disjoint = raw.get("disjoint_with", [])
        if not isinstance(disjoint, list) or not all(isinstance(d, str) for d in disjoint):
            raise KbParseError(f"{path}: concepts[{i}] ({name}): 'disjoint_with' must be a list of names")
        concepts[name] = Concept(name=name, parent=parent, disjoint_with=frozenset(disjoint))

    # disjointness is symmetric after loading
    for concept in list(concepts.values()):
        for other in concept.disjoint_with:
            if other in concepts and concept.name not in concepts[other].disjoint_with:
                mirrored = concepts[other]
                concepts[other] = Concept(
                    name=mirrored.name,
                    parent=mirrored.parent,
                    disjoint_with=mirrored.disjoint_with | {concept.name},
                )

    raw_individuals = doc.get("individuals", [])
    if not isinstance(raw_individuals, list):
        raise KbParseError(f"{path}: 'individuals' must be a list")
    individuals = [_parse_individual(raw, i) for i, raw in enumerate(raw_individuals)]

    meta_raw = doc.get("meta", {})
    meta: dict[str, list[str]] = {}
    if not isinstance(meta_raw, dict):
        raise KbParseError(f"{path}: 'meta' must be an object")
    for k, v in meta_raw.items():
        meta[str(k)] = [str(item) for item in v] if isinstance(v, list) else [str(v)]

    kb = KnowledgeBase(concepts=concepts, individuals=individuals, meta=meta)
    if check:
        violations = kb.check_consistency()
        if violations:
            raise KbInvariantError(violations)
    return kb


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Serialize in canonical form (load/save/load round-trips equal)."""
    Path(path).write_text(
        json.dumps(kb.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
