import datetime as dt
import json

import pytest

from covassist.ingest import StatusRecord
from covassist.kb import (
    Concept,
    Individual,
    KbInvariantError,
    KbParseError,
    KnowledgeBase,
    StatusView,
    TrendValue,
    load_kb,
    save_kb,
)
from covassist.resources import fixture_path

RETRIEVED = dt.date(2020, 9, 27)


def small_kb(**overrides) -> KnowledgeBase:
    concepts = {
        "Country": Concept("Country", disjoint_with=frozenset({"Region"})),
        "Region": Concept("Region", disjoint_with=frozenset({"Country"})),
        "CurrentStatus": Concept("CurrentStatus"),
        "Trend": Concept("Trend"),
        "Symptom": Concept("Symptom"),
        "RelatedWord": Concept("RelatedWord"),
    }
    individuals = [
        Individual("tunisia", "Country", data={"Label": "Tunisia"}),
        Individual("world", "Region", data={"Label": "World"}),
        Individual(
            "tunisia_status",
            "CurrentStatus",
            data={"Cases": 100, "Deaths": 3, "Recovered": 50, "Retrieved": RETRIEVED},
            objects={"Country": "tunisia"},
        ),
    ]
    kwargs = {"concepts": concepts, "individuals": individuals, "meta": {}}
    kwargs.update(overrides)
    return KnowledgeBase(**kwargs)


class TestLoad:
    def test_fixture_loads_with_six_concepts(self, kb):
        # hand count of the shipped fixture
        assert len(kb.concepts) == 6
        assert kb.individual("tunisia") is not None
        assert kb.individual("tunisia_status") is not None

    def test_empty_concepts_rejected(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text(json.dumps({"concepts": [], "individuals": []}))
        with pytest.raises(KbParseError, match="empty knowledge base"):
            load_kb(f)

    def test_unknown_concept_named_in_error(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text(
            json.dumps(
                {
                    "concepts": [{"name": "Country"}],
                    "individuals": [{"id": "mars", "concept": "Planet"}],
                }
            )
        )
        with pytest.raises(KbInvariantError, match="Planet"):
            load_kb(f)

    def test_parse_error_reports_location(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text('{"concepts": [,]}')
        with pytest.raises(KbParseError, match="line 1"):
            load_kb(f)

    def test_duplicate_concept_rejected(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text(json.dumps({"concepts": [{"name": "A"}, {"name": "A"}]}))
        with pytest.raises(KbParseError, match="duplicate"):
            load_kb(f)

    def test_disjointness_symmetrized_on_load(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text(
            json.dumps(
                {
                    "concepts": [{"name": "A", "disjoint_with": ["B"]}, {"name": "B"}],
                    "individuals": [],
                }
            )
        )
        loaded = load_kb(f)
        assert "A" in loaded.concepts["B"].disjoint_with

    def test_load_fails_atomically_on_violation(self, tmp_path):
        f = tmp_path / "kb.json"
        f.write_text(
            json.dumps(
                {
                    "concepts": [{"name": "Country"}],
                    "individuals": [
                        {"id": "x", "concept": "Country", "object": {"Country": "ghost"}}
                    ],
                }
            )
        )
        with pytest.raises(KbInvariantError, match="ghost"):
            load_kb(f)


class TestConsistency:
    def test_fixture_is_consistent(self, kb):
        assert kb.check_consistency() == []

    def test_region_and_country_one_disjointness_violation(self):
        base = small_kb()
        base.individuals.append(Individual("world", "Country"))
        violations = base.check_consistency()
        disjoint = [v for v in violations if v.kind == "disjointness"]
        assert len(disjoint) == 1
        assert disjoint[0].entity == "world"

    def test_any_region_individual_asserted_as_country_is_flagged(self, kb):
        regions = [i for i in kb.individuals if i.concept == "Region"]
        assert regions
        for region in regions:
            mutated = KnowledgeBase(
                concepts=dict(kb.concepts),
                individuals=list(kb.individuals) + [Individual(region.id, "Country")],
                meta={},
            )
            assert mutated.check_consistency() != []

    def test_status_missing_deaths_one_violation(self):
        base = small_kb()
        base.individuals.append(
            Individual(
                "france_status",
                "CurrentStatus",
                data={"Cases": 10, "Recovered": 2, "Retrieved": RETRIEVED},
            )
        )
        violations = [v for v in base.check_consistency() if v.kind == "missing_property"]
        assert len(violations) == 1
        assert "Deaths" in violations[0].detail

    def test_dangling_object_target(self):
        base = small_kb()
        base.individuals.append(
            Individual("ghost_trend", "Trend", data={"Value": "stable"}, objects={"Country": "ghost"})
        )
        kinds = [v.kind for v in base.check_consistency()]
        assert "dangling_ref" in kinds

    def test_hierarchy_cycle_detected(self):
        base = small_kb(
            concepts={
                "A": Concept("A", parent="B"),
                "B": Concept("B", parent="A"),
            },
            individuals=[],
        )
        assert any(v.kind == "cycle" for v in base.check_consistency())

    def test_consistent_kb_has_no_dangling_targets(self, kb):
        ids = {i.id for i in kb.individuals}
        assert all(t in ids for i in kb.individuals for t in i.objects.values())


class TestStatusOf:
    def test_tunisia_round_trip(self, kb):
        view = kb.status_of("tunisia")
        assert (view.cases, view.deaths, view.recovered) == (100, 3, 50)
        assert view.region_name == "Tunisia"
        assert view.retrieved == RETRIEVED
        assert view.publisher == "Wikipedia"

    def test_world_region(self, kb):
        view = kb.status_of("world")
        assert view is not None
        assert view.region_name == "World"
        assert view.cases == 32930802

    def test_unknown_region_absent(self, kb):
        assert kb.status_of("atlantis") is None

    def test_case_and_whitespace_insensitive(self, kb):
        assert kb.status_of("  TUNISIA ").cases == 100
        assert kb.status_of("united states").cases == 7078798

    def test_trend_resolved(self, kb):
        assert kb.status_of("tunisia").trend is TrendValue.INCREASING
        assert kb.status_of("egypt").trend is TrendValue.DECREASING

    def test_view_invariants_enforced(self):
        with pytest.raises(ValueError, match="deaths"):
            StatusView("X", cases=5, deaths=9, recovered=0, retrieved=RETRIEVED, trend=TrendValue.UNKNOWN)
        with pytest.raises(ValueError, match="recovered"):
            StatusView("X", cases=5, deaths=0, recovered=9, retrieved=RETRIEVED, trend=TrendValue.UNKNOWN)


class TestSymptoms:
    def test_fixture_order_and_values(self, kb):
        rows = kb.symptoms()
        assert [(s.name, s.prevalence_percent) for s in rows] == [
            ("Fever", 98.6),
            ("Fatigue", 69.6),
            ("Dry cough", 59.4),
            ("Myalgia", 34.8),
            ("Dyspnea", 31.2),
        ]
        assert "high temperature" in rows[0].synonyms

    def test_no_symptoms_empty(self):
        base = small_kb()
        assert base.symptoms() == []

    def test_equal_prevalence_lexicographic(self):
        base = small_kb()
        base.individuals += [
            Individual("zeta", "Symptom", data={"Label": "Zeta"}, annotations={"Prevalence": ["10"]}),
            Individual("alpha", "Symptom", data={"Label": "Alpha"}, annotations={"Prevalence": ["10"]}),
        ]
        assert [s.name for s in base.symptoms()] == ["Alpha", "Zeta"]

    def test_output_is_permutation_sorted_nonincreasing(self, kb):
        rows = kb.symptoms()
        labels = sorted(i.label() for i in kb.individuals if i.concept == "Symptom")
        assert sorted(s.name for s in rows) == labels
        assert all(a.prevalence_percent >= b.prevalence_percent for a, b in zip(rows, rows[1:]))


class TestRelatedWords:
    def test_fixture_set(self, kb):
        assert kb.related_words() == {"covid", "coronavirus", "pandemic"}

    def test_empty_without_individuals(self):
        assert small_kb().related_words() == set()

    def test_mixed_case_lowercased(self):
        base = small_kb()
        base.individuals.append(Individual("corona", "RelatedWord", data={"Label": "CoRoNa"}))
        assert base.related_words() == {"corona"}


class TestUpsert:
    def record(self, **overrides) -> StatusRecord:
        defaults = dict(
            region="Tunisia",
            cases=200,
            deaths=5,
            recovered=90,
            retrieved=dt.date(2020, 10, 4),
            source_url="https://example.org",
            publisher="Example",
        )
        defaults.update(overrides)
        return StatusRecord(**defaults)

    def test_newer_record_replaces(self, kb):
        updated = kb.upsert_status(self.record(), TrendValue.INCREASING)
        view = updated.status_of("tunisia")
        assert (view.cases, view.deaths, view.recovered) == (200, 5, 90)
        statuses = [
            i for i in updated.individuals
            if i.concept == "CurrentStatus" and i.objects.get("Country") == "tunisia"
        ]
        assert len(statuses) == 1

    def test_idempotent(self, kb):
        once = kb.upsert_status(self.record(), TrendValue.STABLE)
        twice = once.upsert_status(self.record(), TrendValue.STABLE)
        assert once == twice

    def test_unseen_country_created_and_consistent(self, kb):
        updated = kb.upsert_status(self.record(region="Atlantis"), TrendValue.UNKNOWN)
        assert updated.check_consistency() == []
        assert updated.status_of("atlantis").cases == 200

    def test_read_your_write(self, kb):
        record = self.record(region="France", cases=777777, deaths=3, recovered=4)
        assert kb.upsert_status(record, TrendValue.UNKNOWN).status_of("France").cases == 777777

    def test_world_keeps_region_link(self, kb):
        record = self.record(region="World", cases=99999999, deaths=1, recovered=2)
        updated = kb.upsert_status(record, TrendValue.STABLE)
        status = [
            i for i in updated.individuals
            if i.concept == "CurrentStatus" and i.objects.get("Region") == "world"
        ]
        assert len(status) == 1
        assert updated.check_consistency() == []

    def test_inconsistent_record_rejected(self, kb):
        # kb re-checks counts even if a caller bypasses StatusRecord validation
        from types import SimpleNamespace

        bogus = SimpleNamespace(
            region="Tunisia", cases=5, deaths=9, recovered=0,
            retrieved=RETRIEVED, source_url="", publisher="",
        )
        with pytest.raises(ValueError, match="deaths"):
            kb.upsert_status(bogus, TrendValue.UNKNOWN)

    def test_original_untouched(self, kb):
        before = len(kb.individuals)
        kb.upsert_status(self.record(region="Atlantis"), TrendValue.UNKNOWN)
        assert len(kb.individuals) == before


class TestRoundTrip:
    def test_load_save_load_equal_canonical(self, kb, tmp_path):
        path = tmp_path / "roundtrip.json"
        save_kb(kb, path)
        again = load_kb(path)
        assert again.to_dict() == kb.to_dict()
        # and a second cycle is byte-stable
        path2 = tmp_path / "roundtrip2.json"
        save_kb(again, path2)
        assert path.read_text() == path2.read_text()

    def test_dates_round_trip_typed(self, kb, tmp_path):
        path = tmp_path / "kb.json"
        save_kb(kb, path)
        assert load_kb(path).status_of("tunisia").retrieved == RETRIEVED
