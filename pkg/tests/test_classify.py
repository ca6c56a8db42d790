import pytest

from covassist.classify import (
    Classification,
    Gazetteer,
    GazetteerError,
    RequestKind,
    classify,
    load_gazetteer,
    resolve_country,
)
from covassist.rake import ScoredKeyword, ranked_keywords
from covassist.resources import fixture_path

from oracles import countries_mentioned


def kws(*phrases):
    # descending scores, as the extractor guarantees
    return [ScoredKeyword(p, float(len(phrases) - i)) for i, p in enumerate(phrases)]


class TestGazetteer:
    def test_fixture_loads_with_enough_countries(self, gazetteer):
        assert len(gazetteer.countries) >= 50
        for name in ("Tunisia", "France", "Italy", "United States"):
            assert name in gazetteer.countries

    def test_alias_and_city_targets_are_countries(self, gazetteer):
        assert set(gazetteer.aliases.values()) <= gazetteer.countries
        assert set(gazetteer.cities.values()) <= gazetteer.countries

    def test_centroids_in_range(self, gazetteer):
        for lat, lon in gazetteer.centroids.values():
            assert -90 <= lat <= 90 and -180 <= lon <= 180

    def test_bad_city_target_rejected(self):
        with pytest.raises(GazetteerError, match="narnia"):
            Gazetteer(countries={"France"}, cities={"narnia": "Narnia"})

    def test_bad_centroid_rejected(self):
        with pytest.raises(GazetteerError, match="out of range"):
            Gazetteer(countries={"France"}, centroids={"France": (120.0, 0.0)})


class TestResolveCountry:
    def test_capital_resolves_to_country(self, gazetteer):
        assert resolve_country("tunis", gazetteer) == "Tunisia"

    def test_identity(self, gazetteer):
        assert resolve_country("Tunisia", gazetteer) == "Tunisia"

    def test_unknown_token_absent(self, gazetteer):
        assert resolve_country("pizza", gazetteer) is None

    def test_multiword_scanned_word_by_word(self, gazetteer):
        assert resolve_country("status tunisia today", gazetteer) == "Tunisia"

    def test_alias(self, gazetteer):
        assert resolve_country("usa", gazetteer) == "United States"

    def test_total_and_fixed_on_canonicals(self, gazetteer):
        for country in gazetteer.countries:
            assert resolve_country(country, gazetteer) == country
            assert resolve_country(country.upper(), gazetteer) == country


class TestClassify:
    def test_country_request(self, kb, gazetteer):
        keywords = ranked_keywords("what is the current status of Tunisia")
        got = classify(keywords, kb, gazetteer)
        assert got.kind is RequestKind.COUNTRY
        assert got.matched == ("Tunisia",)
        assert got.keyword == "tunisia"

    def test_symptom_request(self, kb, gazetteer):
        got = classify(kws("fever"), kb, gazetteer)
        assert got.kind is RequestKind.SYMPTOM
        assert got.matched == ()

    def test_symptom_synonym_and_plural_trigger(self, kb, gazetteer):
        assert classify(kws("cough"), kb, gazetteer).kind is RequestKind.SYMPTOM
        assert classify(kws("symptoms"), kb, gazetteer).kind is RequestKind.SYMPTOM

    def test_global_info_request(self, kb, gazetteer):
        got = classify(kws("coronavirus"), kb, gazetteer)
        assert got.kind is RequestKind.GLOBAL_INFO

    def test_unknown(self, kb, gazetteer):
        got = classify(ranked_keywords("hello there friend"), kb, gazetteer)
        assert got.kind is RequestKind.UNKNOWN
        assert got.matched == ()

    def test_two_countries_in_first_mention_order(self, kb, gazetteer):
        text = "france or italy"
        keywords = ranked_keywords(text)
        got = classify(keywords, kb, gazetteer)
        oracle = countries_mentioned(text, gazetteer.countries, gazetteer.aliases, gazetteer.cities)
        assert got.kind is RequestKind.COUNTRY
        assert list(got.matched) == oracle == ["France", "Italy"]

    def test_country_beats_symptom(self, kb, gazetteer):
        got = classify(ranked_keywords("fever in Tunisia"), kb, gazetteer)
        assert got.kind is RequestKind.COUNTRY
        assert got.matched == ("Tunisia",)

    def test_country_beats_global(self, kb, gazetteer):
        got = classify(ranked_keywords("covid cases in france"), kb, gazetteer)
        assert got.kind is RequestKind.COUNTRY
        assert "France" in got.matched

    def test_symptom_beats_global(self, kb, gazetteer):
        got = classify(kws("covid", "fever"), kb, gazetteer)
        assert got.kind is RequestKind.SYMPTOM

    def test_city_inside_keyword(self, kb, gazetteer):
        got = classify(ranked_keywords("do you have news from tunis"), kb, gazetteer)
        assert got.kind is RequestKind.COUNTRY
        assert got.matched == ("Tunisia",)

    def test_keyword_is_highest_scored_trigger(self, kb, gazetteer):
        got = classify(kws("paris weather", "rome"), kb, gazetteer)
        assert got.keyword == "paris weather"
        assert list(got.matched) == ["France", "Italy"]

    def test_empty_keywords_unknown(self, kb, gazetteer):
        assert classify([], kb, gazetteer).kind is RequestKind.UNKNOWN

    def test_classification_invariants(self):
        with pytest.raises(ValueError):
            Classification(RequestKind.COUNTRY, ())
        with pytest.raises(ValueError):
            Classification(RequestKind.SYMPTOM, ("France",))

    def test_duplicate_mentions_collapse(self, kb, gazetteer):
        got = classify(kws("france", "paris"), kb, gazetteer)
        assert got.matched == ("France",)

    def test_fixture_paths_exist(self):
        assert fixture_path("gazetteer.json").exists()
