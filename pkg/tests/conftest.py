import pytest

from covassist.classify import load_gazetteer
from covassist.kb import load_kb
from covassist.rake import default_stopwords
from covassist.resources import fixture_path
from covassist.smalltalk import load_corpus


@pytest.fixture(scope="session")
def kb():
    return load_kb(fixture_path("cvio.json"))


@pytest.fixture(scope="session")
def gazetteer():
    return load_gazetteer(fixture_path("gazetteer.json"))


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(fixture_path("corpus.json"))


@pytest.fixture(scope="session")
def stopwords():
    return default_stopwords()


@pytest.fixture(scope="session")
def snapshot_html():
    return fixture_path("snapshot-2020-10-04.html").read_text(encoding="utf-8")
