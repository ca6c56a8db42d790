"""Rapid Automatic Keyword Extraction (RAKE) over a single utterance.

Pipeline: candidate phrases -> co-occurrence graph -> word scores
(degree/frequency) -> phrase scores -> adjoined keyphrases -> top-T cut.
Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .resources import fixture_path

# Sentence punctuation plus the bracket/dash/slash family; all of these break
# candidate phrases.
DEFAULT_DELIMITERS = frozenset('.,;:!?()[]{}"-/')

_REQUIRED_DELIMITERS = frozenset(".,;!?")


@dataclass(frozen=True)
class StopwordList:
    words: frozenset[str]
    delimiters: frozenset[str] = DEFAULT_DELIMITERS

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("stopword list must not be empty")
        missing = _REQUIRED_DELIMITERS - self.delimiters
        if missing:
            raise ValueError(f"delimiters must include sentence punctuation, missing: {sorted(missing)}")

    @classmethod
    def from_file(cls, path: str | Path) -> "StopwordList":
        """Read one lowercase word per line; '#' starts a comment."""
        words = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            word = line.split("#", 1)[0].strip().lower()
            if word:
                words.add(word)
        return cls(words=frozenset(words))


@lru_cache(maxsize=1)
def default_stopwords() -> StopwordList:
    """The shipped English stopword list."""
    return StopwordList.from_file(fixture_path("stopwords.txt"))


@dataclass(frozen=True)
class CandidatePhrase:
    """A maximal run of content words between stopwords/delimiters."""

    words: tuple[str, ...]
    span: tuple[int, int]  # half-open token offsets into the source token stream
    fragment: int  # index of the delimiter-separated fragment the run sits in

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("candidate phrase must contain at least one word")

    @property
    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class CooccurrenceGraph:
    freq: dict[str, int]
    degree: dict[str, int]


@dataclass(frozen=True)
class ScoredKeyword:
    phrase: str
    score: float


def _tokenize(text: str, delimiters: frozenset[str]) -> list[tuple[str, int]]:
    """Lowercase and split into (token, fragment) pairs.

    Whitespace separates tokens; delimiter characters separate tokens *and*
    start a new fragment. Digits are kept.
    """
    tokens: list[tuple[str, int]] = []
    current: list[str] = []
    fragment = 0
    for ch in text.lower():
        if ch in delimiters:
            if current:
                tokens.append(("".join(current), fragment))
                current = []
            fragment += 1
        elif ch.isspace():
            if current:
                tokens.append(("".join(current), fragment))
                current = []
        else:
            current.append(ch)
    if current:
        tokens.append(("".join(current), fragment))
    return tokens


def candidate_phrases(text: str, stops: StopwordList | None = None) -> list[CandidatePhrase]:
    """Split text into candidate phrases, in source order."""
    stops = stops or default_stopwords()
    tokens = _tokenize(text, stops.delimiters)
    phrases: list[CandidatePhrase] = []
    run: list[str] = []
    run_start = 0
    run_fragment = -1

    def flush(end: int) -> None:
        if run:
            phrases.append(CandidatePhrase(tuple(run), (run_start, end), run_fragment))

    for i, (token, fragment) in enumerate(tokens):
        if token in stops.words:
            flush(i)
            run = []
            continue
        if run and fragment != run_fragment:
            flush(i)
            run = []
        if not run:
            run_start = i
            run_fragment = fragment
        run.append(token)
    flush(len(tokens))
    return phrases


def build_graph(phrases: list[CandidatePhrase]) -> CooccurrenceGraph:
    """Word frequency and degree over the candidate phrases.

    degree(w) = freq(w) + number of co-occurring words, i.e. every occurrence
    of w in a phrase of length n contributes n to the degree.
    """
    freq: Counter[str] = Counter()
    degree: Counter[str] = Counter()
    for phrase in phrases:
        n = len(phrase.words)
        for word in phrase.words:
            freq[word] += 1
            degree[word] += n
    return CooccurrenceGraph(freq=dict(freq), degree=dict(degree))


def word_scores(graph: CooccurrenceGraph) -> dict[str, float]:
    """score(w) = degree(w) / freq(w)."""
    return {word: graph.degree[word] / graph.freq[word] for word in graph.freq}


def phrase_scores(
    phrases: list[CandidatePhrase], scores: dict[str, float]
) -> list[ScoredKeyword]:
    """Score each phrase as the sum of its member word scores, order preserved."""
    return [
        ScoredKeyword(phrase.text, sum(scores[w] for w in phrase.words))
        for phrase in phrases
    ]


def _adjoined(
    text: str, phrases: list[CandidatePhrase], stops: StopwordList
) -> list[tuple[ScoredKeyword, int]]:
    """Adjoined keyphrases with the token offset of their first occurrence.

    An ordered pair of phrases adjacent more than twice (separated only by
    stopwords, within one fragment) yields one combined keyphrase that keeps
    the interior stopwords of its first occurrence; its score is the sum of
    the two phrase scores.
    """
    tokens = _tokenize(text, stops.delimiters)
    scores = word_scores(build_graph(phrases))

    def phrase_score(p: CandidatePhrase) -> float:
        return sum(scores[w] for w in p.words)

    counts: Counter[tuple[tuple[str, ...], tuple[str, ...]]] = Counter()
    first: dict[tuple[tuple[str, ...], tuple[str, ...]], tuple[str, float, int]] = {}
    ordered = sorted(phrases, key=lambda p: p.span[0])
    for left, right in zip(ordered, ordered[1:]):
        if left.fragment != right.fragment:
            continue
        pair = (left.words, right.words)
        counts[pair] += 1
        if pair not in first:
            surface = " ".join(t for t, _ in tokens[left.span[0] : right.span[1]])
            first[pair] = (surface, phrase_score(left) + phrase_score(right), left.span[0])

    out = []
    for pair, n in counts.items():
        if n > 2:
            surface, score, pos = first[pair]
            out.append((ScoredKeyword(surface, score), pos))
    out.sort(key=lambda item: item[1])
    return out


def adjoin_keywords(
    text: str, phrases: list[CandidatePhrase], stops: StopwordList | None = None
) -> list[ScoredKeyword]:
    """Combined keyphrases for phrase pairs adjacent more than twice."""
    stops = stops or default_stopwords()
    return [kw for kw, _ in _adjoined(text, phrases, stops)]


def ranked_keywords(text: str, stops: StopwordList | None = None) -> list[ScoredKeyword]:
    """Full ranked keyword list, untruncated.

    Candidates are deduplicated by phrase text (first occurrence kept) and
    compete with adjoined keyphrases in a single pool, sorted score-descending
    with first occurrence in the source as the tiebreak.
    """
    stops = stops or default_stopwords()
    phrases = candidate_phrases(text, stops)
    scores = word_scores(build_graph(phrases))
    scored = phrase_scores(phrases, scores)

    pool: list[tuple[ScoredKeyword, int]] = []
    seen: set[str] = set()
    for phrase, keyword in zip(phrases, scored):
        if keyword.phrase in seen:
            continue
        seen.add(keyword.phrase)
        pool.append((keyword, phrase.span[0]))
    pool.extend(_adjoined(text, phrases, stops))

    pool.sort(key=lambda item: (-item[0].score, item[1]))
    return [kw for kw, _ in pool]


def extract(
    text: str, stops: StopwordList | None = None, t: int | None = None
) -> list[ScoredKeyword]:
    """Top-T keywords; T defaults to max(1, floor(|graph vertices| / 3))."""
    if t is not None and t < 1:
        raise ValueError("t must be a positive integer")
    stops = stops or default_stopwords()
    ranked = ranked_keywords(text, stops)
    if t is None:
        vertices = len(build_graph(candidate_phrases(text, stops)).freq)
        t = max(1, vertices // 3)
    return ranked[:t]
