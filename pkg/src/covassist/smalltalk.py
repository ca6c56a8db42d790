"""Retrieval-based fallback responder for general conversation.

Picks the stored response whose prompt is most similar to the input
(token-set Jaccard). Below the threshold it returns a default nudge that
steers the user back to disease questions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

DEFAULT_THRESHOLD = 0.3
DEFAULT_RESPONSE = (
    "I am not sure I understood that. I am best at COVID-19 questions: "
    "ask me about a country, the symptoms, or the worldwide situation."
)

_TOKEN_RE = re.compile(r"[a-z0-9']+")


class CorpusError(Exception):
    pass


@dataclass
class Corpus:
    packages: dict[str, list[tuple[str, str]]]

    def __post_init__(self) -> None:
        if not self.packages:
            raise CorpusError("corpus has no packages")
        for name, pairs in self.packages.items():
            if not pairs:
                raise CorpusError(f"package '{name}' is empty")

    def __len__(self) -> int:
        return sum(len(pairs) for pairs in self.packages.values())


@dataclass(frozen=True)
class MatchResult:
    response: str
    score: float
    package: str


def load_corpus(path: str | Path) -> Corpus:
    """Load {"packages": {name: [[prompt, response], ...]}}.

    Prompts are normalized to lowercase; a duplicate prompt within a package
    keeps its position but the later response wins.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: parse error: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("packages"), dict):
        raise CorpusError(f"{path}: expected a top-level 'packages' object")

    packages: dict[str, list[tuple[str, str]]] = {}
    for name, raw_pairs in doc["packages"].items():
        if not isinstance(raw_pairs, list):
            raise CorpusError(f"{path}: package '{name}' must be a list of pairs")
        pairs: list[tuple[str, str]] = []
        index: dict[str, int] = {}
        for i, raw in enumerate(raw_pairs):
            if not (isinstance(raw, list) and len(raw) == 2 and all(isinstance(x, str) for x in raw)):
                raise CorpusError(f"{path}: package '{name}' entry {i}: expected [prompt, response]")
            prompt = " ".join(raw[0].split()).lower()
            response = raw[1]
            if not prompt or not response:
                raise CorpusError(f"{path}: package '{name}' entry {i}: empty prompt or response")
            if prompt in index:
                pairs[index[prompt]] = (prompt, response)
            else:
                index[prompt] = len(pairs)
                pairs.append((prompt, response))
        packages[str(name)] = pairs
    return Corpus(packages=packages)


def _tokens(text: str) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(text.lower()))


def similarity(a: str, b: str) -> float:
    """Token-set Jaccard in [0, 1]; 1.0 for equal normalized texts."""
    ta, tb = _tokens(a), _tokens(b)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def best_response(
    text: str,
    corpus: Corpus,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    default: str = DEFAULT_RESPONSE,
) -> MatchResult:
    """Most similar prompt's response; the default nudge below threshold.

    Ties keep the earlier corpus entry (package order, then entry order).
    """
    best: MatchResult | None = None
    for package, pairs in corpus.packages.items():
        for prompt, response in pairs:
            score = similarity(text, prompt)
            if best is None or score > best.score:
                best = MatchResult(response=response, score=score, package=package)
    if best is None or best.score < threshold:
        return MatchResult(response=default, score=0.0, package="default")
    return best
