"""The chatbot engine: a six-state machine with nine named transitions.

A session only ever rests in Start, Discovery or Confirmation; the other
three states (Classification, TrainedBot, Ontology) are traversed within a
single turn. Every turn records its transition trace, which must replay as
a path on the automaton exposed by `automaton()` - the same table drives
both the engine and the model-checking suite.
"""

from __future__ import annotations

import re
import secrets
import string
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from . import rake, smalltalk
from .classify import Classification, Gazetteer, RequestKind, classify
from .kb import KnowledgeBase, StatusView, SymptomInfo
from .rake import StopwordList
from .resources import fixture_path
from .smalltalk import Corpus
from .verify import Automaton


class DialogueState(str, Enum):
    START = "Start"
    DISCOVERY = "Discovery"
    CLASSIFICATION = "Classification"
    TRAINED_BOT = "TrainedBot"
    CONFIRMATION = "Confirmation"
    ONTOLOGY = "Ontology"


class TransitionLabel(str, Enum):
    CONVERSATION_STARTS = "ConversationStarts"
    GET_TYPE = "GetType"
    GET_RESPONSE2 = "GetResponse2"
    NEED_CONFIRMATION = "NeedConfirmation"
    KEEP_SPEAKING = "KeepSpeaking"
    NEW_REQUEST = "NewRequest"
    GET_RESPONSE1 = "GetResponse1"
    NOT_CONFIRM = "NotConfirm"
    GO_DISCOVERY = "GoDiscovery"


# Single source of truth for the wiring; automaton() and the per-turn
# traversal helper both read from this table.
TRANSITIONS: dict[TransitionLabel, tuple[DialogueState, DialogueState]] = {
    TransitionLabel.CONVERSATION_STARTS: (DialogueState.START, DialogueState.DISCOVERY),
    TransitionLabel.GET_TYPE: (DialogueState.DISCOVERY, DialogueState.CLASSIFICATION),
    TransitionLabel.GET_RESPONSE2: (DialogueState.CLASSIFICATION, DialogueState.ONTOLOGY),
    TransitionLabel.NEED_CONFIRMATION: (DialogueState.CLASSIFICATION, DialogueState.CONFIRMATION),
    TransitionLabel.KEEP_SPEAKING: (DialogueState.CLASSIFICATION, DialogueState.TRAINED_BOT),
    TransitionLabel.NEW_REQUEST: (DialogueState.TRAINED_BOT, DialogueState.DISCOVERY),
    TransitionLabel.GET_RESPONSE1: (DialogueState.CONFIRMATION, DialogueState.ONTOLOGY),
    TransitionLabel.NOT_CONFIRM: (DialogueState.CONFIRMATION, DialogueState.DISCOVERY),
    TransitionLabel.GO_DISCOVERY: (DialogueState.ONTOLOGY, DialogueState.DISCOVERY),
}

REST_STATES = frozenset(
    {DialogueState.START, DialogueState.DISCOVERY, DialogueState.CONFIRMATION}
)

REPLY_KEYS = (
    "greeting",
    "name_reprompt",
    "name_ack",
    "empty_input",
    "confirm_one",
    "confirm_one_retry",
    "confirm_many",
    "confirm_many_retry",
    "not_confirmed",
    "status_card",
    "status_missing",
    "symptoms_intro",
    "global_reply",
    "smalltalk_default",
)


def automaton() -> Automaton:
    """The dialogue FSM as a labeled graph (6 states, 9 transitions)."""
    edges = frozenset(
        (source.value, label.value, target.value)
        for label, (source, target) in TRANSITIONS.items()
    )
    return Automaton(
        states=frozenset(state.value for state in DialogueState),
        initial=DialogueState.START.value,
        edges=edges,
    )


def load_replies(path: str | Path | None = None) -> dict[str, str]:
    """Reply strings table; validates all required keys are present."""
    if path is None:
        return _default_replies()
    with open(path, "rb") as f:
        table = tomllib.load(f)
    missing = [key for key in REPLY_KEYS if key not in table]
    if missing:
        raise ValueError(f"replies table missing keys: {', '.join(missing)}")
    return {key: str(value) for key, value in table.items()}


@lru_cache(maxsize=1)
def _default_replies() -> dict[str, str]:
    return load_replies(fixture_path("replies.toml"))


# -- reply payloads -----------------------------------------------------------


@dataclass(frozen=True)
class StatusCard:
    view: StatusView


@dataclass(frozen=True)
class SymptomList:
    items: tuple[SymptomInfo, ...]


@dataclass(frozen=True)
class MapRef:
    region: str | None = None


Attachment = StatusCard | SymptomList | MapRef


@dataclass(frozen=True)
class BotReply:
    text: str
    attachment: Attachment | None = None
    quick_replies: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("bot replies must not be empty")


@dataclass(frozen=True)
class Context:
    user_name: str | None = None
    pending: Classification | None = None
    candidate_countries: tuple[str, ...] = ()
    trace: tuple[tuple[DialogueState, TransitionLabel], ...] = ()


@dataclass(frozen=True)
class DialogueSession:
    id: str
    rest_state: DialogueState
    context: Context = field(default_factory=Context)

    def __post_init__(self) -> None:
        if self.rest_state not in REST_STATES:
            raise ValueError(f"sessions cannot rest in transient state {self.rest_state.value}")
        awaiting = self.rest_state is DialogueState.CONFIRMATION
        if awaiting != bool(self.context.candidate_countries):
            raise ValueError("candidate countries must be pending exactly while confirming")


def new_session(replies: dict[str, str] | None = None) -> tuple[DialogueSession, BotReply]:
    """Fresh session in Start with the self-introducing greeting."""
    replies = replies or _default_replies()
    session = DialogueSession(id=secrets.token_hex(16), rest_state=DialogueState.START)
    return session, BotReply(text=replies["greeting"])


_NAME_PATTERNS = (
    re.compile(r"^my name is (?P<name>.+)$", re.IGNORECASE),
    re.compile(r"^i am (?P<name>.+)$", re.IGNORECASE),
    re.compile(r"^i'm (?P<name>.+)$", re.IGNORECASE),
)

_MAX_NAME_WORDS = 3


def extract_name(text: str) -> str | None:
    """Pull a name out of 'my name is X' / 'i am X' / "i'm X" / a bare token.

    Returns the name capitalized, or None to trigger the re-prompt loop.
    """
    cleaned = " ".join(text.split())
    candidate: str | None = None
    for pattern in _NAME_PATTERNS:
        match = pattern.match(cleaned)
        if match:
            candidate = match.group("name")
            break
    else:
        tokens = cleaned.split()
        if len(tokens) == 1:
            candidate = tokens[0]
    if candidate is None:
        return None
    words = [word.strip(string.punctuation) for word in candidate.split()]
    words = [word for word in words if word and all(ch.isalpha() or ch in "'-" for ch in word)]
    if not words or len(words) > _MAX_NAME_WORDS:
        return None
    return " ".join(word[:1].upper() + word[1:] for word in words)


class UnknownSessionError(KeyError):
    pass


def step(
    session: DialogueSession,
    user_text: str,
    kb: KnowledgeBase,
    gaz: Gazetteer,
    corpus: Corpus,
    *,
    stops: StopwordList | None = None,
    replies: dict[str, str] | None = None,
) -> tuple[DialogueSession, BotReply]:
    """Run exactly one conversation turn.

    Transient states are traversed inside the call; the returned session is
    at rest again and carries the turn's transition trace in its context.
    """
    replies = replies or _default_replies()
    text = user_text.strip()
    if not text:
        return replace(session, context=replace(session.context, trace=())), BotReply(
            text=replies["empty_input"]
        )
    if session.rest_state is DialogueState.START:
        return _start_turn(session, text, replies)
    if session.rest_state is DialogueState.DISCOVERY:
        return _discovery_turn(session, text, kb, gaz, corpus, stops, replies)
    return _confirmation_turn(session, text, kb, replies)


def _take(
    trace: list[tuple[DialogueState, TransitionLabel]],
    current: DialogueState,
    label: TransitionLabel,
) -> DialogueState:
    source, target = TRANSITIONS[label]
    if source is not current:
        raise RuntimeError(f"transition {label.value} does not leave {current.value}")
    trace.append((current, label))
    return target


def _start_turn(
    session: DialogueSession, text: str, replies: dict[str, str]
) -> tuple[DialogueSession, BotReply]:
    name = extract_name(text)
    if name is None:
        # loop fragment of the name-retrieval flow: re-prompt with an example
        unchanged = replace(session, context=replace(session.context, trace=()))
        return unchanged, BotReply(text=replies["name_reprompt"])
    trace: list[tuple[DialogueState, TransitionLabel]] = []
    _take(trace, DialogueState.START, TransitionLabel.CONVERSATION_STARTS)
    context = Context(user_name=name, trace=tuple(trace))
    return (
        replace(session, rest_state=DialogueState.DISCOVERY, context=context),
        BotReply(text=replies["name_ack"].format(name=name)),
    )


def _numbered(options: tuple[str, ...]) -> str:
    return "; ".join(f"{i}) {name}" for i, name in enumerate(options, start=1))


def _status_reply(view: StatusView | None, region: str, replies: dict[str, str]) -> BotReply:
    if view is None:
        return BotReply(text=replies["status_missing"].format(region=region))
    text = replies["status_card"].format(
        region=view.region_name,
        date=view.retrieved.isoformat(),
        cases=f"{view.cases:,}",
        deaths=f"{view.deaths:,}",
        recovered=f"{view.recovered:,}",
        trend=view.trend.value,
    )
    return BotReply(text=text, attachment=StatusCard(view))


def _symptom_reply(kb: KnowledgeBase, replies: dict[str, str]) -> BotReply:
    items = tuple(kb.symptoms())
    listed = []
    for name, synonyms, prevalence in items:
        entry = f"{name} ({prevalence:g}%)"
        if synonyms:
            entry += ", also called " + ", ".join(synonyms)
        listed.append(entry)
    text = replies["symptoms_intro"] + " " + "; ".join(listed) + "."
    return BotReply(text=text, attachment=SymptomList(items))


def _global_reply(kb: KnowledgeBase, replies: dict[str, str]) -> BotReply:
    view = kb.status_of("world")
    if view is None:
        return BotReply(
            text=replies["status_missing"].format(region="the world"),
            attachment=MapRef(),
        )
    text = replies["global_reply"].format(
        date=view.retrieved.isoformat(),
        cases=f"{view.cases:,}",
        deaths=f"{view.deaths:,}",
        recovered=f"{view.recovered:,}",
        trend=view.trend.value,
    )
    return BotReply(text=text, attachment=MapRef())


def _discovery_turn(
    session: DialogueSession,
    text: str,
    kb: KnowledgeBase,
    gaz: Gazetteer,
    corpus: Corpus,
    stops: StopwordList | None,
    replies: dict[str, str],
) -> tuple[DialogueSession, BotReply]:
    trace: list[tuple[DialogueState, TransitionLabel]] = []
    state = _take(trace, DialogueState.DISCOVERY, TransitionLabel.GET_TYPE)

    # classification wants the whole ranked list, not the top-T summary cut
    keywords = rake.ranked_keywords(text, stops)
    result = classify(keywords, kb, gaz)

    if result.kind is RequestKind.COUNTRY:
        _take(trace, state, TransitionLabel.NEED_CONFIRMATION)
        candidates = result.matched
        if len(candidates) == 1:
            reply = BotReply(
                text=replies["confirm_one"].format(country=candidates[0]),
                quick_replies=("yes", "no"),
            )
        else:
            reply = BotReply(
                text=replies["confirm_many"].format(options=_numbered(candidates)),
                quick_replies=tuple(str(i) for i in range(1, len(candidates) + 1)),
            )
        context = replace(
            session.context, pending=result, candidate_countries=candidates, trace=tuple(trace)
        )
        return replace(session, rest_state=DialogueState.CONFIRMATION, context=context), reply

    if result.kind in (RequestKind.SYMPTOM, RequestKind.GLOBAL_INFO):
        state = _take(trace, state, TransitionLabel.GET_RESPONSE2)
        if result.kind is RequestKind.SYMPTOM:
            reply = _symptom_reply(kb, replies)
        else:
            reply = _global_reply(kb, replies)
        _take(trace, state, TransitionLabel.GO_DISCOVERY)
        context = replace(session.context, pending=result, candidate_countries=(), trace=tuple(trace))
        return replace(session, rest_state=DialogueState.DISCOVERY, context=context), reply

    state = _take(trace, state, TransitionLabel.KEEP_SPEAKING)
    match = smalltalk.best_response(text, corpus, default=replies["smalltalk_default"])
    _take(trace, state, TransitionLabel.NEW_REQUEST)
    context = replace(session.context, pending=None, candidate_countries=(), trace=tuple(trace))
    return replace(session, rest_state=DialogueState.DISCOVERY, context=context), BotReply(
        text=match.response
    )


def _confirmation_turn(
    session: DialogueSession,
    text: str,
    kb: KnowledgeBase,
    replies: dict[str, str],
) -> tuple[DialogueSession, BotReply]:
    candidates = session.context.candidate_countries
    norm = text.lower()

    chosen: str | None = None
    if norm == "yes" and len(candidates) == 1:
        chosen = candidates[0]
    elif norm.isdigit() and 1 <= int(norm) <= len(candidates):
        chosen = candidates[int(norm) - 1]

    if chosen is not None:
        trace: list[tuple[DialogueState, TransitionLabel]] = []
        state = _take(trace, DialogueState.CONFIRMATION, TransitionLabel.GET_RESPONSE1)
        reply = _status_reply(kb.status_of(chosen), chosen, replies)
        _take(trace, state, TransitionLabel.GO_DISCOVERY)
        context = replace(session.context, pending=None, candidate_countries=(), trace=tuple(trace))
        return replace(session, rest_state=DialogueState.DISCOVERY, context=context), reply

    if norm == "no":
        trace = []
        _take(trace, DialogueState.CONFIRMATION, TransitionLabel.NOT_CONFIRM)
        context = replace(session.context, pending=None, candidate_countries=(), trace=tuple(trace))
        return replace(session, rest_state=DialogueState.DISCOVERY, context=context), BotReply(
            text=replies["not_confirmed"]
        )

    # anything else: re-ask and stay put (loop fragment of the confirmation flow)
    unchanged = replace(session, context=replace(session.context, trace=()))
    if len(candidates) == 1:
        reply = BotReply(
            text=replies["confirm_one_retry"].format(country=candidates[0]),
            quick_replies=("yes", "no"),
        )
    else:
        reply = BotReply(
            text=replies["confirm_many_retry"].format(options=_numbered(candidates)),
            quick_replies=tuple(str(i) for i in range(1, len(candidates) + 1)),
        )
    return unchanged, reply


def trace_is_path(
    trace: tuple[tuple[DialogueState, TransitionLabel], ...], start: DialogueState
) -> bool:
    """Replay a turn trace against the transition table from a rest state."""
    current = start
    for state, label in trace:
        if state is not current:
            return False
        source, target = TRANSITIONS[label]
        if source is not state:
            return False
        current = target
    return True
