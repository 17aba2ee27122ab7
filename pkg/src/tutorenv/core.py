"""Shared domain types: actions, states, rewards, transactions.

All types here are immutable values with a canonical JSON text form. Equal
values serialize to byte-identical text, which the rest of the package relies
on for state deduplication and memo keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import MalformedSai

# Minimal action-type vocabulary. Tutors may register additional types in
# their graph files (e.g. "Reveal" for tutor-performed interface changes).
DEFAULT_ACTION_TYPES = frozenset(
    {"UpdateTextField", "ButtonPressed", "UpdateCheckbox", "Done"}
)


def canonical_json(doc) -> str:
    """Render a JSON-able document with sorted keys and fixed separators."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Sai:
    """A (selection, action_type, input) triple naming one interface action."""

    selection: str
    action_type: str
    input: str = ""

    def __post_init__(self):
        if not self.selection:
            raise MalformedSai("selection must be non-empty")
        if not self.action_type:
            raise MalformedSai("action_type must be non-empty")

    def to_json(self) -> str:
        return canonical_json([self.selection, self.action_type, self.input])

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.selection, self.action_type, self.input)


def parse_sai(text: str) -> Sai:
    """Parse a serialized triple back into a :class:`Sai`.

    Raises MalformedSai if the text is not a JSON array of exactly three
    strings.
    """
    try:
        doc = json.loads(text)
    except (ValueError, TypeError) as exc:
        raise MalformedSai(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, list) or len(doc) != 3:
        raise MalformedSai("expected a JSON array of three components")
    if not all(isinstance(part, str) for part in doc):
        raise MalformedSai("all three components must be strings")
    return Sai(doc[0], doc[1], doc[2])


class WidgetKind(str, Enum):
    TEXT_FIELD = "text_field"
    BUTTON = "button"
    CHECKBOX = "checkbox"
    LABEL = "label"


@dataclass(frozen=True)
class WidgetView:
    """One interface element: a box to fill, a button to press, or a label."""

    widget_id: str
    kind: WidgetKind = WidgetKind.TEXT_FIELD
    value: str = ""
    locked: bool = False
    visible: bool = True

    def to_dict(self) -> dict:
        return {
            "id": self.widget_id,
            "kind": self.kind.value,
            "value": self.value,
            "locked": self.locked,
            "visible": self.visible,
        }

    @staticmethod
    def from_dict(doc: dict) -> "WidgetView":
        return WidgetView(
            widget_id=doc["id"],
            kind=WidgetKind(doc.get("kind", "text_field")),
            value=doc.get("value", ""),
            locked=bool(doc.get("locked", False)),
            visible=bool(doc.get("visible", True)),
        )


@dataclass(frozen=True)
class ProblemState:
    """Snapshot of a tutor interface: widgets plus the done flag.

    Widget insertion order is irrelevant; serialization sorts by widget id so
    field-equal states are byte-identical.
    """

    problem_id: str
    widgets: dict[str, WidgetView] = field(default_factory=dict)
    done: bool = False

    def __post_init__(self):
        for wid, w in self.widgets.items():
            if wid != w.widget_id:
                raise ValueError(f"widget key {wid!r} != widget_id {w.widget_id!r}")

    def widget(self, widget_id: str) -> WidgetView:
        return self.widgets[widget_id]

    def with_widget(self, view: WidgetView) -> "ProblemState":
        widgets = dict(self.widgets)
        widgets[view.widget_id] = view
        return replace(self, widgets=widgets)

    def with_done(self, done: bool = True) -> "ProblemState":
        return replace(self, done=done)

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "done": self.done,
            "widgets": {wid: w.to_dict() for wid, w in sorted(self.widgets.items())},
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @staticmethod
    def from_dict(doc: dict) -> "ProblemState":
        widgets = {
            wid: WidgetView.from_dict(w) for wid, w in doc.get("widgets", {}).items()
        }
        return ProblemState(
            problem_id=doc["problem_id"],
            widgets=widgets,
            done=bool(doc.get("done", False)),
        )


def serialize_state(state: ProblemState) -> str:
    """Canonical text form of a state; parse_state inverts it exactly."""
    return state.to_json()


def parse_state(text: str) -> ProblemState:
    return ProblemState.from_dict(json.loads(text))


@dataclass(frozen=True)
class Reward:
    """Step feedback: exactly +1 (correct) or -1 (incorrect)."""

    value: int

    def __post_init__(self):
        if self.value not in (1, -1):
            raise ValueError(f"reward must be +1 or -1, got {self.value}")

    def __int__(self) -> int:
        return self.value


CORRECT = Reward(1)
INCORRECT = Reward(-1)


class Outcome(str, Enum):
    CORRECT = "CORRECT"
    INCORRECT = "INCORRECT"
    HINT = "HINT"


@dataclass(frozen=True)
class Transaction:
    """One graded agent attempt in DataShop-compatible form.

    HINT outcomes carry the demonstrated action; opportunity counts the k-th
    encounter of the skill across the whole training sequence.
    """

    student_id: str
    session_id: str
    problem_name: str
    step_name: str
    attempt_at_step: int
    outcome: Outcome
    sai: Sai
    skill: str
    opportunity: int
    timestamp: int  # milliseconds since epoch
    domain: str = ""
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.attempt_at_step < 1:
            raise ValueError("attempt_at_step must be >= 1")
        if self.opportunity < 1:
            raise ValueError("opportunity must be >= 1")

    def to_dict(self) -> dict:
        doc = {
            "student_id": self.student_id,
            "session_id": self.session_id,
            "problem_name": self.problem_name,
            "step_name": self.step_name,
            "attempt_at_step": self.attempt_at_step,
            "outcome": self.outcome.value,
            "selection": self.sai.selection,
            "action_type": self.sai.action_type,
            "input": self.sai.input,
            "skill": self.skill,
            "opportunity": self.opportunity,
            "timestamp": self.timestamp,
            "domain": self.domain,
        }
        if self.extras:
            doc["extras"] = dict(self.extras)
        return doc

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @staticmethod
    def from_dict(doc: dict) -> "Transaction":
        return Transaction(
            student_id=doc["student_id"],
            session_id=doc["session_id"],
            problem_name=doc["problem_name"],
            step_name=doc["step_name"],
            attempt_at_step=int(doc["attempt_at_step"]),
            outcome=Outcome(doc["outcome"]),
            sai=Sai(doc["selection"], doc["action_type"], doc.get("input", "")),
            skill=doc.get("skill", ""),
            opportunity=int(doc["opportunity"]),
            timestamp=int(doc["timestamp"]),
            domain=doc.get("domain", ""),
            extras=tuple(sorted(doc.get("extras", {}).items())),
        )


@dataclass
class TransactionLog:
    """An ordered sequence of transactions, as read from or written to disk."""

    transactions: list[Transaction] = field(default_factory=list)
    extra_columns: tuple[str, ...] = ()

    def __iter__(self):
        return iter(self.transactions)

    def __len__(self) -> int:
        return len(self.transactions)

    def append(self, t: Transaction) -> None:
        self.transactions.append(t)

    def extend(self, ts) -> None:
        self.transactions.extend(ts)
