"""Text-completion agents: prompt assembly, the rolling in-context example
buffer, response parsing, and a replayable transport layer.

The adapter exposes the same act/train endpoints as any other agent: act
renders a demo prompt from the current state plus accumulated worked
examples, sends it through the transport, and parses the reply into an
action; train appends the graded experience to the example buffer, evicting
oldest-first whenever the 50k-character budget is exceeded.

Transports are plain callables prompt -> text. The HTTP transport speaks a
minimal JSON POST protocol; the transcript recorder and replayer make every
run reproducible offline.
"""

from __future__ import annotations

import json
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

from .core import ProblemState, Sai, serialize_state
from .errors import (
    BudgetExceeded,
    MalformedSai,
    StateTooLarge,
    TransportError,
    UnparseableResponse,
)
from .core import parse_sai

DEFAULT_CHAR_BUDGET = 50_000

EXAMPLES_MARKER = "## Worked examples"
STATE_MARKER = "## Current state"
ACTION_MARKER = "## Proposed action"


@dataclass(frozen=True)
class ContextExample:
    index: int
    state_text: str
    sai: Sai
    correct: bool

    def render(self) -> str:
        feedback = "correct" if self.correct else "incorrect"
        return (
            f"Example {self.index}:\n"
            f"State: {self.state_text}\n"
            f"Action: {self.sai.to_json()}\n"
            f"Feedback: {feedback}"
        )


class ContextBuffer:
    """FIFO example buffer bounded by rendered character length.

    Eviction is strictly oldest-first and runs until the total rendered
    length of the examples section fits the budget again.
    """

    def __init__(self, char_budget: int = DEFAULT_CHAR_BUDGET):
        if char_budget < 1:
            raise ValueError("char_budget must be positive")
        self.char_budget = char_budget
        self.examples: list[ContextExample] = []
        self._next_index = 1
        self.evictions = 0

    @property
    def total_chars(self) -> int:
        if not self.examples:
            return 0
        return sum(len(e.render()) for e in self.examples) + 2 * (
            len(self.examples) - 1
        )

    def push(self, state, sai: Sai, correct: bool) -> "ContextBuffer":
        state_text = state if isinstance(state, str) else serialize_state(state)
        self.examples.append(
            ContextExample(self._next_index, state_text, sai, bool(correct))
        )
        self._next_index += 1
        while self.examples and self.total_chars > self.char_budget:
            self.examples.pop(0)
            self.evictions += 1
        return self

    def render_section(self) -> str:
        return "\n\n".join(e.render() for e in self.examples)


def push_example(buffer: ContextBuffer, state, action: Sai, correctness) -> ContextBuffer:
    return buffer.push(state, action, bool(correctness))


# ---------------------------------------------------------------------------
# Prompts


@dataclass(frozen=True)
class PromptTemplate:
    mode: str  # "demo" or "grade"
    intro: str
    action_docs: tuple[tuple[str, str], ...] = ()
    domain_notes: str = ""
    instruction: str = ""

    def __post_init__(self):
        if self.mode not in ("demo", "grade"):
            raise ValueError(f"mode must be demo or grade, got {self.mode!r}")


_ACTION_DOCS = (
    (
        "UpdateTextField",
        'Fill a text field with a value, e.g. ["answer_num", "UpdateTextField", "3"].',
    ),
    (
        "UpdateCheckbox",
        'Set a checkbox, e.g. ["agree", "UpdateCheckbox", "true"].',
    ),
    (
        "ButtonPressed",
        'Press a button; the input stays empty, e.g. ["done", "ButtonPressed", ""].',
    ),
)


def default_demo_template(domain_notes: str = "") -> PromptTemplate:
    return PromptTemplate(
        mode="demo",
        intro=(
            "You are working inside a step-based tutoring interface. The "
            "interface state lists every widget with its current value; "
            "locked widgets are already answered. Choose the next action to "
            "take."
        ),
        action_docs=_ACTION_DOCS,
        domain_notes=domain_notes,
        instruction=(
            "Reply with exactly one action as a JSON array of three strings: "
            '["selection", "action_type", "input"].'
        ),
    )


def default_grade_template(domain_notes: str = "") -> PromptTemplate:
    return PromptTemplate(
        mode="grade",
        intro=(
            "You are grading one step taken in a step-based tutoring "
            "interface. Decide whether the proposed action is a correct "
            "next step in the given state."
        ),
        action_docs=_ACTION_DOCS,
        domain_notes=domain_notes,
        instruction='Reply "yes" if the action is correct, otherwise reply "no".',
    )


def build_prompt(
    template: PromptTemplate,
    state: ProblemState,
    buffer: ContextBuffer | None = None,
    action: Sai | None = None,
) -> str:
    """Assemble the full prompt; deterministic for fixed inputs.

    The worked-examples section never exceeds the buffer budget (the buffer
    enforces that on push); a state whose serialization alone exceeds the
    budget raises StateTooLarge.
    """
    state_text = serialize_state(state)
    budget = buffer.char_budget if buffer is not None else DEFAULT_CHAR_BUDGET
    if len(state_text) > budget:
        raise StateTooLarge(
            f"state serialization is {len(state_text)} chars, budget {budget}"
        )
    if template.mode == "grade" and action is None:
        raise ValueError("grade prompts need the action under evaluation")
    parts = [template.intro, ""]
    parts.append("Action types:")
    for name, doc in template.action_docs:
        parts.append(f"- {name}: {doc}")
    if template.domain_notes:
        parts.append("")
        parts.append(template.domain_notes)
    if buffer is not None and buffer.examples:
        parts.append("")
        parts.append(EXAMPLES_MARKER)
        parts.append(buffer.render_section())
    parts.append("")
    parts.append(STATE_MARKER)
    parts.append(state_text)
    if action is not None:
        parts.append("")
        parts.append(ACTION_MARKER)
        parts.append(action.to_json())
    parts.append("")
    parts.append(template.instruction)
    return "\n".join(parts)


def examples_section_of(prompt: str) -> str:
    """Extract the rendered worked-examples section from a prompt (empty
    string when the prompt was zero-shot). Used by transcript audits."""
    if EXAMPLES_MARKER not in prompt:
        return ""
    section = prompt.split(EXAMPLES_MARKER, 1)[1]
    return section.split(STATE_MARKER, 1)[0].strip("\n")


# ---------------------------------------------------------------------------
# Response parsing

_YES_NO_RE = re.compile(r"[^a-zA-Z]*(yes|no)\b", re.IGNORECASE)
_ARRAY_RE = re.compile(r"\[[^\[\]]*\]", re.DOTALL)
_PAREN_RE = re.compile(r'\(\s*"[^"]*"\s*,\s*"[^"]*"\s*,\s*"[^"]*"\s*\)', re.DOTALL)


def parse_response(mode: str, text: str):
    """Parse a completion: grade mode yields True/False, demo mode a Sai.

    Raises UnparseableResponse; callers count that as an incorrect answer
    rather than crashing.
    """
    if mode == "grade":
        m = _YES_NO_RE.match(text or "")
        if m is None:
            raise UnparseableResponse(f"no leading yes/no in {text[:80]!r}")
        return m.group(1).lower() == "yes"
    if mode == "demo":
        for candidate in _ARRAY_RE.findall(text or ""):
            try:
                return parse_sai(candidate)
            except MalformedSai:
                continue
        for candidate in _PAREN_RE.findall(text or ""):
            try:
                return parse_sai("[" + candidate.strip()[1:-1] + "]")
            except MalformedSai:
                continue
        raise UnparseableResponse(f"no action triple in {text[:80]!r}")
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Transports


@dataclass
class EndpointConfig:
    base_url: str
    model: str = ""
    auth_env: str = "TUTORENV_LLM_TOKEN"
    request_cap: int | None = None
    max_retries: int = 3
    backoff_s: float = 0.25
    timeout_s: float = 30.0


class HttpTransport:
    """POSTs {"model", "prompt"} as JSON and expects {"text": ...} back.

    Retries transient failures with exponential backoff; a configured
    request cap raises BudgetExceeded before any call past the limit.
    """

    def __init__(self, config: EndpointConfig):
        self.config = config
        self.requests_made = 0

    def __call__(self, prompt: str) -> str:
        cfg = self.config
        if cfg.request_cap is not None and self.requests_made >= cfg.request_cap:
            raise BudgetExceeded(f"request cap of {cfg.request_cap} reached")
        self.requests_made += 1
        payload = json.dumps({"model": cfg.model, "prompt": prompt}).encode()
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(cfg.auth_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_error = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.backoff_s * (2 ** (attempt - 1)))
            request = urllib.request.Request(
                cfg.base_url, data=payload, headers=headers
            )
            try:
                with urllib.request.urlopen(request, timeout=cfg.timeout_s) as resp:
                    body = resp.read().decode("utf-8")
                return json.loads(body)["text"]
            except urllib.error.HTTPError as exc:
                last_error = exc
                if exc.code < 500:
                    break
            except (urllib.error.URLError, TimeoutError, OSError, ValueError, KeyError) as exc:
                last_error = exc
        raise TransportError(f"endpoint failed after retries: {last_error}")


def remote_complete(config: EndpointConfig, prompt: str) -> str:
    """One-shot completion through a fresh HTTP transport."""
    return HttpTransport(config)(prompt)


class TranscriptRecorder:
    """Wraps any transport and appends prompt/response pairs as JSONL."""

    def __init__(self, transport, path=None):
        self.transport = transport
        self.path = path
        self.records: list[dict] = []
        self._handle = open(path, "a", encoding="utf-8") if path else None

    def __call__(self, prompt: str) -> str:
        response = self.transport(prompt)
        record = {"prompt": prompt, "response": response}
        self.records.append(record)
        if self._handle is not None:
            self._handle.write(json.dumps(record, sort_keys=True) + "\n")
            self._handle.flush()
        return response

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()


class TranscriptReplayer:
    """Replays a recorded transcript in order; no network involved.

    With verify=True (default) the replay fails fast when a prompt diverges
    from the recording, which keeps offline reruns honest.
    """

    def __init__(self, records, verify: bool = True):
        if isinstance(records, (str, bytes)) or hasattr(records, "__fspath__"):
            with open(records, "r", encoding="utf-8") as f:
                records = [json.loads(line) for line in f if line.strip()]
        self.records = list(records)
        self.verify = verify
        self._cursor = 0

    def __call__(self, prompt: str) -> str:
        if self._cursor >= len(self.records):
            raise TransportError("transcript exhausted")
        record = self.records[self._cursor]
        self._cursor += 1
        if self.verify and record["prompt"] != prompt:
            raise TransportError(
                f"prompt diverges from transcript at call {self._cursor}"
            )
        return record["response"]


# ---------------------------------------------------------------------------
# The agent


class LlmAgent:
    """act/train agent over a completion transport.

    act builds the demo prompt (state + in-context examples), sends it, and
    parses the reply; an unparseable reply turns into "no action", which the
    trainer resolves with a demonstration. train records the graded
    experience in the context buffer. The same machinery exposes grade() and
    demo() for profile evaluation.
    """

    def __init__(
        self,
        transport,
        demo_template: PromptTemplate | None = None,
        grade_template: PromptTemplate | None = None,
        char_budget: int = DEFAULT_CHAR_BUDGET,
    ):
        self.transport = transport
        self.demo_template = demo_template or default_demo_template()
        self.grade_template = grade_template or default_grade_template()
        self.buffer = ContextBuffer(char_budget)

    def act(self, state: ProblemState) -> Sai | None:
        prompt = build_prompt(self.demo_template, state, self.buffer)
        try:
            return parse_response("demo", self.transport(prompt))
        except UnparseableResponse:
            return None

    def train(self, state: ProblemState, action: Sai, reward) -> None:
        self.buffer.push(state, action, int(reward) > 0)

    def demo(self, state: ProblemState) -> Sai | None:
        return self.act(state)

    def grade(self, state: ProblemState, action: Sai) -> bool:
        prompt = build_prompt(self.grade_template, state, self.buffer, action=action)
        try:
            return parse_response("grade", self.transport(prompt))
        except UnparseableResponse:
            return False
