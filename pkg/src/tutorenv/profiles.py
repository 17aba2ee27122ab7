"""Completeness profiles: reachable tutor states with correct and incorrect
next actions, and tutor-style evaluation of graders and demonstrators.

A profile is built by sampling solution paths through generated problems or
by replaying a transaction log, then optionally augmented with verified
incorrect actions. Graders are judged on labeling both action sets; demo
functions are judged by grading their returned action with the tutor's own
check, so any matcher-equivalent surface form counts.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, replace

from .core import Outcome, ProblemState, Sai, TransactionLog, canonical_json
from .errors import ExhaustedPerturbations, ReplayMismatch
from .expr import numeric_value
from .graph import BehaviorGraph, GraphCursor, restore_cursor

SOURCE_TAGS = ("student_data", "agent_generated", "perturbation")

INJECTION_STRATEGIES = ("perturb_numeric", "swap_field", "off_by_one")


@dataclass(frozen=True)
class ProfileEntry:
    """One reachable state with every correct next action and any known
    incorrect ones (tagged by origin)."""

    problem_id: str
    state: ProblemState
    correct_actions: tuple[Sai, ...]
    incorrect_actions: tuple[tuple[Sai, str], ...] = ()
    node: str = ""
    satisfied: tuple[str, ...] = ()

    @property
    def fingerprint(self) -> str:
        doc = canonical_json(
            {
                "problem_id": self.problem_id,
                "node": self.node,
                "satisfied": sorted(self.satisfied),
                "state": self.state.to_dict(),
            }
        )
        return hashlib.sha1(doc.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "state": self.state.to_dict(),
            "node": self.node,
            "satisfied": list(self.satisfied),
            "correct": [list(a.as_tuple()) for a in self.correct_actions],
            "incorrect": [
                [list(a.as_tuple()), tag] for a, tag in self.incorrect_actions
            ],
        }

    @staticmethod
    def from_dict(doc: dict) -> "ProfileEntry":
        return ProfileEntry(
            problem_id=doc["problem_id"],
            state=ProblemState.from_dict(doc["state"]),
            correct_actions=tuple(Sai(*a) for a in doc["correct"]),
            incorrect_actions=tuple(
                (Sai(*a), tag) for a, tag in doc.get("incorrect", ())
            ),
            node=doc.get("node", ""),
            satisfied=tuple(doc.get("satisfied", ())),
        )


def cursor_for(entry: ProfileEntry, graphs: dict[str, BehaviorGraph]) -> GraphCursor:
    graph = graphs[entry.problem_id]
    return restore_cursor(
        graph, {"node": entry.node, "satisfied": list(entry.satisfied)}, entry.state
    )


@dataclass
class TutorEvalMetrics:
    """Hit counts for the three evaluation cells."""

    correct_hits: int = 0
    correct_total: int = 0
    incorrect_hits: int = 0
    incorrect_total: int = 0
    demo_hits: int = 0
    demo_total: int = 0

    @staticmethod
    def _ratio(hits: int, total: int) -> float | None:
        return hits / total if total else None

    @property
    def correct_accuracy(self) -> float | None:
        return self._ratio(self.correct_hits, self.correct_total)

    @property
    def incorrect_accuracy(self) -> float | None:
        return self._ratio(self.incorrect_hits, self.incorrect_total)

    @property
    def demo_accuracy(self) -> float | None:
        return self._ratio(self.demo_hits, self.demo_total)

    def as_table(self) -> str:
        def cell(value):
            return "    n/a" if value is None else f"{100 * value:6.2f}%"

        return (
            "Correct Accuracy  Incorrect Accuracy  Demo Accuracy\n"
            f"{cell(self.correct_accuracy):>16}  {cell(self.incorrect_accuracy):>18}"
            f"  {cell(self.demo_accuracy):>13}"
        )


# ---------------------------------------------------------------------------
# Building


def build_profile(problems, n_paths_per_problem: int, seed: int) -> list[ProfileEntry]:
    """Union of states visited along sampled correct paths, deduplicated.

    Done states carry no next actions and are excluded. Each problem gets
    its own stream seeded from (seed, problem_id), so results do not depend
    on how a problem set is chunked across workers.
    """
    entries: list[ProfileEntry] = []
    for spec, graph in problems:
        problem_id = spec.problem_id if spec is not None else graph.graph_id
        rng = random.Random(f"{seed}:{problem_id}")
        seen: set[str] = set()
        for _ in range(n_paths_per_problem):
            cursor = GraphCursor(graph)
            while not cursor.is_done():
                demos = cursor.get_all_demos()
                key = cursor.state.to_json()
                if key not in seen:
                    seen.add(key)
                    entries.append(
                        ProfileEntry(
                            problem_id=problem_id,
                            state=cursor.state,
                            correct_actions=tuple(demos),
                            node=cursor.node,
                            satisfied=tuple(sorted(cursor.satisfied)),
                        )
                    )
                cursor.apply(rng.choice(demos))
    return entries


def build_profile_from_log(
    log: TransactionLog, graphs: dict[str, BehaviorGraph]
) -> list[ProfileEntry]:
    """Reconstruct the states a logged session passed through.

    Correct and hint actions are replayed to advance the tutor; logged
    incorrect actions attach to the state they were attempted in, tagged
    student_data. A logged correct action that grades incorrect on replay
    raises ReplayMismatch.
    """
    entries: dict[tuple[str, str], ProfileEntry] = {}
    cursor: GraphCursor | None = None
    current: str | None = None
    for t in log:
        if cursor is None or current != t.problem_name or cursor.is_done():
            if t.problem_name not in graphs:
                raise ReplayMismatch(f"no graph for problem {t.problem_name!r}")
            cursor = GraphCursor(graphs[t.problem_name])
            current = t.problem_name
        key = (current, cursor.state.to_json())
        entry = entries.get(key)
        if entry is None:
            entry = ProfileEntry(
                problem_id=current,
                state=cursor.state,
                correct_actions=tuple(cursor.get_all_demos()),
                node=cursor.node,
                satisfied=tuple(sorted(cursor.satisfied)),
            )
            entries[key] = entry
        if t.outcome in (Outcome.CORRECT, Outcome.HINT):
            if cursor.check(t.sai).matched_edge is None:
                raise ReplayMismatch(
                    f"logged {t.outcome.value} action {t.sai.as_tuple()} grades "
                    f"incorrect on {t.problem_name!r}"
                )
            cursor.apply(t.sai)
        else:
            known = {a.as_tuple() for a, _ in entry.incorrect_actions}
            if t.sai.as_tuple() not in known:
                entries[key] = replace(
                    entry,
                    incorrect_actions=entry.incorrect_actions
                    + ((t.sai, "student_data"),),
                )
    return list(entries.values())


# ---------------------------------------------------------------------------
# Incorrect-action injection


def _perturb_value(rng: random.Random, value: str, strategy: str) -> str | None:
    v = numeric_value(value)
    if v is None:
        return None
    if strategy == "off_by_one":
        delta = rng.choice([-1, 1])
    else:
        delta = rng.choice([-5, -4, -3, -2, 2, 3, 4, 5])
    if v.denominator == 1:
        return str(v.numerator + delta)
    return f"{v.numerator + delta}/{v.denominator}"


def _candidate(rng, strategy, entry, base: Sai) -> Sai | None:
    if strategy in ("perturb_numeric", "off_by_one"):
        value = _perturb_value(rng, base.input, strategy)
        if value is None:
            return None
        return Sai(base.selection, base.action_type, value)
    if strategy == "swap_field":
        others = [w for w in sorted(entry.state.widgets) if w != base.selection]
        if not others:
            return None
        return Sai(rng.choice(others), base.action_type, base.input)
    raise ValueError(f"unknown strategy {strategy!r}")


def inject_incorrect(
    entries: list[ProfileEntry],
    graphs: dict[str, BehaviorGraph],
    strategy: str,
    seed: int,
    per_entry: int = 2,
    max_draws: int = 50,
) -> list[ProfileEntry]:
    """Add per_entry verified-incorrect actions to every entry.

    Every injected action is graded by the tutor's own check and must come
    out incorrect; collisions with correct actions are re-drawn. Raises
    ExhaustedPerturbations when a state admits no further incorrect action
    within the draw budget.
    """
    if strategy not in INJECTION_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = random.Random(seed)
    out: list[ProfileEntry] = []
    for entry in entries:
        cursor = cursor_for(entry, graphs)
        added: list[tuple[Sai, str]] = []
        known = {a.as_tuple() for a, _ in entry.incorrect_actions}
        for _ in range(per_entry):
            found = None
            for _ in range(max_draws):
                base = rng.choice(entry.correct_actions)
                for attempt_strategy in (strategy, "swap_field"):
                    sai = _candidate(rng, attempt_strategy, entry, base)
                    if sai is None or sai.as_tuple() in known:
                        continue
                    if cursor.check(sai).matched_edge is None:
                        found = sai
                        break
                if found is not None:
                    break
            if found is None:
                raise ExhaustedPerturbations(
                    f"no incorrect action found for {entry.fingerprint} "
                    f"({strategy}, {max_draws} draws)"
                )
            known.add(found.as_tuple())
            added.append((found, "perturbation"))
        out.append(
            replace(entry, incorrect_actions=entry.incorrect_actions + tuple(added))
        )
    return out


# ---------------------------------------------------------------------------
# Evaluation


def grade_profile(grader, entries: list[ProfileEntry]) -> TutorEvalMetrics:
    """Score a yes/no grader over every labeled action in the profile.

    The grader is any callable (state, sai) -> bool; truthy means "the
    action is correct". Hits on the incorrect side are "no" answers.
    """
    m = TutorEvalMetrics()
    for entry in entries:
        for action in entry.correct_actions:
            m.correct_total += 1
            if grader(entry.state, action):
                m.correct_hits += 1
        for action, _tag in entry.incorrect_actions:
            m.incorrect_total += 1
            if not grader(entry.state, action):
                m.incorrect_hits += 1
    return m


def demo_eval(demoer, entries: list[ProfileEntry], graphs) -> float:
    """Fraction of states for which the demoer produces a correct action.

    Correctness is judged by the tutor's check, so any matcher-equivalent
    form of an acceptable action counts, not just the stored witness.
    """
    hits = total = 0
    for entry in entries:
        if entry.state.done:
            continue
        total += 1
        action = demoer(entry.state)
        if action is None:
            continue
        if cursor_for(entry, graphs).check(action).matched_edge is not None:
            hits += 1
    if total == 0:
        raise ValueError("profile has no non-done entries")
    return hits / total


def evaluate_tutor(grader, demoer, entries, graphs) -> TutorEvalMetrics:
    """All three evaluation columns at once."""
    m = grade_profile(grader, entries)
    for entry in entries:
        if entry.state.done:
            continue
        m.demo_total += 1
        action = demoer(entry.state)
        if action is not None and (
            cursor_for(entry, graphs).check(action).matched_edge is not None
        ):
            m.demo_hits += 1
    return m


def check_grader(entries: list[ProfileEntry], graphs: dict[str, BehaviorGraph]):
    """The tutor's own check wrapped as a (state, action) -> bool grader.

    Profile states are canonical, so the entry (and with it the cursor
    position) is recovered from the state serialization.
    """
    by_state = {entry.state.to_json(): entry for entry in entries}

    def grade(state: ProblemState, action: Sai) -> bool:
        entry = by_state[state.to_json()]
        return cursor_for(entry, graphs).check(action).matched_edge is not None

    return grade


def oracle_demoer(entries: list[ProfileEntry], graphs: dict[str, BehaviorGraph]):
    """The tutor's own bottom-out demo as a (state) -> Sai demoer."""
    by_state = {entry.state.to_json(): entry for entry in entries}

    def demo(state: ProblemState) -> Sai | None:
        entry = by_state[state.to_json()]
        cursor = cursor_for(entry, graphs)
        return None if cursor.is_done() else cursor.get_demo()

    return demo


# ---------------------------------------------------------------------------
# File format: one JSON entry per line


def save_profile(entries: list[ProfileEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(canonical_json(entry.to_dict()))
            f.write("\n")


def load_profile(path) -> list[ProfileEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                entries.append(ProfileEntry.from_dict(json.loads(line)))
    return entries


def dumps_profile(entries: list[ProfileEntry]) -> str:
    return "".join(canonical_json(e.to_dict()) + "\n" for e in entries)


def loads_profile(text: str) -> list[ProfileEntry]:
    return [
        ProfileEntry.from_dict(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]
