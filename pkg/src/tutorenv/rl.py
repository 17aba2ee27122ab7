"""Fixed-dimension integer encoding turning tutors into a step/reset
environment.

The encoding table indexes every widget id, every value reachable along
correct paths (template values, matcher witnesses, tutor-performed inputs),
and every enumerable action across a problem set. Observations are
concatenated per-widget one-hot blocks over a shared value vocabulary, with
reserved slots for unknown values (after freezing) and hidden widgets, so
every block has exactly one hot entry in every state.

Only problem sets with enumerable action alphabets fit this adapter, which
in practice means generator-produced pools; that is the documented
compatibility restriction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .core import ProblemState, Sai
from .errors import IndexOutOfRange
from .graph import BehaviorGraph, EdgeKind, GraphCursor


@dataclass(frozen=True)
class EncodingTable:
    widget_ids: tuple[str, ...]
    values: tuple[str, ...]
    actions: tuple[Sai, ...]
    frozen: bool = True

    @property
    def block_size(self) -> int:
        # value slots + UNK + HIDDEN
        return len(self.values) + 2

    @property
    def unk_slot(self) -> int:
        return len(self.values)

    @property
    def hidden_slot(self) -> int:
        return len(self.values) + 1

    @property
    def obs_dim(self) -> int:
        return len(self.widget_ids) * self.block_size

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def value_slot(self, value: str) -> int:
        try:
            return self._value_index[value]
        except KeyError:
            if self.frozen:
                return self.unk_slot
            raise

    def action_of(self, index: int) -> Sai:
        if not 0 <= index < len(self.actions):
            raise IndexOutOfRange(f"action index {index} outside [0, {len(self.actions)})")
        return self.actions[index]

    def index_of(self, action: Sai) -> int:
        try:
            return self._action_index[action.as_tuple()]
        except KeyError:
            raise IndexOutOfRange(f"action {action.as_tuple()} is not indexed") from None

    def __post_init__(self):
        object.__setattr__(
            self, "_value_index", {v: i for i, v in enumerate(self.values)}
        )
        object.__setattr__(
            self,
            "_action_index",
            {a.as_tuple(): i for i, a in enumerate(self.actions)},
        )
        if len(self._value_index) != len(self.values):
            raise ValueError("value vocabulary contains duplicates")
        if len(self._action_index) != len(self.actions):
            raise ValueError("action vocabulary contains duplicates")


def build_encoding(graphs: list[BehaviorGraph]) -> EncodingTable:
    """Deterministic encoding covering every widget, value, and action in
    the given graphs."""
    if not graphs:
        raise ValueError("need at least one graph to build an encoding")
    widget_ids: set[str] = set()
    values: set[str] = {""}
    actions: set[tuple[str, str, str]] = set()
    for g in graphs:
        for wid, w in g.problem_template.widgets.items():
            widget_ids.add(wid)
            values.add(w.value)
        for e in g.edges:
            if e.kind == EdgeKind.STUDENT:
                values.add(e.matcher.witness)
                actions.add(e.demo_sai().as_tuple())
            else:
                values.add(e.input)
    return EncodingTable(
        widget_ids=tuple(sorted(widget_ids)),
        values=tuple(sorted(values)),
        actions=tuple(Sai(*t) for t in sorted(actions)),
    )


def encode_state(table: EncodingTable, state: ProblemState) -> np.ndarray:
    """One-hot observation vector; constant length for a fixed table."""
    hot = np.empty(len(table.widget_ids), dtype=np.int64)
    for i, wid in enumerate(table.widget_ids):
        w = state.widgets.get(wid)
        if w is None or not w.visible:
            hot[i] = table.hidden_slot
        else:
            hot[i] = table.value_slot(w.value)
    out = np.zeros(table.obs_dim, dtype=np.float64)
    kernels.fill_onehot(out, table.block_size, hot)
    return out


class TutorEnv:
    """Step/reset environment over a pool of generated problems.

    reset() rotates through the pool (or picks the given index); step()
    grades the decoded action, applies it when correct, and reports done.
    Incorrect actions leave the tutor state unchanged.
    """

    def __init__(self, problems, table: EncodingTable | None = None, seed: int = 0):
        items = []
        for item in problems:
            if isinstance(item, BehaviorGraph):
                items.append((None, item))
            else:
                spec, graph = item
                items.append((spec, graph))
        if not items:
            raise ValueError(
                "TutorEnv needs a non-empty problem pool; only tutors with "
                "generated problem sets are compatible"
            )
        self.problems = items
        self.table = table or build_encoding([g for _, g in items])
        self.rng = random.Random(seed)
        self._rotation = 0
        self.cursor: GraphCursor | None = None

    @property
    def n_actions(self) -> int:
        return self.table.n_actions

    @property
    def obs_dim(self) -> int:
        return self.table.obs_dim

    def reset(self, problem: int | None = None) -> np.ndarray:
        if problem is None:
            problem = self._rotation
            self._rotation = (self._rotation + 1) % len(self.problems)
        _, graph = self.problems[problem % len(self.problems)]
        self.cursor = GraphCursor(graph)
        return encode_state(self.table, self.cursor.state)

    def step(self, action_index: int) -> tuple[np.ndarray, int, bool]:
        if self.cursor is None:
            raise RuntimeError("call reset() before step()")
        action = self.table.action_of(action_index)
        grade = self.cursor.check(action)
        if grade.matched_edge is not None:
            self.cursor.apply(action)
        obs = encode_state(self.table, self.cursor.state)
        return obs, int(grade.reward), self.cursor.is_done()
