"""Reference agents: the tutor-backed oracle, a memorizer, and tabular Q.

The oracle and memorizing agents implement the symbolic act/train endpoints;
the Q-learning agent works through the integer-encoded environment in
tutorenv.rl and exists mostly as a sample-efficiency baseline.
"""

from __future__ import annotations

import random

import numpy as np

from . import _kernels as kernels
from .core import ProblemState, Reward, Sai, serialize_state
from .errors import IndexOutOfRange
from .graph import GraphCursor


class OracleAgent:
    """Always answers with the tutor's own bottom-out demo.

    Needs tutor access, so it implements the optional on_problem_start hook.
    """

    def __init__(self):
        self._cursor: GraphCursor | None = None

    def on_problem_start(self, cursor: GraphCursor) -> None:
        self._cursor = cursor

    def act(self, state: ProblemState) -> Sai | None:
        if self._cursor is None or self._cursor.is_done():
            return None
        return self._cursor.get_demo()

    def train(self, state, action, reward) -> None:
        pass


class MemorizingAgent:
    """Replays actions that last earned +1 for the same canonical state.

    Unseen states yield None (the trainer demonstrates); actions whose last
    reward on a state was -1 are never repeated there.
    """

    def __init__(self):
        self.store: dict[str, dict[tuple, int]] = {}

    def act(self, state: ProblemState) -> Sai | None:
        known = self.store.get(serialize_state(state))
        if not known:
            return None
        for sai_tuple, reward in known.items():
            if reward > 0:
                return Sai(*sai_tuple)
        return None

    def train(self, state: ProblemState, action: Sai, reward: Reward) -> None:
        key = serialize_state(state)
        self.store.setdefault(key, {})[action.as_tuple()] = int(reward)


class QTable:
    """Tabular action values over discovered state keys.

    Rows are float64 vectors of length n_actions, created on first touch;
    reads and updates go through the selected kernel implementation.
    """

    def __init__(self, n_actions: int, alpha: float = 0.2, gamma: float = 0.9):
        if not 0 < alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if not 0 <= gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")
        self.n_actions = n_actions
        self.alpha = alpha
        self.gamma = gamma
        self.rows: dict[bytes, np.ndarray] = {}

    def row(self, key: bytes) -> np.ndarray:
        row = self.rows.get(key)
        if row is None:
            row = np.zeros(self.n_actions, dtype=np.float64)
            self.rows[key] = row
        return row

    def best(self, key: bytes) -> int:
        return kernels.best_action(self.row(key))

    def value(self, key: bytes, action: int) -> float:
        self._check_action(action)
        return float(self.row(key)[action])

    def update(self, key: bytes, action: int, reward: float,
               next_key: bytes, terminal: bool = False) -> float:
        self._check_action(action)
        return kernels.td_update(
            self.row(key), action, reward, self.row(next_key),
            self.alpha, self.gamma, terminal,
        )

    def _check_action(self, action: int) -> None:
        if not 0 <= action < self.n_actions:
            raise IndexOutOfRange(
                f"action {action} outside [0, {self.n_actions})"
            )


def q_update(q: QTable, s, a: int, r: float, s_next, terminal: bool = False) -> float:
    """One-step Q-learning update; returns the new Q(s, a)."""
    return q.update(s, a, r, s_next, terminal)


class QLearningAgent:
    """Epsilon-greedy tabular Q-learning over an encoded environment.

    Epsilon decays linearly from eps_start to eps_end over eps_decay_steps
    environment steps, then stays at the floor.
    """

    def __init__(
        self,
        n_actions: int,
        alpha: float = 0.2,
        gamma: float = 0.9,
        eps_start: float = 1.0,
        eps_end: float = 0.05,
        eps_decay_steps: int = 5000,
        seed: int = 0,
    ):
        self.q = QTable(n_actions, alpha, gamma)
        self.eps_start = eps_start
        self.eps_end = eps_end
        self.eps_decay_steps = eps_decay_steps
        self.steps = 0
        self.rng = random.Random(seed)

    @property
    def epsilon(self) -> float:
        frac = min(1.0, self.steps / self.eps_decay_steps)
        return self.eps_start + (self.eps_end - self.eps_start) * frac

    def select(self, key: bytes, explore: bool = True) -> int:
        if explore and self.rng.random() < self.epsilon:
            return self.rng.randrange(self.q.n_actions)
        return self.q.best(key)

    def run_episode(self, env, max_steps: int = 200) -> dict:
        """One training episode; returns step and first-attempt statistics.

        A state's first attempt is the first action proposed when the state
        is first visited within the episode, the quantity learning curves
        are built from.
        """
        obs = env.reset()
        key = obs.tobytes()
        attempted: set[bytes] = set()
        first_attempts: list[bool] = []
        steps = 0
        done = False
        while not done and steps < max_steps:
            is_first = key not in attempted
            attempted.add(key)
            action = self.select(key)
            obs2, reward, done = env.step(action)
            key2 = obs2.tobytes()
            self.q.update(key, action, reward, key2, terminal=done)
            self.steps += 1
            steps += 1
            if is_first:
                first_attempts.append(reward > 0)
            key = key2
        return {
            "steps": steps,
            "done": done,
            "first_attempts": first_attempts,
        }
