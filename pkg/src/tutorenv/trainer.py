"""The training loop mediating agent and tutor over problems.

Each step the trainer asks the agent to act, grades the action, rewards the
agent, and applies correct actions to the tutor. When the agent cannot act,
or after a configured number of consecutive incorrect attempts on a step, the
tutor's bottom-out demo is passed to the agent as a worked example with
reward +1 and logged with outcome HINT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from .core import (
    CORRECT,
    Outcome,
    ProblemState,
    Reward,
    Sai,
    Transaction,
    TransactionLog,
)
from .errors import ActionBoundExceeded
from .graph import BehaviorGraph, GraphCursor

# Fixed epoch for the simulated clock: 2020-01-01T00:00:00Z. Training runs
# must be reproducible byte for byte, so wall time is opt-in.
SIM_EPOCH_MS = 1_577_836_800_000


@runtime_checkable
class AgentEndpoints(Protocol):
    """What an agent must implement to be tutored.

    act must not mutate the tutor; train may mutate agent internals only.
    Agents that cannot decide on an action return None from act, which makes
    the trainer demonstrate the step instead. Agents may optionally implement
    on_problem_start(cursor) to receive the tutor session before each
    problem (the oracle agent uses this to reach get_demo).
    """

    def act(self, state: ProblemState) -> Sai | None: ...

    def train(self, state: ProblemState, action: Sai, reward: Reward) -> None: ...


class SimClock:
    """Deterministic clock: one second per transaction."""

    def __init__(self, start_ms: int = SIM_EPOCH_MS, step_ms: int = 1000):
        self._now = start_ms
        self._step = step_ms

    def tick(self) -> int:
        now = self._now
        self._now += self._step
        return now


class WallClock:
    def tick(self) -> int:
        import time

        return int(time.time() * 1000)


@dataclass
class TrainerConfig:
    max_incorrect_before_demo: int | None = None
    max_actions_per_problem: int = 500
    loggers: tuple = ()

    def __post_init__(self):
        if self.max_incorrect_before_demo is not None and self.max_incorrect_before_demo < 1:
            raise ValueError("max_incorrect_before_demo must be positive")
        if self.max_actions_per_problem < 1:
            raise ValueError("max_actions_per_problem must be positive")


class Trainer:
    """Runs problems and curricula, keeping skill opportunity counters
    across the whole training sequence. Problems run in the given order."""

    def __init__(
        self,
        agent: AgentEndpoints,
        config: TrainerConfig | None = None,
        student_id: str = "agent0",
        session_id: str = "sess0",
        clock=None,
    ):
        self.agent = agent
        self.config = config or TrainerConfig()
        self.student_id = student_id
        self.session_id = session_id
        self.clock = clock or SimClock()
        self._skill_opportunities: dict[str, int] = {}

    # -- bookkeeping ---------------------------------------------------------

    def _skill_for(self, cursor: GraphCursor, selection: str) -> str:
        for e in cursor.enabled_edges():
            if e.selection == selection:
                return e.skill
        for e in cursor.graph.edges:
            if e.selection == selection and e.skill:
                return e.skill
        return selection

    def _record(
        self,
        sink: list,
        cursor: GraphCursor,
        problem_name: str,
        domain: str,
        sai: Sai,
        outcome: Outcome,
        skill: str,
        attempts: dict,
        touched: set,
    ) -> Transaction:
        step = sai.selection
        attempts[step] = attempts.get(step, 0) + 1
        if step not in touched:
            touched.add(step)
            self._skill_opportunities[skill] = (
                self._skill_opportunities.get(skill, 0) + 1
            )
        t = Transaction(
            student_id=self.student_id,
            session_id=self.session_id,
            problem_name=problem_name,
            step_name=step,
            attempt_at_step=attempts[step],
            outcome=outcome,
            sai=sai,
            skill=skill,
            opportunity=self._skill_opportunities.get(skill, 1),
            timestamp=self.clock.tick(),
            domain=domain,
        )
        sink.append(t)
        for logger in self.config.loggers:
            logger.log(t)
        return t

    def _demo_step(self, sink, cursor, problem_name, domain, attempts, touched):
        demo = cursor.get_demo()
        edge = next(
            e for e in cursor.enabled_edges() if e.selection == demo.selection
        )
        self.agent.train(cursor.state, demo, CORRECT)
        self._record(
            sink, cursor, problem_name, domain, demo, Outcome.HINT,
            edge.skill, attempts, touched,
        )
        cursor.apply(demo)

    # -- the loop ------------------------------------------------------------

    def run_problem(
        self,
        cursor: GraphCursor,
        problem_name: str | None = None,
        domain: str = "",
    ) -> list[Transaction]:
        """Tutor the agent through one problem; returns its transactions.

        Raises ActionBoundExceeded if the safety bound on graded agent
        actions is hit before the problem is done.
        """
        if cursor.is_done():
            raise ValueError("cursor is already done")
        problem_name = problem_name or cursor.graph.graph_id
        cfg = self.config
        transactions: list[Transaction] = []
        attempts: dict[str, int] = {}
        touched: set[str] = set()
        consecutive_incorrect = 0
        graded_actions = 0

        if hasattr(self.agent, "on_problem_start"):
            self.agent.on_problem_start(cursor)

        while not cursor.is_done():
            action = self.agent.act(cursor.state)
            if action is None:
                self._demo_step(
                    transactions, cursor, problem_name, domain, attempts, touched
                )
                consecutive_incorrect = 0
                continue
            graded_actions += 1
            if graded_actions > cfg.max_actions_per_problem:
                raise ActionBoundExceeded(
                    f"{graded_actions} actions without finishing {problem_name}"
                )
            grade = cursor.check(action)
            self.agent.train(cursor.state, action, grade.reward)
            if grade.matched_edge is not None:
                skill = cursor.graph.edge(grade.matched_edge).skill
                self._record(
                    transactions, cursor, problem_name, domain, action,
                    Outcome.CORRECT, skill, attempts, touched,
                )
                cursor.apply(action)
                consecutive_incorrect = 0
            else:
                skill = self._skill_for(cursor, action.selection)
                self._record(
                    transactions, cursor, problem_name, domain, action,
                    Outcome.INCORRECT, skill, attempts, touched,
                )
                consecutive_incorrect += 1
                if (
                    cfg.max_incorrect_before_demo is not None
                    and consecutive_incorrect >= cfg.max_incorrect_before_demo
                ):
                    self._demo_step(
                        transactions, cursor, problem_name, domain, attempts, touched
                    )
                    consecutive_incorrect = 0
        return transactions

    def run_curriculum(self, problems) -> TransactionLog:
        """Run a sequence of problems in order; opportunity counters carry
        across problems.

        Each item may be a BehaviorGraph or a (ProblemSpec, BehaviorGraph)
        pair as produced by the generators.
        """
        log = TransactionLog()
        for item in problems:
            if isinstance(item, BehaviorGraph):
                spec, graph = None, item
            else:
                spec, graph = item
            cursor = GraphCursor(graph)
            log.extend(
                self.run_problem(
                    cursor,
                    problem_name=spec.problem_id if spec else graph.graph_id,
                    domain=spec.domain_id if spec else "",
                )
            )
        return log


def run_problem(
    agent: AgentEndpoints, tutor: GraphCursor, config: TrainerConfig | None = None
) -> list[Transaction]:
    return Trainer(agent, config).run_problem(tutor)


def run_curriculum(
    agent: AgentEndpoints, problems, config: TrainerConfig | None = None
) -> TransactionLog:
    return Trainer(agent, config).run_curriculum(problems)
