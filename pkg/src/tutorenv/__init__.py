"""tutorenv: step-level tutoring environments and agent evaluation tools.

Build or generate behavior-graph tutors, let agents solve them step by step
under grading and hints, and evaluate agents both as tutors (completeness
profiles) and as simulated learners (learning curves).
"""

from .core import (
    CORRECT,
    INCORRECT,
    Outcome,
    ProblemState,
    Reward,
    Sai,
    Transaction,
    TransactionLog,
    WidgetKind,
    WidgetView,
    parse_sai,
    parse_state,
    serialize_state,
)
from .graph import (
    BehaviorGraph,
    Edge,
    EdgeKind,
    Grade,
    GraphCursor,
    UnorderedGroup,
    dump_graph,
    enumerate_reachable,
    load_graph,
)
from .matching import MatcherSpec, MatchMode, matches

__version__ = "0.1.0"

__all__ = [
    "BehaviorGraph",
    "CORRECT",
    "Edge",
    "EdgeKind",
    "Grade",
    "GraphCursor",
    "INCORRECT",
    "MatchMode",
    "MatcherSpec",
    "Outcome",
    "ProblemState",
    "Reward",
    "Sai",
    "Transaction",
    "TransactionLog",
    "UnorderedGroup",
    "WidgetKind",
    "WidgetView",
    "dump_graph",
    "enumerate_reachable",
    "load_graph",
    "matches",
    "parse_sai",
    "parse_state",
    "serialize_state",
]
