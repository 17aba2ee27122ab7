"""Behavior-graph tutor models: loading, grading, applying, demonstrating.

A behavior graph is a finite state machine over interface actions. Nodes are
progress states; edges are acceptable student actions or tutor-performed
interface changes. Unordered groups bundle edges that share a source and a
target node and may be completed in any order; skippable edges may be passed
over without being satisfied.

A :class:`GraphCursor` tracks one problem-solving session: the satisfied
edge set, the current node, and the current interface state. Grading
(``check``) never mutates the cursor; ``apply`` advances it and immediately
auto-fires any tutor-performed edges that become available, so a cursor at
rest never has pending tutor actions.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .core import (
    DEFAULT_ACTION_TYPES,
    CORRECT,
    INCORRECT,
    ProblemState,
    Reward,
    Sai,
    WidgetView,
    canonical_json,
)
from .errors import (
    DanglingEdge,
    IllegalApply,
    NoDemoAvailable,
    SchemaError,
    UnreachableDone,
)
from .matching import MatcherSpec, matches

GRAPH_FORMAT = "behavior-graph"
GRAPH_VERSION = "1"


class EdgeKind(str, Enum):
    STUDENT = "student"
    TUTOR_PERFORMED = "tutor_performed"


@dataclass(frozen=True)
class Edge:
    """One action transition.

    Student edges carry a matcher and a hint chain whose last element
    describes the bottom-out action. Tutor-performed edges carry a concrete
    input instead and fire automatically.
    """

    edge_id: str
    source: str
    target: str
    selection: str
    action_type: str = "UpdateTextField"
    kind: EdgeKind = EdgeKind.STUDENT
    matcher: MatcherSpec | None = None
    input: str = ""  # concrete payload for tutor-performed edges
    skippable: bool = False
    hint_chain: tuple[str, ...] = ()
    skill: str = ""

    def demo_sai(self) -> Sai:
        value = self.matcher.witness if self.matcher is not None else self.input
        return Sai(self.selection, self.action_type, value)


@dataclass(frozen=True)
class UnorderedGroup:
    """Edges completable in any order (or listed order when not reorderable).

    All members must share one source node (the entry) and one target node
    (the exit); the cursor passes the exit once every member is satisfied.
    """

    group_id: str
    edge_ids: tuple[str, ...]
    reorderable: bool = True


@dataclass(frozen=True)
class Grade:
    reward: Reward
    matched_edge: str | None = None


@dataclass
class BehaviorGraph:
    graph_id: str
    nodes: frozenset[str]
    edges: tuple[Edge, ...]
    start_node: str
    done_nodes: frozenset[str]
    problem_template: ProblemState
    groups: tuple[UnorderedGroup, ...] = ()
    action_types: frozenset[str] = DEFAULT_ACTION_TYPES

    _by_id: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _group_of: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _out: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        self._by_id = {e.edge_id: e for e in self.edges}
        self._group_of = {}
        for g in self.groups:
            for eid in g.edge_ids:
                self._group_of[eid] = g
        self._out = {}
        for e in self.edges:
            self._out.setdefault(e.source, []).append(e)
        for outs in self._out.values():
            outs.sort(key=lambda e: e.edge_id)

    def edge(self, edge_id: str) -> Edge:
        return self._by_id[edge_id]

    def group_of(self, edge_id: str) -> UnorderedGroup | None:
        return self._group_of.get(edge_id)

    def out_edges(self, node: str) -> list[Edge]:
        return self._out.get(node, [])

    def group_entry(self, g: UnorderedGroup) -> str:
        return self._by_id[g.edge_ids[0]].source

    def group_target(self, g: UnorderedGroup) -> str:
        return self._by_id[g.edge_ids[0]].target

    def validate(self) -> None:
        """Check structural invariants; raises a SchemaError subclass."""
        if len(self._by_id) != len(self.edges):
            seen = set()
            for e in self.edges:
                if e.edge_id in seen:
                    raise SchemaError(f"edges: duplicate edge id {e.edge_id!r}")
                seen.add(e.edge_id)
        if self.start_node not in self.nodes:
            raise DanglingEdge(f"start_node {self.start_node!r} not in nodes")
        for n in self.done_nodes:
            if n not in self.nodes:
                raise DanglingEdge(f"done_nodes: {n!r} not in nodes")
        for e in self.edges:
            where = f"edges[{e.edge_id}]"
            if e.source not in self.nodes:
                raise DanglingEdge(f"{where}.source: unknown node {e.source!r}")
            if e.target not in self.nodes:
                raise DanglingEdge(f"{where}.target: unknown node {e.target!r}")
            if e.action_type not in self.action_types:
                raise SchemaError(
                    f"{where}.action_type: {e.action_type!r} is not registered"
                )
            if e.selection not in self.problem_template.widgets:
                raise SchemaError(
                    f"{where}.selection: no widget {e.selection!r} in template"
                )
            if e.kind == EdgeKind.STUDENT:
                if e.matcher is None:
                    raise SchemaError(f"{where}.matcher: student edge needs a matcher")
                if not e.hint_chain:
                    raise SchemaError(
                        f"{where}.hints: student edge needs a non-empty hint chain"
                    )
            else:
                if e.matcher is not None:
                    raise SchemaError(
                        f"{where}.matcher: tutor-performed edge carries a concrete "
                        "input, not a matcher"
                    )
        grouped: set[str] = set()
        for g in self.groups:
            where = f"groups[{g.group_id}]"
            if len(g.edge_ids) < 2:
                raise SchemaError(f"{where}.edges: a group needs at least 2 edges")
            sources, targets = set(), set()
            for eid in g.edge_ids:
                if eid not in self._by_id:
                    raise SchemaError(f"{where}.edges: unknown edge {eid!r}")
                if eid in grouped:
                    raise SchemaError(f"{where}.edges: {eid!r} already in a group")
                grouped.add(eid)
                e = self._by_id[eid]
                if e.kind != EdgeKind.STUDENT:
                    raise SchemaError(
                        f"{where}.edges: tutor-performed edge {eid!r} cannot be "
                        "grouped"
                    )
                sources.add(e.source)
                targets.add(e.target)
            if len(sources) != 1 or len(targets) != 1:
                raise SchemaError(
                    f"{where}.edges: members must share one source and one target"
                )
        self._check_done_reachable()

    def _check_done_reachable(self) -> None:
        # Done must be reachable with every skippable edge omitted: optional
        # steps may never be the sole route. Skippable edges still allow
        # pass-through (their targets become actionable), but the edge that
        # finally enters a done node must be one the student performs, so it
        # cannot be skippable, nor a member of a group with skippable members.
        seen = {self.start_node}
        queue = deque([self.start_node])
        while queue:
            node = queue.popleft()
            for e in self.out_edges(node):
                g = self.group_of(e.edge_id)
                target = self.group_target(g) if g is not None else e.target
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
        if seen & self.done_nodes:
            for e in self.edges:
                if e.source not in seen or e.target not in self.done_nodes:
                    continue
                g = self.group_of(e.edge_id)
                if g is not None:
                    members_skippable = any(
                        self.edge(i).skippable for i in g.edge_ids
                    )
                    if not members_skippable:
                        return
                elif not (e.kind == EdgeKind.STUDENT and e.skippable):
                    return
        raise UnreachableDone(
            f"no done node reachable from {self.start_node!r} "
            "(skippable edges omitted)"
        )


# ---------------------------------------------------------------------------
# Interface effects

def _set_value(w: WidgetView, value: str) -> WidgetView:
    return WidgetView(w.widget_id, w.kind, value, locked=True, visible=w.visible)


def _press(w: WidgetView, value: str) -> WidgetView:
    return WidgetView(w.widget_id, w.kind, w.value, locked=True, visible=w.visible)


def _reveal(w: WidgetView, value: str) -> WidgetView:
    return WidgetView(w.widget_id, w.kind, value or w.value, w.locked, visible=True)


_EFFECTS = {
    "UpdateTextField": _set_value,
    "UpdateCheckbox": _set_value,
    "ButtonPressed": _press,
    "Done": _press,
    "Reveal": _reveal,
}


def apply_sai_effect(state: ProblemState, action: Sai) -> ProblemState:
    """Apply one action's interface change, returning the new state."""
    widget = state.widgets[action.selection]
    effect = _EFFECTS.get(action.action_type, _set_value)
    return state.with_widget(effect(widget, action.input))


# ---------------------------------------------------------------------------
# Cursor


class GraphCursor:
    """One problem-solving session over a behavior graph.

    Single-owner mutable: never share a live cursor between threads; use
    :meth:`clone` to fork a session.
    """

    def __init__(self, graph: BehaviorGraph):
        self.graph = graph
        self.node = graph.start_node
        self.satisfied: set[str] = set()
        self.state = graph.problem_template
        self._settle()

    def clone(self) -> "GraphCursor":
        other = object.__new__(GraphCursor)
        other.graph = self.graph
        other.node = self.node
        other.satisfied = set(self.satisfied)
        other.state = self.state
        return other

    def is_done(self) -> bool:
        return self.state.done

    # -- frontier ----------------------------------------------------------

    def _group_complete(self, g: UnorderedGroup, required_only: bool) -> bool:
        for eid in g.edge_ids:
            if eid in self.satisfied:
                continue
            if required_only and self.graph.edge(eid).skippable:
                continue
            return False
        return True

    def frontier(self) -> set[str]:
        """Nodes the session can act from: the current node plus everything
        past skippable edges, completed groups, and already-fired tutor
        edges."""
        seen = {self.node}
        queue = deque(seen)
        while queue:
            node = queue.popleft()
            for e in self.graph.out_edges(node):
                g = self.graph.group_of(e.edge_id)
                if g is not None:
                    target = self.graph.group_target(g)
                    passable = self._group_complete(g, required_only=True)
                elif e.kind == EdgeKind.TUTOR_PERFORMED:
                    target = e.target
                    passable = e.edge_id in self.satisfied
                else:
                    target = e.target
                    passable = e.skippable and e.edge_id not in self.satisfied
                if passable and target not in seen:
                    seen.add(target)
                    queue.append(target)
        return seen

    def enabled_edges(self) -> list[Edge]:
        """Unsatisfied student edges reachable from the frontier, by edge id."""
        frontier = self.frontier()
        out = []
        for e in self.graph.edges:
            if e.kind != EdgeKind.STUDENT:
                continue
            if e.edge_id in self.satisfied or e.source not in frontier:
                continue
            g = self.graph.group_of(e.edge_id)
            if g is not None and not g.reorderable:
                pending = [i for i in g.edge_ids if i not in self.satisfied]
                if pending and pending[0] != e.edge_id:
                    continue
            out.append(e)
        out.sort(key=lambda e: e.edge_id)
        return out

    # -- grading and stepping ----------------------------------------------

    def check(self, action: Sai) -> Grade:
        """Grade an action against the enabled edges; never mutates."""
        for e in self.enabled_edges():
            if (
                e.selection == action.selection
                and e.action_type == action.action_type
                and matches(e.matcher, action.input)
            ):
                return Grade(CORRECT, e.edge_id)
        return Grade(INCORRECT, None)

    def apply(self, action: Sai) -> "GraphCursor":
        """Advance the session with a correct action.

        Raises IllegalApply when the action does not grade +1.
        """
        grade = self.check(action)
        if grade.matched_edge is None:
            raise IllegalApply(f"action {action.as_tuple()} does not grade correct")
        edge = self.graph.edge(grade.matched_edge)
        self.satisfied.add(edge.edge_id)
        self.state = apply_sai_effect(self.state, action)
        g = self.graph.group_of(edge.edge_id)
        if g is not None:
            if self._group_complete(g, required_only=False):
                self.node = self.graph.group_target(g)
            else:
                self.node = self.graph.group_entry(g)
        else:
            self.node = edge.target
        self._settle()
        return self

    def _settle(self) -> None:
        """Auto-fire tutor-performed edges, then refresh the done flag."""
        while True:
            frontier = self.frontier()
            pending = [
                e
                for e in self.graph.edges
                if e.kind == EdgeKind.TUTOR_PERFORMED
                and e.edge_id not in self.satisfied
                and e.source in frontier
            ]
            if not pending:
                break
            e = min(pending, key=lambda e: e.edge_id)
            self.satisfied.add(e.edge_id)
            self.state = apply_sai_effect(self.state, e.demo_sai())
            if e.source == self.node:
                self.node = e.target
        if self.node in self.graph.done_nodes and not self.state.done:
            self.state = self.state.with_done(True)

    # -- tutoring ----------------------------------------------------------

    def get_all_demos(self) -> list[Sai]:
        """Every correct next action, one per enabled edge, in edge-id order."""
        if self.is_done():
            raise NoDemoAvailable("problem is done")
        demos = [e.demo_sai() for e in self.enabled_edges()]
        if not demos:
            raise NoDemoAvailable(f"no enabled edges at node {self.node!r}")
        return demos

    def get_demo(self) -> Sai:
        return self.get_all_demos()[0]

    def hint(self, selection: str | None = None) -> list[str]:
        """Hint chain for the targeted step, ending with the bottom-out hint.

        Falls back to the first enabled edge when the selection is absent or
        not currently actionable.
        """
        if self.is_done():
            raise NoDemoAvailable("problem is done")
        enabled = self.enabled_edges()
        if not enabled:
            raise NoDemoAvailable(f"no enabled edges at node {self.node!r}")
        edge = enabled[0]
        if selection is not None:
            for e in enabled:
                if e.selection == selection:
                    edge = e
                    break
        return list(edge.hint_chain)

    def fingerprint(self) -> dict:
        """Reconstructible position record: node plus sorted satisfied edges."""
        return {"node": self.node, "satisfied": sorted(self.satisfied)}


def restore_cursor(graph: BehaviorGraph, fingerprint: dict,
                   state: ProblemState) -> GraphCursor:
    """Rebuild a cursor from a fingerprint produced by :meth:`fingerprint`."""
    cursor = object.__new__(GraphCursor)
    cursor.graph = graph
    cursor.node = fingerprint["node"]
    cursor.satisfied = set(fingerprint["satisfied"])
    cursor.state = state
    return cursor


def enumerate_reachable(graph: BehaviorGraph, max_states: int = 100_000) -> list[GraphCursor]:
    """Breadth-first closure of all states reachable by correct actions.

    States are deduplicated by canonical serialization; hint requests do not
    change state and so do not contribute.
    """
    start = GraphCursor(graph)
    seen = {start.state.to_json()}
    out = [start]
    queue = deque([start])
    while queue and len(out) < max_states:
        cursor = queue.popleft()
        if cursor.is_done():
            continue
        for demo in cursor.get_all_demos():
            nxt = cursor.clone().apply(demo)
            key = nxt.state.to_json()
            if key not in seen:
                seen.add(key)
                out.append(nxt)
                queue.append(nxt)
                if len(out) >= max_states:
                    break
    return out


# ---------------------------------------------------------------------------
# File format


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise SchemaError(f"{where}.{key}: missing required field")
    value = doc[key]
    if not isinstance(value, kind):
        raise SchemaError(
            f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, "
            f"got {type(value).__name__}"
        )
    return value


def _edge_from_dict(doc: dict, index: int) -> Edge:
    where = f"edges[{index}]"
    kind_text = doc.get("kind", "student")
    try:
        kind = EdgeKind(kind_text)
    except ValueError:
        raise SchemaError(f"{where}.kind: unknown kind {kind_text!r}") from None
    matcher = None
    if kind == EdgeKind.STUDENT:
        matcher_doc = _require(doc, "matcher", dict, where)
        try:
            matcher = MatcherSpec.from_dict(matcher_doc)
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"{where}.matcher: {exc}") from exc
    elif doc.get("matcher") is not None:
        raise SchemaError(
            f"{where}.matcher: tutor-performed edge carries a concrete input, "
            "not a matcher"
        )
    return Edge(
        edge_id=_require(doc, "id", str, where),
        source=_require(doc, "source", str, where),
        target=_require(doc, "target", str, where),
        selection=_require(doc, "selection", str, where),
        action_type=doc.get("action_type", "UpdateTextField"),
        kind=kind,
        matcher=matcher,
        input=doc.get("input", ""),
        skippable=bool(doc.get("skippable", False)),
        hint_chain=tuple(doc.get("hints", ())),
        skill=doc.get("skill", ""),
    )


def _edge_to_dict(e: Edge) -> dict:
    doc = {
        "id": e.edge_id,
        "source": e.source,
        "target": e.target,
        "selection": e.selection,
        "action_type": e.action_type,
        "kind": e.kind.value,
        "skippable": e.skippable,
        "skill": e.skill,
    }
    if e.kind == EdgeKind.STUDENT:
        doc["matcher"] = e.matcher.to_dict()
        doc["hints"] = list(e.hint_chain)
    else:
        doc["input"] = e.input
    return doc


def graph_from_dict(doc: dict) -> BehaviorGraph:
    where = "graph"
    if doc.get("format") != GRAPH_FORMAT:
        raise SchemaError(f"{where}.format: expected {GRAPH_FORMAT!r}")
    if doc.get("version") != GRAPH_VERSION:
        raise SchemaError(f"{where}.version: unsupported {doc.get('version')!r}")
    nodes = frozenset(_require(doc, "nodes", list, where))
    edges = tuple(
        _edge_from_dict(e, i)
        for i, e in enumerate(_require(doc, "edges", list, where))
    )
    groups = tuple(
        UnorderedGroup(
            group_id=_require(g, "id", str, f"groups[{i}]"),
            edge_ids=tuple(_require(g, "edges", list, f"groups[{i}]")),
            reorderable=bool(g.get("reorderable", True)),
        )
        for i, g in enumerate(doc.get("groups", ()))
    )
    graph = BehaviorGraph(
        graph_id=_require(doc, "graph_id", str, where),
        nodes=nodes,
        edges=edges,
        start_node=_require(doc, "start_node", str, where),
        done_nodes=frozenset(_require(doc, "done_nodes", list, where)),
        problem_template=ProblemState.from_dict(_require(doc, "problem", dict, where)),
        groups=groups,
        action_types=DEFAULT_ACTION_TYPES | frozenset(doc.get("action_types", ())),
    )
    graph.validate()
    return graph


def graph_to_dict(graph: BehaviorGraph) -> dict:
    return {
        "format": GRAPH_FORMAT,
        "version": GRAPH_VERSION,
        "graph_id": graph.graph_id,
        "nodes": sorted(graph.nodes),
        "start_node": graph.start_node,
        "done_nodes": sorted(graph.done_nodes),
        "action_types": sorted(graph.action_types - DEFAULT_ACTION_TYPES),
        "edges": [_edge_to_dict(e) for e in graph.edges],
        "groups": [
            {"id": g.group_id, "edges": list(g.edge_ids), "reorderable": g.reorderable}
            for g in graph.groups
        ],
        "problem": graph.problem_template.to_dict(),
    }


def load_graph(document: str) -> BehaviorGraph:
    """Parse and fully validate a behavior-graph document."""
    try:
        doc = json.loads(document)
    except ValueError as exc:
        raise SchemaError(f"graph: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("graph: top level must be an object")
    return graph_from_dict(doc)


def dump_graph(graph: BehaviorGraph) -> str:
    """Canonical text form; load_graph(dump_graph(g)) == g."""
    return canonical_json(graph_to_dict(graph))


def convert_external(doc: dict) -> BehaviorGraph:
    """Best-effort converter for graphs exported from third-party authoring
    tools that use state/transition vocabulary. Field fidelity beyond the
    common core is not attempted."""
    translated = {
        "format": GRAPH_FORMAT,
        "version": GRAPH_VERSION,
        "graph_id": doc.get("name", doc.get("graph_id", "external")),
        "nodes": doc.get("states", doc.get("nodes", [])),
        "start_node": doc.get("initial", doc.get("start_node", "")),
        "done_nodes": doc.get("final", doc.get("done_nodes", [])),
        "edges": [],
        "groups": doc.get("groups", []),
        "problem": doc.get("problem", {"problem_id": "external", "widgets": {}}),
    }
    for i, t in enumerate(doc.get("transitions", doc.get("edges", []))):
        translated["edges"].append(
            {
                "id": t.get("id", f"t{i}"),
                "source": t.get("from", t.get("source")),
                "target": t.get("to", t.get("target")),
                "selection": t.get("selection", t.get("label", f"t{i}")),
                "action_type": t.get("action_type", "UpdateTextField"),
                "kind": t.get("kind", "student"),
                "matcher": t.get("matcher"),
                "input": t.get("input", ""),
                "skippable": t.get("skippable", False),
                "hints": t.get("hints", ["Enter the expected value."]),
                "skill": t.get("skill", ""),
            }
        )
    return graph_from_dict(translated)
