import json

import pytest

from tutorenv.core import ProblemState, Sai, WidgetKind, WidgetView
from tutorenv.errors import (
    DanglingEdge,
    IllegalApply,
    NoDemoAvailable,
    SchemaError,
    UnreachableDone,
)
from tutorenv.graph import (
    BehaviorGraph,
    Edge,
    EdgeKind,
    GraphCursor,
    UnorderedGroup,
    dump_graph,
    enumerate_reachable,
    load_graph,
    convert_external,
)
from tutorenv.matching import numeric_matcher, exact_matcher

from oracles import accepting_sequences, continuation_sets


def field(wid, kind=WidgetKind.TEXT_FIELD, visible=True):
    return WidgetView(wid, kind, "", locked=False, visible=visible)


def template(widget_ids, hidden=(), problem_id="p"):
    widgets = {}
    for wid in widget_ids:
        kind = WidgetKind.BUTTON if wid == "done" else WidgetKind.TEXT_FIELD
        widgets[wid] = field(wid, kind, visible=wid not in hidden)
    return ProblemState(problem_id=problem_id, widgets=widgets)


def student_edge(eid, source, target, selection, value, skippable=False, skill=""):
    return Edge(
        edge_id=eid,
        source=source,
        target=target,
        selection=selection,
        matcher=numeric_matcher(str(value), tolerance=0),
        skippable=skippable,
        hint_chain=(f"Work out {selection}.", f"Enter {value} in {selection}."),
        skill=skill or selection,
    )


def done_edge(eid, source, target):
    return Edge(
        edge_id=eid,
        source=source,
        target=target,
        selection="done",
        action_type="ButtonPressed",
        matcher=exact_matcher(""),
        hint_chain=("Press done.",),
        skill="done",
    )


def linear_graph():
    """start -f1-> n1 -f2-> n2 -done-> end"""
    g = BehaviorGraph(
        graph_id="linear",
        nodes=frozenset({"n0", "n1", "n2", "end"}),
        edges=(
            student_edge("e1", "n0", "n1", "f1", 3),
            student_edge("e2", "n1", "n2", "f2", 5),
            done_edge("e3", "n2", "end"),
        ),
        start_node="n0",
        done_nodes=frozenset({"end"}),
        problem_template=template(["f1", "f2", "done"]),
    )
    g.validate()
    return g


def group_graph(reorderable=True, to_done=True):
    """start -{a,b}-> exit[-done-> end]; group target may itself be done."""
    edges = [
        student_edge("ea", "n0", "n1", "fa", 3),
        student_edge("eb", "n0", "n1", "fb", 4),
    ]
    nodes = {"n0", "n1"}
    done_nodes = {"n1"}
    if not to_done:
        edges.append(done_edge("ez", "n1", "end"))
        nodes.add("end")
        done_nodes = {"end"}
    g = BehaviorGraph(
        graph_id="group",
        nodes=frozenset(nodes),
        edges=tuple(edges),
        start_node="n0",
        done_nodes=frozenset(done_nodes),
        problem_template=template(["fa", "fb", "done"]),
        groups=(UnorderedGroup("g1", ("ea", "eb"), reorderable=reorderable),),
    )
    g.validate()
    return g


def tutor_reveal_graph():
    """Applying e1 lands on a node that fires a reveal of a hidden widget."""
    g = BehaviorGraph(
        graph_id="reveal",
        nodes=frozenset({"n0", "n1", "n2", "n3", "end"}),
        edges=(
            student_edge("e1", "n0", "n1", "f1", 3),
            Edge(
                edge_id="t1",
                source="n1",
                target="n2",
                selection="f2",
                action_type="Reveal",
                kind=EdgeKind.TUTOR_PERFORMED,
                input="",
            ),
            student_edge("e2", "n2", "n3", "f2", 5),
            done_edge("e3", "n3", "end"),
        ),
        start_node="n0",
        done_nodes=frozenset({"end"}),
        problem_template=template(["f1", "f2", "done"], hidden=("f2",)),
        action_types=frozenset(
            {"UpdateTextField", "UpdateCheckbox", "ButtonPressed", "Done", "Reveal"}
        ),
    )
    g.validate()
    return g


def skippable_graph():
    """f1 then optional f2 then done; done reachable without f2."""
    g = BehaviorGraph(
        graph_id="skippable",
        nodes=frozenset({"n0", "n1", "n2", "end"}),
        edges=(
            student_edge("e1", "n0", "n1", "f1", 3),
            student_edge("e2", "n1", "n2", "f2", 0, skippable=True),
            done_edge("e3", "n2", "end"),
        ),
        start_node="n0",
        done_nodes=frozenset({"end"}),
        problem_template=template(["f1", "f2", "done"]),
    )
    g.validate()
    return g


def sai(sel, value="", action_type="UpdateTextField"):
    if sel == "done":
        return Sai("done", "ButtonPressed", "")
    return Sai(sel, action_type, str(value))


# ---------------------------------------------------------------------------
# check / apply


def test_check_wrong_stage_is_incorrect():
    cursor = GraphCursor(linear_graph())
    assert int(cursor.check(sai("f2", 5)).reward) == -1
    assert int(cursor.check(sai("f1", 3)).reward) == 1


def test_check_unknown_selection_grades_incorrect():
    cursor = GraphCursor(linear_graph())
    assert int(cursor.check(Sai("nope", "UpdateTextField", "1")).reward) == -1


def test_group_accepts_either_order():
    for first, second in ((("fa", 3), ("fb", 4)), (("fb", 4), ("fa", 3))):
        cursor = GraphCursor(group_graph())
        assert int(cursor.check(sai(*first)).reward) == 1
        assert int(cursor.check(sai(*second)).reward) == 1
        cursor.apply(sai(*first))
        cursor.apply(sai(*second))
        assert cursor.is_done()


def test_group_permutations_reach_identical_state():
    states = set()
    for order in ((("fa", 3), ("fb", 4)), (("fb", 4), ("fa", 3))):
        cursor = GraphCursor(group_graph())
        for step in order:
            cursor.apply(sai(*step))
        states.add(cursor.state.to_json())
    assert len(states) == 1


def test_non_reorderable_group_enforces_listed_order():
    g = group_graph(reorderable=False)
    cursor = GraphCursor(g)
    assert int(cursor.check(sai("fb", 4)).reward) == -1
    cursor.apply(sai("fa", 3))
    assert int(cursor.check(sai("fb", 4)).reward) == 1


def test_apply_requires_correct_action():
    cursor = GraphCursor(linear_graph())
    with pytest.raises(IllegalApply):
        cursor.apply(sai("f1", 999))


def test_apply_locks_widget_with_entered_value():
    cursor = GraphCursor(linear_graph())
    cursor.apply(sai("f1", 3))
    w = cursor.state.widget("f1")
    assert w.locked and w.value == "3"


def test_done_flag_after_full_path():
    cursor = GraphCursor(linear_graph())
    assert not cursor.is_done()
    cursor.apply(sai("f1", 3)).apply(sai("f2", 5)).apply(sai("done"))
    assert cursor.is_done()
    with pytest.raises(NoDemoAvailable):
        cursor.get_all_demos()


def test_tutor_performed_reveal_cascades():
    cursor = GraphCursor(tutor_reveal_graph())
    assert not cursor.state.widget("f2").visible
    cursor.apply(sai("f1", 3))
    assert cursor.state.widget("f2").visible
    assert int(cursor.check(sai("f2", 5)).reward) == 1


def test_skippable_step_can_be_skipped_or_taken():
    g = skippable_graph()
    direct = GraphCursor(g)
    direct.apply(sai("f1", 3))
    # both the optional step and done are available
    assert int(direct.check(sai("f2", 0)).reward) == 1
    assert int(direct.check(sai("done")).reward) == 1
    direct.apply(sai("done"))
    assert direct.is_done()

    thorough = GraphCursor(g)
    thorough.apply(sai("f1", 3)).apply(sai("f2", 0)).apply(sai("done"))
    assert thorough.is_done()


def test_skipped_edge_disabled_after_moving_past():
    g = skippable_graph()
    cursor = GraphCursor(g)
    cursor.apply(sai("f1", 3)).apply(sai("done"))
    assert cursor.is_done()


# ---------------------------------------------------------------------------
# demos and hints


def test_group_has_two_demos():
    cursor = GraphCursor(group_graph())
    demos = cursor.get_all_demos()
    assert demos == [Sai("fa", "UpdateTextField", "3"), Sai("fb", "UpdateTextField", "4")]


def test_last_step_has_one_demo():
    cursor = GraphCursor(linear_graph())
    cursor.apply(sai("f1", 3)).apply(sai("f2", 5))
    assert cursor.get_all_demos() == [Sai("done", "ButtonPressed", "")]


def test_get_demo_is_first_demo_and_all_demos_grade_correct():
    cursor = GraphCursor(group_graph())
    assert cursor.get_demo() == cursor.get_all_demos()[0]
    for demo in cursor.get_all_demos():
        assert int(cursor.check(demo).reward) == 1


def test_hint_chain_in_order():
    cursor = GraphCursor(linear_graph())
    assert cursor.hint() == ["Work out f1.", "Enter 3 in f1."]


def test_hint_targets_selection_with_fallback():
    cursor = GraphCursor(group_graph())
    assert cursor.hint("fb") == ["Work out fb.", "Enter 4 in fb."]
    # not enabled -> falls back to first enabled edge
    assert cursor.hint("done") == ["Work out fa.", "Enter 3 in fa."]


def test_bottom_out_hint_mentions_demo_value():
    cursor = GraphCursor(group_graph())
    for e in [cursor.graph.edge("ea"), cursor.graph.edge("eb")]:
        assert e.matcher.witness in e.hint_chain[-1]


# ---------------------------------------------------------------------------
# enumerate_reachable


def test_linear_graph_has_four_reachable_states():
    assert len(enumerate_reachable(linear_graph())) == 4


def test_two_edge_group_has_four_reachable_states():
    # hand enumeration: {}, {a}, {b}, {a,b}
    cursors = enumerate_reachable(group_graph(to_done=True))
    assert len(cursors) == 4


def test_reachable_count_matches_prefix_enumeration():
    for make in (linear_graph, lambda: group_graph(), skippable_graph, tutor_reveal_graph):
        g = make()
        seqs = accepting_sequences(g)
        prefixes = {s[:i] for s in seqs for i in range(len(s) + 1)}
        states = set()
        for prefix in prefixes:
            cursor = GraphCursor(g)
            for eid in prefix:
                cursor.apply(g.edge(eid).demo_sai())
            states.add(cursor.state.to_json())
        assert len(enumerate_reachable(g)) == len(states)


# ---------------------------------------------------------------------------
# oracle equivalence on hand graphs (generator graphs covered in acceptance)


@pytest.mark.parametrize(
    "make",
    [linear_graph, group_graph, lambda: group_graph(False), skippable_graph, tutor_reveal_graph],
)
def test_check_agrees_with_path_oracle(make):
    g = make()
    for prefix, expected in continuation_sets(g).items():
        cursor = GraphCursor(g)
        for eid in prefix:
            cursor.apply(g.edge(eid).demo_sai())
        graded = {
            e.edge_id
            for e in g.edges
            if e.kind == EdgeKind.STUDENT
            and cursor.check(e.demo_sai()).matched_edge == e.edge_id
        }
        assert graded == expected, (prefix, graded, expected)
        if not expected:
            assert cursor.is_done()


def test_deterministic_replay_byte_identical():
    g = linear_graph()
    runs = []
    for _ in range(2):
        cursor = GraphCursor(g)
        cursor.apply(sai("f1", 3)).apply(sai("f2", 5)).apply(sai("done"))
        runs.append(cursor.state.to_json())
    assert runs[0] == runs[1]


# ---------------------------------------------------------------------------
# file format


def test_round_trip_through_file_format():
    for make in (linear_graph, group_graph, skippable_graph, tutor_reveal_graph):
        g = make()
        assert load_graph(dump_graph(g)) == g


def test_minimal_one_edge_graph_document():
    doc = {
        "format": "behavior-graph",
        "version": "1",
        "graph_id": "mini",
        "nodes": ["a", "b"],
        "start_node": "a",
        "done_nodes": ["b"],
        "edges": [
            {
                "id": "e1",
                "source": "a",
                "target": "b",
                "selection": "f1",
                "matcher": {"mode": "numeric", "reference": "1", "tolerance": "0"},
                "hints": ["Enter 1."],
            }
        ],
        "problem": {"problem_id": "mini", "widgets": {
            "f1": {"id": "f1", "kind": "text_field"}}},
    }
    g = load_graph(json.dumps(doc))
    assert len(g.nodes) == 2 and len(g.edges) == 1


def test_dangling_edge_detected():
    doc = json.loads(dump_graph(linear_graph()))
    doc["edges"][0]["target"] = "missing"
    with pytest.raises(DanglingEdge):
        load_graph(json.dumps(doc))


def test_unreachable_done_detected():
    doc = json.loads(dump_graph(linear_graph()))
    doc["done_nodes"] = ["n99"]
    doc["nodes"].append("n99")
    with pytest.raises(UnreachableDone):
        load_graph(json.dumps(doc))


def test_schema_error_names_field():
    doc = json.loads(dump_graph(linear_graph()))
    del doc["edges"][0]["selection"]
    with pytest.raises(SchemaError) as err:
        load_graph(json.dumps(doc))
    assert "selection" in str(err.value)


def test_tutor_edge_with_matcher_rejected():
    doc = json.loads(dump_graph(tutor_reveal_graph()))
    for e in doc["edges"]:
        if e["kind"] == "tutor_performed":
            e["matcher"] = {"mode": "exact", "reference": "x"}
    with pytest.raises(SchemaError):
        load_graph(json.dumps(doc))


def test_convert_external_stub():
    doc = {
        "name": "ext",
        "states": ["s0", "s1"],
        "initial": "s0",
        "final": ["s1"],
        "transitions": [
            {
                "from": "s0",
                "to": "s1",
                "selection": "f1",
                "matcher": {"mode": "exact", "reference": "ok"},
            }
        ],
        "problem": {"problem_id": "ext", "widgets": {
            "f1": {"id": "f1", "kind": "text_field"}}},
    }
    g = convert_external(doc)
    assert g.start_node == "s0" and len(g.edges) == 1
