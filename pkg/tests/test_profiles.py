import random

import pytest

from tutorenv.agents import MemorizingAgent, OracleAgent
from tutorenv.core import Sai, ProblemState, WidgetKind, WidgetView
from tutorenv.errors import ExhaustedPerturbations, ReplayMismatch
from tutorenv.generators import generate_pool
from tutorenv.graph import BehaviorGraph, Edge
from tutorenv.matching import algebraic_matcher
from tutorenv.profiles import (
    ProfileEntry,
    build_profile,
    build_profile_from_log,
    check_grader,
    cursor_for,
    demo_eval,
    dumps_profile,
    evaluate_tutor,
    grade_profile,
    inject_incorrect,
    loads_profile,
    oracle_demoer,
)
from tutorenv.trainer import run_curriculum


def pool_and_graphs(domain="fraction_same_den", n=5, seed=0):
    pool = generate_pool(domain, n, seed)
    return pool, {s.problem_id: g for s, g in pool}


def test_linear_problem_yields_three_entries():
    pool, graphs = pool_and_graphs("scaffold_linear_eq", 1, 0)
    entries = build_profile(pool, n_paths_per_problem=3, seed=0)
    assert len(entries) == 3
    assert all(not e.state.done for e in entries)


def test_profile_correct_actions_all_grade_correct():
    pool, graphs = pool_and_graphs("fraction_diff_den", 6, 1)
    entries = build_profile(pool, 4, seed=9)
    for entry in entries:
        cursor = cursor_for(entry, graphs)
        for action in entry.correct_actions:
            assert cursor.check(action).matched_edge is not None
        assert entry.correct_actions


def test_profile_deterministic_for_seed():
    pool, _ = pool_and_graphs(n=4)
    a = build_profile(pool, 3, seed=5)
    b = build_profile(pool, 3, seed=5)
    assert dumps_profile(a) == dumps_profile(b)


def test_fingerprint_changes_with_position():
    pool, _ = pool_and_graphs(n=1)
    entries = build_profile(pool, 2, seed=0)
    prints = {e.fingerprint for e in entries}
    assert len(prints) == len(entries)


# ---------------------------------------------------------------------------
# from transaction logs


def test_oracle_log_replays_with_empty_incorrect_sets():
    pool, graphs = pool_and_graphs(n=4)
    log = run_curriculum(OracleAgent(), pool)
    entries = build_profile_from_log(log, graphs)
    assert entries
    assert all(not e.incorrect_actions for e in entries)


def test_logged_incorrect_actions_attach_to_their_state():
    pool, graphs = pool_and_graphs(n=1)

    class OneMistake:
        def __init__(self):
            self.done = False

        def act(self, state):
            if not self.done:
                self.done = True
                return Sai("answer_num", "UpdateTextField", "999")
            return None

        def train(self, *a):
            pass

    log = run_curriculum(OneMistake(), pool)
    entries = build_profile_from_log(log, graphs)
    wrongs = [(a.as_tuple(), tag) for e in entries for a, tag in e.incorrect_actions]
    assert (("answer_num", "UpdateTextField", "999"), "student_data") in wrongs


def test_replay_of_many_session_logs_never_mismatches():
    for seed in range(20):
        pool, graphs = pool_and_graphs("fraction_diff_den", 3, seed)
        log = run_curriculum(MemorizingAgent(), pool + pool)
        entries = build_profile_from_log(log, graphs)
        assert entries


def test_corrupted_log_raises_replay_mismatch():
    pool, graphs = pool_and_graphs(n=1)
    log = run_curriculum(OracleAgent(), pool)
    bad = log.transactions[0]
    import dataclasses

    log.transactions[0] = dataclasses.replace(
        bad, sai=Sai(bad.sai.selection, bad.sai.action_type, "999999")
    )
    with pytest.raises(ReplayMismatch):
        build_profile_from_log(log, graphs)


# ---------------------------------------------------------------------------
# injection


@pytest.mark.parametrize("strategy", ["off_by_one", "perturb_numeric", "swap_field"])
def test_injected_actions_all_grade_incorrect(strategy):
    pool, graphs = pool_and_graphs("fraction_diff_den", 5, 3)
    entries = inject_incorrect(build_profile(pool, 3, 0), graphs, strategy, seed=1)
    assert all(len(e.incorrect_actions) >= 2 for e in entries)
    for entry in entries:
        cursor = cursor_for(entry, graphs)
        for action, tag in entry.incorrect_actions:
            assert tag == "perturbation"
            assert cursor.check(action).matched_edge is None


def test_off_by_one_perturbs_numeric_answer():
    pool, graphs = pool_and_graphs(n=1)  # 1/4 + 2/4 style operands vary by seed
    entries = inject_incorrect(build_profile(pool, 1, 0), graphs, "off_by_one", seed=0)
    entry = entries[0]
    numeric_wrongs = {
        a.input for a, _ in entry.incorrect_actions if a.selection == "answer_num"
    }
    correct = {a.input for a in entry.correct_actions if a.selection == "answer_num"}
    for wrong in numeric_wrongs:
        assert wrong not in correct


def test_exhausted_perturbations():
    # A one-widget graph where every action on the sole widget is correct:
    # swap_field has nowhere to go and numeric perturbation keeps colliding.
    widgets = {"f1": WidgetView("f1", WidgetKind.TEXT_FIELD)}
    g = BehaviorGraph(
        graph_id="p",
        nodes=frozenset({"a", "b"}),
        edges=(
            Edge(
                edge_id="e1",
                source="a",
                target="b",
                selection="f1",
                matcher=algebraic_matcher("x", witness="x"),
                hint_chain=("Enter x.",),
            ),
        ),
        start_node="a",
        done_nodes=frozenset({"b"}),
        problem_template=ProblemState(problem_id="p", widgets=widgets),
    )
    g.validate()
    entries = [
        ProfileEntry(
            problem_id="p",
            state=g.problem_template,
            correct_actions=(Sai("f1", "UpdateTextField", "x"),),
            node="a",
        )
    ]
    with pytest.raises(ExhaustedPerturbations):
        inject_incorrect(entries, {"p": g}, "off_by_one", seed=0)


# ---------------------------------------------------------------------------
# grading and demoing


def graded_profile(n=6, seed=0):
    pool, graphs = pool_and_graphs("fraction_same_den", n, seed)
    entries = inject_incorrect(build_profile(pool, 3, seed), graphs, "off_by_one", seed)
    return entries, graphs


def test_check_as_grader_is_perfect():
    entries, graphs = graded_profile()
    m = grade_profile(check_grader(entries, graphs), entries)
    assert m.correct_accuracy == 1.0
    assert m.incorrect_accuracy == 1.0
    assert m.correct_total == sum(len(e.correct_actions) for e in entries)
    assert m.incorrect_total == sum(len(e.incorrect_actions) for e in entries)


def test_constant_yes_grader():
    entries, graphs = graded_profile()
    m = grade_profile(lambda state, sai: True, entries)
    assert m.correct_accuracy == 1.0
    assert m.incorrect_accuracy == 0.0


def test_uniform_random_grader_close_to_chance():
    entries, graphs = graded_profile(n=100, seed=2)
    rng = random.Random(123)
    m = grade_profile(lambda state, sai: rng.random() < 0.5, entries)
    assert m.correct_total >= 400 and m.incorrect_total >= 400
    assert abs(m.correct_accuracy - 0.5) < 0.08
    assert abs(m.incorrect_accuracy - 0.5) < 0.08


def test_oracle_demoer_scores_one():
    entries, graphs = graded_profile()
    assert demo_eval(oracle_demoer(entries, graphs), entries, graphs) == 1.0


def test_fixed_wrong_demoer_scores_zero():
    entries, graphs = graded_profile()
    wrong = Sai("display", "UpdateTextField", "nope")
    assert demo_eval(lambda state: wrong, entries, graphs) == 0.0


def test_matcher_equivalent_demo_counts():
    widgets = {"f1": WidgetView("f1", WidgetKind.TEXT_FIELD)}
    g = BehaviorGraph(
        graph_id="alg",
        nodes=frozenset({"a", "b"}),
        edges=(
            Edge(
                edge_id="e1",
                source="a",
                target="b",
                selection="f1",
                matcher=algebraic_matcher("2x+6", witness="2x+6"),
                hint_chain=("Enter the expanded form, 2x+6.",),
            ),
        ),
        start_node="a",
        done_nodes=frozenset({"b"}),
        problem_template=ProblemState(problem_id="alg", widgets=widgets),
    )
    g.validate()
    entries = build_profile([(None, g)], 1, 0)
    graphs = {"alg": g}
    variant = Sai("f1", "UpdateTextField", "2*(x+3)")
    assert demo_eval(lambda state: variant, entries, graphs) == 1.0


def test_evaluate_tutor_three_columns():
    entries, graphs = graded_profile()
    m = evaluate_tutor(
        check_grader(entries, graphs), oracle_demoer(entries, graphs), entries, graphs
    )
    assert (m.correct_accuracy, m.incorrect_accuracy, m.demo_accuracy) == (1.0, 1.0, 1.0)
    assert "Correct Accuracy" in m.as_table()


# ---------------------------------------------------------------------------
# serialization


def test_profile_round_trip():
    entries, _ = graded_profile(n=8, seed=4)
    text = dumps_profile(entries)
    again = loads_profile(text)
    assert again == entries
    assert dumps_profile(again) == text
