import json
import random

import pytest
from hypothesis import given, strategies as st

from tutorenv.core import (
    Outcome,
    ProblemState,
    Reward,
    Sai,
    Transaction,
    WidgetKind,
    WidgetView,
    parse_sai,
    parse_state,
    serialize_state,
)
from tutorenv.errors import MalformedSai


def make_state(order=("a", "b")):
    widgets = {}
    for wid in order:
        widgets[wid] = WidgetView(wid, WidgetKind.TEXT_FIELD, value="", locked=False)
    return ProblemState(problem_id="p1", widgets=widgets)


def test_equal_states_serialize_identically():
    assert serialize_state(make_state()) == serialize_state(make_state())


def test_widget_insertion_order_is_irrelevant():
    assert serialize_state(make_state(("a", "b"))) == serialize_state(
        make_state(("b", "a"))
    )


def random_state(rng: random.Random) -> ProblemState:
    widgets = {}
    for i in range(rng.randint(0, 6)):
        wid = f"w{i}"
        widgets[wid] = WidgetView(
            wid,
            rng.choice(list(WidgetKind)),
            value=rng.choice(["", "7", "3/4", "x+1", "some text\nwith newline"]),
            locked=rng.random() < 0.5,
            visible=rng.random() < 0.9,
        )
    return ProblemState(
        problem_id=f"p{rng.randint(0, 99)}", widgets=widgets, done=rng.random() < 0.1
    )


def test_state_round_trip_over_random_states():
    rng = random.Random(7)
    for _ in range(1000):
        state = random_state(rng)
        assert parse_state(serialize_state(state)) == state


def test_parse_sai_paper_example():
    text = json.dumps(["field1", "UpdateTextField", "7"])
    assert parse_sai(text) == Sai("field1", "UpdateTextField", "7")


def test_parse_sai_empty_input_legal():
    assert parse_sai('["done","ButtonPressed",""]').input == ""


def test_parse_sai_two_components_rejected():
    with pytest.raises(MalformedSai):
        parse_sai('["field1","UpdateTextField"]')


def test_sai_requires_selection():
    with pytest.raises(MalformedSai):
        Sai("", "UpdateTextField", "7")


@given(st.sampled_from([1, -1]))
def test_reward_legal_values(v):
    assert int(Reward(v)) == v


@given(st.integers().filter(lambda v: v not in (1, -1)))
def test_reward_rejects_other_values(v):
    with pytest.raises(ValueError):
        Reward(v)


sai_strategy = st.builds(
    Sai,
    selection=st.text(min_size=1, max_size=8),
    action_type=st.sampled_from(
        ["UpdateTextField", "ButtonPressed", "UpdateCheckbox", "Done"]
    ),
    input=st.text(max_size=12),
)

transaction_strategy = st.builds(
    Transaction,
    student_id=st.text(min_size=1, max_size=8),
    session_id=st.text(min_size=1, max_size=8),
    problem_name=st.text(min_size=1, max_size=12),
    step_name=st.text(min_size=1, max_size=8),
    attempt_at_step=st.integers(min_value=1, max_value=50),
    outcome=st.sampled_from(list(Outcome)),
    sai=sai_strategy,
    skill=st.text(max_size=10),
    opportunity=st.integers(min_value=1, max_value=50),
    timestamp=st.integers(min_value=0, max_value=2**41),
    domain=st.text(max_size=8),
)


@given(sai_strategy)
def test_sai_round_trip(sai):
    assert parse_sai(sai.to_json()) == sai


@given(transaction_strategy)
def test_transaction_round_trip(t):
    assert Transaction.from_dict(json.loads(t.to_json())) == t


def test_transaction_counter_validation():
    with pytest.raises(ValueError):
        Transaction(
            student_id="s",
            session_id="sess",
            problem_name="p",
            step_name="f",
            attempt_at_step=0,
            outcome=Outcome.CORRECT,
            sai=Sai("f", "UpdateTextField", "1"),
            skill="k",
            opportunity=1,
            timestamp=0,
        )
