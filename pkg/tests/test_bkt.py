from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tutorenv.bkt import (
    KcParams,
    MasteryState,
    bkt_update,
    load_params,
    scaffold_level_for,
    select_next,
)
from tutorenv.errors import DegenerateParams
from tutorenv.generators import ProblemSpec


def exact_bkt(p, g, s, t, correct):
    """Independent oracle: the same update in exact rational arithmetic."""
    p, g, s, t = map(Fraction, (p, g, s, t))
    if correct:
        posterior = (p * (1 - s)) / (p * (1 - s) + (1 - p) * g)
    else:
        posterior = (p * s) / (p * s + (1 - p) * (1 - g))
    return posterior + (1 - posterior) * t


def test_worked_example_against_exact_oracle():
    params = KcParams(p_init=0.5, p_transit=0.3, p_guess=0.2, p_slip=0.1)
    expected = exact_bkt("1/2", "1/5", "1/10", "3/10", correct=True)
    assert expected == Fraction(48, 55)  # posterior 9/11, then learn step
    got = bkt_update(0.5, params, observed_correct=True)
    assert got == pytest.approx(float(expected), abs=1e-12)
    assert got == pytest.approx(0.8727, abs=1e-4)
    posterior_only = exact_bkt("1/2", "1/5", "1/10", 0, correct=True)
    assert float(posterior_only) == pytest.approx(0.8182, abs=1e-4)


def test_certainty_fixed_point():
    params = KcParams(p_init=1.0, p_transit=0.3, p_guess=0.2, p_slip=0.0)
    assert bkt_update(1.0, params, True) == 1.0


def test_zero_fixed_point():
    params = KcParams(p_init=0.0, p_transit=0.0, p_guess=0.0, p_slip=0.1)
    assert bkt_update(0.0, params, False) == 0.0


def test_degenerate_denominator():
    params = KcParams(p_guess=0.0, p_slip=0.5)
    with pytest.raises(DegenerateParams):
        bkt_update(0.0, params, observed_correct=True)


def test_param_validation():
    with pytest.raises(ValueError):
        KcParams(p_guess=0.6, p_slip=0.5)
    with pytest.raises(ValueError):
        KcParams(p_init=1.5)


probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@given(
    p=probabilities,
    g=st.floats(min_value=0.01, max_value=0.45),
    s=st.floats(min_value=0.01, max_value=0.45),
    t=probabilities,
    correct=st.booleans(),
)
def test_update_stays_in_unit_interval(p, g, s, t, correct):
    params = KcParams(p_init=0.2, p_transit=t, p_guess=g, p_slip=s)
    assert 0.0 <= bkt_update(p, params, correct) <= 1.0


@given(
    ps=st.tuples(probabilities, probabilities),
    correct=st.booleans(),
)
def test_update_monotone_in_prior(ps, correct):
    params = KcParams()
    lo, hi = sorted(ps)
    assert bkt_update(lo, params, correct) <= bkt_update(hi, params, correct) + 1e-12


def test_correct_streak_non_decreasing():
    params = KcParams(p_guess=0.3, p_slip=0.2, p_transit=0.1)
    mastery = MasteryState(params=params)
    last = mastery.mastery("frac")
    for _ in range(10):
        now = mastery.observe("frac", correct=True)
        assert now >= last - 1e-12
        last = now


def test_scaffold_level_thresholds():
    assert scaffold_level_for(0.2) == 2
    assert scaffold_level_for(0.6) == 1
    assert scaffold_level_for(0.9) == 0


def candidate(domain, skills, level=None):
    params = [("skills", tuple(skills))]
    if level is not None:
        params.append(("scaffold_level", level))
    return ProblemSpec(domain_id=domain, seed=0, params=tuple(params))


def test_single_candidate_returned():
    mastery = MasteryState()
    only = candidate("d1", ["s1"])
    assert select_next(mastery, [only]) is only


def test_lowest_mastery_skill_wins():
    mastery = MasteryState()
    mastery.p_known = {"easy": 0.9, "hard": 0.2}
    chosen = select_next(
        mastery, [candidate("d1", ["easy"]), candidate("d2", ["hard"])]
    )
    assert chosen.domain_id == "d2"


def test_high_mastery_prefers_level_zero_variant():
    mastery = MasteryState()
    mastery.p_known = {"s": 0.9}
    variants = [
        candidate("d", ["s"], level=2),
        candidate("d", ["s"], level=0),
    ]
    assert select_next(mastery, variants).param("scaffold_level") == 0


def test_load_params(tmp_path):
    path = tmp_path / "params.json"
    path.write_text('{"frac": {"p_init": 0.4, "p_guess": 0.1}}')
    loaded = load_params(path)
    assert loaded["frac"].p_init == 0.4
    assert loaded["frac"].p_slip == 0.1
