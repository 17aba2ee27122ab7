"""Bayesian knowledge tracing: per-skill mastery estimation and
mastery-driven problem and scaffold selection.

The model is the standard two-state HMM update: a Bayes posterior over the
observation (correct or incorrect, filtered through guess and slip), followed
by the learning transition. Parameters default to conventional values and are
always configurable, per skill or globally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DegenerateParams


@dataclass(frozen=True)
class KcParams:
    """Guess/slip/learn parameters for one knowledge component.

    p_init: prior probability the skill is already known.
    p_transit: probability of learning the skill at each opportunity.
    p_guess: probability of answering correctly without knowing it.
    p_slip: probability of answering incorrectly despite knowing it.

    p_guess + p_slip must stay below 1, otherwise correct answers would be
    evidence against knowing the skill.
    """

    p_init: float = 0.25
    p_transit: float = 0.2
    p_guess: float = 0.2
    p_slip: float = 0.1

    def __post_init__(self):
        for name in ("p_init", "p_transit", "p_guess", "p_slip"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.p_guess + self.p_slip >= 1.0:
            raise ValueError("p_guess + p_slip must be < 1")


DEFAULT_PARAMS = KcParams()


def bkt_update(p_known: float, params: KcParams, observed_correct: bool) -> float:
    """Posterior-then-learn update of the mastery probability.

    Returns the new probability that the skill is known after observing one
    correct or incorrect first attempt.
    """
    if not 0.0 <= p_known <= 1.0:
        raise ValueError(f"p_known must be in [0, 1], got {p_known}")
    g, s, t = params.p_guess, params.p_slip, params.p_transit
    if observed_correct:
        numerator = p_known * (1.0 - s)
        denominator = numerator + (1.0 - p_known) * g
    else:
        numerator = p_known * s
        denominator = numerator + (1.0 - p_known) * (1.0 - g)
    if denominator == 0.0:
        raise DegenerateParams(
            f"zero-probability observation (p={p_known}, g={g}, s={s})"
        )
    posterior = numerator / denominator
    return posterior + (1.0 - posterior) * t


@dataclass
class MasteryState:
    """Per-skill mastery probabilities for one simulated student."""

    params: KcParams = DEFAULT_PARAMS
    skill_params: dict[str, KcParams] = field(default_factory=dict)
    p_known: dict[str, float] = field(default_factory=dict)
    opportunities: dict[str, int] = field(default_factory=dict)

    def params_for(self, skill: str) -> KcParams:
        return self.skill_params.get(skill, self.params)

    def mastery(self, skill: str) -> float:
        return self.p_known.get(skill, self.params_for(skill).p_init)

    def observe(self, skill: str, correct: bool) -> float:
        p = bkt_update(self.mastery(skill), self.params_for(skill), correct)
        self.p_known[skill] = p
        self.opportunities[skill] = self.opportunities.get(skill, 0) + 1
        return p


def scaffold_level_for(p_known: float, thresholds=(0.5, 0.85), max_level: int = 2) -> int:
    """Scaffold level shrinks as mastery crosses the thresholds.

    Below the first threshold the student gets the full scaffold; past the
    last one the scaffold drops to the bare final-answer step (level 0).
    """
    level = max_level
    for bound in sorted(thresholds):
        if p_known >= bound:
            level -= 1
    return max(level, 0)


def _candidate_skills(spec) -> list[str]:
    skills = spec.param("skills")
    if skills:
        return list(skills)
    return [spec.domain_id]


def select_next(
    mastery: MasteryState,
    candidates: list,
    policy: str = "lowest_mastery",
    thresholds=(0.5, 0.85),
):
    """Pick the next practice problem from the candidates.

    The default policy targets the skill with the lowest current mastery;
    among candidates exercising that skill, one whose scaffold_level param
    matches the mastery-implied level is preferred.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if policy != "lowest_mastery":
        raise ValueError(f"unknown policy {policy!r}")
    scored = []
    for i, spec in enumerate(candidates):
        weakest = min(mastery.mastery(s) for s in _candidate_skills(spec))
        scored.append((weakest, i, spec))
    weakest_value = min(s[0] for s in scored)
    pool = [item for item in scored if item[0] == weakest_value]
    desired = scaffold_level_for(weakest_value, thresholds)
    for _, _, spec in pool:
        if spec.param("scaffold_level") == desired:
            return spec
    return pool[0][2]


def load_params(path) -> dict[str, KcParams]:
    """Per-skill parameters from a JSON config: {skill: {p_init: ...}}."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return {skill: KcParams(**values) for skill, values in doc.items()}
