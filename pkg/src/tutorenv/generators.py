"""Seeded problem generators that compile instances into behavior graphs.

Three families: fraction arithmetic (same denominator, different denominator,
multiplication), multi-column addition with carries, and sequential scaffold
templates with selectable step granularity. Every generator is a pure
function of (domain_id, seed, params): equal inputs give byte-identical
graph serializations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .core import ProblemState, WidgetKind, WidgetView
from .errors import TemplateError, ParseError
from . import expr
from .graph import BehaviorGraph, Edge, UnorderedGroup
from .matching import exact_matcher, numeric_matcher

FRACTION_KINDS = ("same_denominator", "different_denominator", "multiply")

# Operand numerators and denominators for fraction problems.
_OPERAND_LO, _OPERAND_HI = 1, 15


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed to regenerate one problem instance."""

    domain_id: str
    seed: int
    params: tuple[tuple[str, object], ...] = ()
    display_text: str = ""

    @property
    def problem_id(self) -> str:
        return f"{self.domain_id}-{self.seed}"

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def _label(wid: str, text: str) -> WidgetView:
    return WidgetView(wid, WidgetKind.LABEL, text, locked=True)


def _field(wid: str) -> WidgetView:
    return WidgetView(wid, WidgetKind.TEXT_FIELD, "", locked=False)


def _button(wid: str) -> WidgetView:
    return WidgetView(wid, WidgetKind.BUTTON, "", locked=False)


def _answer_edge(domain: str, eid: str, source: str, target: str,
                 selection: str, value, concept_hint: str,
                 skippable: bool = False) -> Edge:
    witness = _render_value(value)
    return Edge(
        edge_id=eid,
        source=source,
        target=target,
        selection=selection,
        matcher=numeric_matcher(witness, tolerance=0),
        skippable=skippable,
        hint_chain=(concept_hint, f"Enter {witness} in {selection}."),
        skill=f"{domain}.{selection}",
    )


def _done_edge(domain: str, eid: str, source: str, target: str) -> Edge:
    return Edge(
        edge_id=eid,
        source=source,
        target=target,
        selection="done",
        action_type="ButtonPressed",
        matcher=exact_matcher(""),
        hint_chain=("All fields are filled in. Press done.",),
        skill=f"{domain}.done",
    )


def _render_value(value) -> str:
    f = Fraction(value)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# Fractions


def gen_fraction(kind: str, seed: int, params=None) -> tuple[ProblemSpec, BehaviorGraph]:
    """Generate one fraction-arithmetic problem and its tutor graph.

    same_denominator: one unordered answer stage (numerator, denominator).
    different_denominator: a convert stage over the common denominator, then
    the answer stage. multiply: one answer stage with the unsimplified
    product. All matchers are numeric with tolerance 0.
    """
    if kind not in FRACTION_KINDS:
        raise ValueError(f"unknown fraction kind {kind!r}")
    rng = random.Random(seed)
    n1 = rng.randint(_OPERAND_LO, _OPERAND_HI)
    d1 = rng.randint(_OPERAND_LO, _OPERAND_HI)
    n2 = rng.randint(_OPERAND_LO, _OPERAND_HI)
    d2 = rng.randint(_OPERAND_LO, _OPERAND_HI)
    if kind == "same_denominator":
        d2 = d1
    elif kind == "different_denominator":
        while d2 == d1:
            d2 = rng.randint(_OPERAND_LO, _OPERAND_HI)
    return build_fraction_problem(kind, (n1, d1, n2, d2), seed, params)


def build_fraction_problem(
    kind: str, operands: tuple[int, int, int, int], seed: int, params=None
) -> tuple[ProblemSpec, BehaviorGraph]:
    """Compile a fraction problem with pinned operands (n1/d1 op n2/d2)."""
    if kind not in FRACTION_KINDS:
        raise ValueError(f"unknown fraction kind {kind!r}")
    params = dict(params or {})
    n1, d1, n2, d2 = operands
    domain = {
        "same_denominator": "fraction_same_den",
        "different_denominator": "fraction_diff_den",
        "multiply": "fraction_multiply",
    }[kind]

    if kind == "same_denominator":
        if d1 != d2:
            raise ValueError("same_denominator operands must share a denominator")
        op = "+"
        answer = Fraction(n1 + n2, 1), Fraction(d1, 1)
    elif kind == "different_denominator":
        if d1 == d2:
            raise ValueError("different_denominator operands must differ")
        op = "+"
        common = lcm(d1, d2)
        answer = (
            Fraction(n1 * (common // d1) + n2 * (common // d2), 1),
            Fraction(common, 1),
        )
    else:
        op = "*"
        answer = Fraction(n1 * n2, 1), Fraction(d1 * d2, 1)

    display = f"{n1}/{d1} {op} {n2}/{d2}"
    spec = ProblemSpec(
        domain_id=domain,
        seed=seed,
        params=tuple(sorted({**params, "kind": kind}.items())),
        display_text=display,
    )

    widgets = {
        "display": _label("display", display),
        "answer_num": _field("answer_num"),
        "answer_den": _field("answer_den"),
        "done": _button("done"),
    }
    nodes = {"start", "answered", "end"}
    edges: list[Edge] = []
    groups: list[UnorderedGroup] = []

    first_answer_node = "start"
    if kind == "different_denominator":
        nodes.add("converted")
        first_answer_node = "converted"
        for wid in ("conv1_num", "conv1_den", "conv2_num", "conv2_den"):
            widgets[wid] = _field(wid)
        common = int(answer[1])
        conv_values = {
            "conv1_num": n1 * (common // d1),
            "conv1_den": common,
            "conv2_num": n2 * (common // d2),
            "conv2_den": common,
        }
        for wid, value in conv_values.items():
            edges.append(
                _answer_edge(
                    domain,
                    f"e1_{wid}",
                    "start",
                    "converted",
                    wid,
                    value,
                    f"Rewrite both fractions over the common denominator {common}.",
                )
            )
        groups.append(
            UnorderedGroup("g_convert", tuple(e.edge_id for e in edges), True)
        )

    concept = (
        "Multiply the numerators and multiply the denominators."
        if kind == "multiply"
        else "Add the numerators; the denominator does not change."
        if kind == "same_denominator"
        else "Add the converted numerators over the common denominator."
    )
    answer_edges = [
        _answer_edge(domain, "e2_answer_num", first_answer_node, "answered",
                     "answer_num", answer[0], concept),
        _answer_edge(domain, "e2_answer_den", first_answer_node, "answered",
                     "answer_den", answer[1], concept),
    ]
    edges.extend(answer_edges)
    groups.append(
        UnorderedGroup("g_answer", tuple(e.edge_id for e in answer_edges), True)
    )

    done_source = "answered"
    num, den = int(answer[0]), int(answer[1])
    if params.get("simplify") and gcd(num, den) > 1:
        nodes.add("simplified")
        g = gcd(num, den)
        for wid, value in (("simple_num", num // g), ("simple_den", den // g)):
            widgets[wid] = _field(wid)
            edges.append(
                _answer_edge(
                    domain,
                    f"e3_{wid}",
                    "answered",
                    "simplified",
                    wid,
                    value,
                    "Reduce the fraction to lowest terms.",
                )
            )
        groups.append(
            UnorderedGroup("g_simplify", ("e3_simple_num", "e3_simple_den"), True)
        )
        done_source = "simplified"

    edges.append(_done_edge(domain, "e9_done", done_source, "end"))

    graph = BehaviorGraph(
        graph_id=spec.problem_id,
        nodes=frozenset(nodes),
        edges=tuple(edges),
        start_node="start",
        done_nodes=frozenset({"end"}),
        problem_template=ProblemState(problem_id=spec.problem_id, widgets=widgets),
        groups=tuple(groups),
    )
    graph.validate()
    return spec, graph


# ---------------------------------------------------------------------------
# Multi-column addition


def gen_multicolumn_addition(n_digits: int, seed: int) -> tuple[ProblemSpec, BehaviorGraph]:
    """Generate a column-addition problem with carry fields.

    One stage per column, right to left; each stage is an unordered group of
    the column's answer digit and the produced carry field. Carry edges are
    skippable exactly when that carry is zero; an overflow digit becomes the
    leftmost answer field.
    """
    if not 2 <= n_digits <= 6:
        raise ValueError("n_digits must be between 2 and 6")
    rng = random.Random(seed)
    lo, hi = 10 ** (n_digits - 1), 10**n_digits - 1
    a, b = rng.randint(lo, hi), rng.randint(lo, hi)
    return build_multicolumn_problem(a, b, seed)


def build_multicolumn_problem(a: int, b: int, seed: int) -> tuple[ProblemSpec, BehaviorGraph]:
    """Compile a column-addition problem for pinned same-width addends."""
    if len(str(a)) != len(str(b)):
        raise ValueError("addends must have the same digit count")
    n_digits = len(str(a))
    domain = "multicolumn_addition"
    total = a + b
    display = f"{a} + {b}"

    spec = ProblemSpec(
        domain_id=domain,
        seed=seed,
        params=(("n_digits", n_digits),),
        display_text=display,
    )

    digits_a = [int(c) for c in reversed(str(a))]
    digits_b = [int(c) for c in reversed(str(b))]
    # answer digit and carry-out per column, right to left
    answers, carries = [], []
    carry = 0
    for i in range(n_digits):
        s = digits_a[i] + digits_b[i] + carry
        answers.append(s % 10)
        carry = s // 10
        carries.append(carry)
    overflow = carry  # becomes the leftmost answer digit when 1

    widgets = {
        "display": _label("display", display),
        "done": _button("done"),
    }
    nodes = {"end"}
    edges: list[Edge] = []
    groups: list[UnorderedGroup] = []

    for i in range(n_digits):
        nodes.add(f"col{i}")
        widgets[f"ans{i}"] = _field(f"ans{i}")
        if i + 1 < n_digits:
            widgets[f"carry{i + 1}"] = _field(f"carry{i + 1}")
    if overflow:
        widgets[f"ans{n_digits}"] = _field(f"ans{n_digits}")
    nodes.add("answered")

    for i in range(n_digits):
        source = f"col{i}"
        target = f"col{i + 1}" if i + 1 < n_digits else "answered"
        members = [
            _answer_edge(
                domain,
                f"e{i}_ans{i}",
                source,
                target,
                f"ans{i}",
                answers[i],
                f"Add the digits in column {i} (plus any carry).",
            )
        ]
        if i + 1 < n_digits:
            members.append(
                _answer_edge(
                    domain,
                    f"e{i}_carry{i + 1}",
                    source,
                    target,
                    f"carry{i + 1}",
                    carries[i],
                    f"Record the carry out of column {i}.",
                    skippable=carries[i] == 0,
                )
            )
        elif overflow:
            members.append(
                _answer_edge(
                    domain,
                    f"e{i}_ans{n_digits}",
                    source,
                    target,
                    f"ans{n_digits}",
                    overflow,
                    "The final carry becomes the leading digit of the sum.",
                )
            )
        edges.extend(members)
        if len(members) >= 2:
            groups.append(
                UnorderedGroup(
                    f"g_col{i}", tuple(e.edge_id for e in members), True
                )
            )

    edges.append(_done_edge(domain, "e9_done", "answered", "end"))

    graph = BehaviorGraph(
        graph_id=spec.problem_id,
        nodes=frozenset(nodes),
        edges=tuple(edges),
        start_node="col0",
        done_nodes=frozenset({"end"}),
        problem_template=ProblemState(problem_id=spec.problem_id, widgets=widgets),
        groups=tuple(groups),
    )
    graph.validate()
    assert sum(d * 10**i for i, d in enumerate(answers)) + overflow * 10**n_digits == total
    return spec, graph


# ---------------------------------------------------------------------------
# Sequential scaffolds


@dataclass(frozen=True)
class ScaffoldStep:
    """One text-field step computed from the drawn operands.

    scaffold_level 0 marks the final-answer step; higher levels add
    intermediate work shown only at matching scaffold settings.
    """

    selection: str
    formula: str
    scaffold_level: int
    prompt: str = ""


@dataclass(frozen=True)
class ScaffoldTemplate:
    domain_id: str
    operands: tuple[tuple[str, int, int], ...]
    steps: tuple[ScaffoldStep, ...]
    derived: tuple[tuple[str, str], ...] = ()
    display: str = ""

    @property
    def max_level(self) -> int:
        return max(s.scaffold_level for s in self.steps)


LINEAR_EQUATION_TEMPLATE = ScaffoldTemplate(
    domain_id="scaffold_linear_eq",
    operands=(("a", 2, 9), ("x", 2, 9), ("b", 1, 9)),
    derived=(("c", "a*x+b"),),
    display="{a}x + {b} = {c}",
    steps=(
        ScaffoldStep("subtract_const", "c-b", 1, "Subtract the constant from both sides."),
        ScaffoldStep("answer", "(c-b)/a", 0, "Divide by the coefficient to isolate x."),
    ),
)


def _resolve_formula(formula: str, env: dict[str, Fraction]) -> Fraction:
    try:
        node = expr.parse_expr(formula)
        return expr.evaluate(node, env)
    except (ParseError, KeyError, ZeroDivisionError) as exc:
        raise TemplateError(f"cannot resolve formula {formula!r}: {exc}") from exc


def gen_sequential_scaffold(
    template: ScaffoldTemplate, seed: int, scaffold_level: int | None = None
) -> tuple[ProblemSpec, BehaviorGraph]:
    """Instantiate a scaffold template as a linear graph.

    Includes exactly the steps whose scaffold_level is at most the requested
    level (default: the template's maximum, i.e. fully scaffolded).
    """
    rng = random.Random(seed)
    operands = {name: rng.randint(lo, hi) for name, lo, hi in template.operands}
    return build_scaffold_problem(template, operands, seed, scaffold_level)


def build_scaffold_problem(
    template: ScaffoldTemplate,
    operands: dict[str, int],
    seed: int,
    scaffold_level: int | None = None,
) -> tuple[ProblemSpec, BehaviorGraph]:
    """Compile a scaffold template with pinned operand values."""
    if scaffold_level is None:
        scaffold_level = template.max_level
    env: dict[str, Fraction] = {k: Fraction(v) for k, v in operands.items()}
    for name, formula in template.derived:
        env[name] = _resolve_formula(formula, env)

    display = template.display.format(**{k: int(v) for k, v in env.items()})
    steps = [s for s in template.steps if s.scaffold_level <= scaffold_level]
    if not steps:
        raise TemplateError("no steps remain at the requested scaffold level")

    spec = ProblemSpec(
        domain_id=template.domain_id,
        seed=seed,
        params=(("scaffold_level", scaffold_level),),
        display_text=display,
    )

    widgets = {"display": _label("display", display), "done": _button("done")}
    nodes = {"end"}
    edges: list[Edge] = []
    for i, step in enumerate(steps):
        value = _resolve_formula(step.formula, env)
        widgets[step.selection] = _field(step.selection)
        nodes.add(f"n{i}")
        target = f"n{i + 1}" if i + 1 < len(steps) else "answered"
        edges.append(
            _answer_edge(
                template.domain_id,
                f"e{i}_{step.selection}",
                f"n{i}",
                target,
                step.selection,
                value,
                step.prompt or f"Work out {step.selection}.",
            )
        )
    nodes.add("answered")
    edges.append(_done_edge(template.domain_id, "e9_done", "answered", "end"))

    graph = BehaviorGraph(
        graph_id=spec.problem_id,
        nodes=frozenset(nodes),
        edges=tuple(edges),
        start_node="n0",
        done_nodes=frozenset({"end"}),
        problem_template=ProblemState(problem_id=spec.problem_id, widgets=widgets),
    )
    graph.validate()
    return spec, graph


# ---------------------------------------------------------------------------
# Registry


def _gen_fraction_domain(kind):
    def gen(seed, params=None):
        return gen_fraction(kind, seed, params)

    return gen


def _gen_multicolumn(seed, params=None):
    params = dict(params or {})
    return gen_multicolumn_addition(int(params.get("n_digits", 2)), seed)


def _gen_scaffold(seed, params=None):
    params = dict(params or {})
    level = params.get("scaffold_level")
    return gen_sequential_scaffold(
        LINEAR_EQUATION_TEMPLATE, seed, None if level is None else int(level)
    )


DOMAINS = {
    "fraction_same_den": _gen_fraction_domain("same_denominator"),
    "fraction_diff_den": _gen_fraction_domain("different_denominator"),
    "fraction_multiply": _gen_fraction_domain("multiply"),
    "multicolumn_addition": _gen_multicolumn,
    "scaffold_linear_eq": _gen_scaffold,
}


def generate(domain_id: str, seed: int, params=None) -> tuple[ProblemSpec, BehaviorGraph]:
    if domain_id not in DOMAINS:
        raise ValueError(
            f"unknown domain {domain_id!r}; available: {', '.join(sorted(DOMAINS))}"
        )
    return DOMAINS[domain_id](seed, params)


def generate_pool(domain_id: str, n: int, seed: int, params=None):
    """n problems with consecutive derived seeds; deterministic."""
    return [generate(domain_id, seed + i, params) for i in range(n)]
