"""Flexible matching of student inputs against edge answer specifications.

Four modes:

* ``exact``: string equality after trimming.
* ``numeric``: exact-rational comparison within a tolerance; "1/2" == "0.5".
* ``algebraic``: equality of canonical rational-function forms; "2*(x+3)"
  matches "2x+6" but "x/x" never matches "1".
* ``regex_like_pattern``: anchored regular-expression match.

matches() never raises on bad input: anything unparseable simply fails to
match.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from . import expr
from .errors import DegreeOverflow, ParseError


class MatchMode(str, Enum):
    EXACT = "exact"
    NUMERIC = "numeric"
    ALGEBRAIC = "algebraic"
    PATTERN = "regex_like_pattern"


@dataclass(frozen=True)
class MatcherSpec:
    """How one edge recognizes acceptable inputs.

    The witness is the canonical demo value shown in worked examples; it must
    itself satisfy the spec. Tolerance is required for numeric mode (use 0
    for exact equality) and forbidden elsewhere. ``require_simplified``
    additionally rejects numeric fraction inputs not in lowest terms, for
    tutors that insist on simplified answers.
    """

    mode: MatchMode
    reference: str
    tolerance: Fraction | None = None
    witness: str = ""
    require_simplified: bool = False

    def __post_init__(self):
        if (self.tolerance is not None) != (self.mode == MatchMode.NUMERIC):
            raise ValueError("tolerance is required for numeric mode and only there")
        if self.tolerance is not None and self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")
        if not self.witness:
            object.__setattr__(self, "witness", self.reference)
        if not matches(self, self.witness):
            raise ValueError(
                f"witness {self.witness!r} does not match its own spec "
                f"({self.mode.value} {self.reference!r})"
            )

    def to_dict(self) -> dict:
        doc = {"mode": self.mode.value, "reference": self.reference,
               "witness": self.witness}
        if self.tolerance is not None:
            doc["tolerance"] = str(self.tolerance)
        if self.require_simplified:
            doc["require_simplified"] = True
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "MatcherSpec":
        tolerance = doc.get("tolerance")
        return MatcherSpec(
            mode=MatchMode(doc["mode"]),
            reference=doc["reference"],
            tolerance=Fraction(tolerance) if tolerance is not None else None,
            witness=doc.get("witness", ""),
            require_simplified=bool(doc.get("require_simplified", False)),
        )


def exact_matcher(reference: str) -> MatcherSpec:
    return MatcherSpec(MatchMode.EXACT, reference)


def numeric_matcher(reference: str, tolerance=0, witness: str = "",
                    require_simplified: bool = False) -> MatcherSpec:
    return MatcherSpec(MatchMode.NUMERIC, reference, Fraction(tolerance),
                       witness, require_simplified)


def algebraic_matcher(reference: str, witness: str = "") -> MatcherSpec:
    return MatcherSpec(MatchMode.ALGEBRAIC, reference, None, witness)


def pattern_matcher(pattern: str, witness: str) -> MatcherSpec:
    return MatcherSpec(MatchMode.PATTERN, pattern, None, witness)


def _in_lowest_terms(text: str) -> bool:
    # Rejects "2/4" and "3/1" style inputs; plain numerals always pass.
    node = None
    try:
        node = expr.parse_expr(text)
    except ParseError:
        return False
    if isinstance(node, expr.Div):
        num, den = node.num, node.den
        if isinstance(num, expr.Num) and isinstance(den, expr.Num):
            if num.value.denominator != 1 or den.value.denominator != 1:
                return False
            from math import gcd

            n, d = int(num.value), int(den.value)
            return d != 1 and gcd(abs(n), abs(d)) == 1
    return True


def matches(spec: MatcherSpec, input_text: str) -> bool:
    """True when the input satisfies the spec. Never raises."""
    text = input_text.strip()
    if spec.mode == MatchMode.EXACT:
        return text == spec.reference.strip()
    if spec.mode == MatchMode.NUMERIC:
        value = expr.numeric_value(text)
        if value is None:
            return False
        reference = expr.numeric_value(spec.reference)
        if reference is None:
            return False
        if abs(value - reference) > spec.tolerance:
            return False
        if spec.require_simplified and not _in_lowest_terms(text):
            return False
        return True
    if spec.mode == MatchMode.ALGEBRAIC:
        try:
            return expr.equivalent(spec.reference, text)
        except (ParseError, DegreeOverflow, ZeroDivisionError):
            return False
    if spec.mode == MatchMode.PATTERN:
        try:
            return re.fullmatch(spec.reference, text) is not None
        except re.error:
            return False
    raise ValueError(f"unknown matcher mode {spec.mode!r}")
