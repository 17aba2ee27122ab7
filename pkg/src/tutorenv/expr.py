"""Arithmetic/algebra expression parsing and canonical normal forms.

Grammar (documented in docs/expr-grammar.md):

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/")? factor)*      juxtaposition multiplies
    factor  := "-" factor | power
    power   := atom ("^" ["-"] INT)*              integer exponents only
    atom    := NUMBER | LETTER | "(" expr ")"

Numbers are decimal literals read exactly as rationals; variables are single
letters. Implicit multiplication is accepted when a variable or "(" follows a
completed factor ("2x", "2(x+3)", "(x+1)(x-1)").

Canonicalization expands an expression into a rational-function normal form:
a pair of multivariate polynomials with the denominator made monic under a
graded lexicographic term order and all coefficients in lowest terms. Common
polynomial factors are never cancelled, so "x/x" stays distinct from "1"
(they differ at x = 0). Expansion beyond the total-degree bound raises
DegreeOverflow.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegreeOverflow, ParseError

DEFAULT_MAX_DEGREE = 8

# Exponent literals larger than this are rejected outright; they could only
# overflow the degree bound or produce absurd constants.
_MAX_EXPONENT = 999


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Div:
    num: object
    den: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Neg:
    operand: object


ExprNode = Num | Var | Add | Mul | Div | Pow | Neg


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<NUM>\d+(?:\.\d+)?|\.\d+)
  | (?P<VAR>[A-Za-z])
  | (?P<POW>\^|\*\*)
  | (?P<OP>[+\-*/])
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<WS>\s+)
""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        pos = tok[2] if tok is not None else len(self.text)
        raise ParseError(message, pos)

    def parse(self) -> ExprNode:
        node = self.expr()
        if self.peek() is not None:
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self) -> ExprNode:
        terms = [self.term()]
        while True:
            tok = self.peek()
            if tok is not None and tok[0] == "OP" and tok[1] in "+-":
                self.next()
                t = self.term()
                terms.append(Neg(t) if tok[1] == "-" else t)
            else:
                break
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> ExprNode:
        node = self.factor()
        factors = [node]
        divides = [False]
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok[0] == "OP" and tok[1] in "*/":
                self.next()
                factors.append(self.factor())
                divides.append(tok[1] == "/")
            elif tok[0] in ("VAR", "LPAREN"):
                factors.append(self.factor())
                divides.append(False)
            else:
                break
        node = factors[0]
        for f, is_div in zip(factors[1:], divides[1:]):
            node = Div(node, f) if is_div else _mul2(node, f)
        return node

    def factor(self) -> ExprNode:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        if tok[0] == "OP" and tok[1] == "-":
            self.next()
            return Neg(self.factor())
        return self.power()

    def power(self) -> ExprNode:
        node = self.atom()
        while True:
            tok = self.peek()
            if tok is None or tok[0] != "POW":
                break
            self.next()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        sign = 1
        tok = self.peek()
        if tok is not None and tok[0] == "OP" and tok[1] == "-":
            self.next()
            sign = -1
        tok = self.peek()
        if tok is None or tok[0] != "NUM" or "." in tok[1]:
            self.fail("exponent must be an integer literal")
        self.next()
        value = int(tok[1])
        if value > _MAX_EXPONENT:
            raise ParseError("exponent too large", tok[2])
        return sign * value

    def atom(self) -> ExprNode:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        kind, text, pos = tok
        if kind == "NUM":
            self.next()
            return Num(Fraction(text))
        if kind == "VAR":
            self.next()
            return Var(text)
        if kind == "LPAREN":
            self.next()
            node = self.expr()
            closing = self.peek()
            if closing is None or closing[0] != "RPAREN":
                self.fail("expected ')'")
            self.next()
            return node
        self.fail(f"unexpected token {text!r}")


def _mul2(a: ExprNode, b: ExprNode) -> Mul:
    parts = a.factors if isinstance(a, Mul) else (a,)
    parts += b.factors if isinstance(b, Mul) else (b,)
    return Mul(parts)


def parse_expr(text: str) -> ExprNode:
    """Parse expression text into an AST; raises ParseError with position."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(node: ExprNode, env: dict[str, Fraction] | None = None) -> Fraction:
    """Evaluate an AST exactly over the rationals.

    Unbound variables raise KeyError; division by zero raises
    ZeroDivisionError.
    """
    env = env or {}
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return Fraction(env[node.name])
    if isinstance(node, Add):
        total = Fraction(0)
        for t in node.terms:
            total += evaluate(t, env)
        return total
    if isinstance(node, Mul):
        total = Fraction(1)
        for f in node.factors:
            total *= evaluate(f, env)
        return total
    if isinstance(node, Div):
        return evaluate(node.num, env) / evaluate(node.den, env)
    if isinstance(node, Pow):
        return evaluate(node.base, env) ** node.exp
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    raise TypeError(f"not an expression node: {node!r}")


def free_vars(node: ExprNode) -> set[str]:
    if isinstance(node, Num):
        return set()
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Add):
        out = set()
        for t in node.terms:
            out |= free_vars(t)
        return out
    if isinstance(node, Mul):
        out = set()
        for f in node.factors:
            out |= free_vars(f)
        return out
    if isinstance(node, Div):
        return free_vars(node.num) | free_vars(node.den)
    if isinstance(node, Pow):
        return free_vars(node.base)
    if isinstance(node, Neg):
        return free_vars(node.operand)
    raise TypeError(f"not an expression node: {node!r}")


def numeric_value(text_or_node) -> Fraction | None:
    """Exact rational value of a closed expression, or None.

    Returns None when the text does not parse, contains variables, or divides
    by zero. Used by numeric matchers, which must never raise.
    """
    node = text_or_node
    if isinstance(node, str):
        try:
            node = parse_expr(node)
        except ParseError:
            return None
    if free_vars(node):
        return None
    try:
        return evaluate(node)
    except ZeroDivisionError:
        return None


# ---------------------------------------------------------------------------
# Polynomial arithmetic
#
# A monomial is a tuple of (variable, exponent) pairs sorted by variable; a
# polynomial maps monomials to nonzero Fraction coefficients.

_P_ONE = {(): Fraction(1)}


def _mono_degree(mono) -> int:
    return sum(e for _, e in mono)


def _term_key(mono):
    # graded lex: compare total degree first, then the exponent vector
    return (_mono_degree(mono), mono)


def _mono_mul(a, b):
    exps = dict(a)
    for var, e in b:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items()))


def _p_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for mono, coeff in b.items():
        c = out.get(mono, Fraction(0)) + coeff
        if c:
            out[mono] = c
        else:
            out.pop(mono, None)
    return out


def _p_neg(a: dict) -> dict:
    return {mono: -coeff for mono, coeff in a.items()}


def _p_mul(a: dict, b: dict, max_degree: int) -> dict:
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            mono = _mono_mul(m1, m2)
            if _mono_degree(mono) > max_degree:
                raise DegreeOverflow(
                    f"expansion exceeds total degree {max_degree}"
                )
            c = out.get(mono, Fraction(0)) + c1 * c2
            if c:
                out[mono] = c
            else:
                out.pop(mono, None)
    return out


def _p_pow(a: dict, n: int, max_degree: int) -> dict:
    out = dict(_P_ONE)
    for _ in range(n):
        out = _p_mul(out, a, max_degree)
    return out


def _to_rational(node: ExprNode, max_degree: int) -> tuple[dict, dict]:
    """Expand an AST into a (numerator, denominator) polynomial pair."""
    if isinstance(node, Num):
        num = {(): node.value} if node.value else {}
        return num, dict(_P_ONE)
    if isinstance(node, Var):
        return {((node.name, 1),): Fraction(1)}, dict(_P_ONE)
    if isinstance(node, Neg):
        p, q = _to_rational(node.operand, max_degree)
        return _p_neg(p), q
    if isinstance(node, Add):
        p, q = {}, dict(_P_ONE)
        for term in node.terms:
            tp, tq = _to_rational(term, max_degree)
            p = _p_add(_p_mul(p, tq, max_degree), _p_mul(tp, q, max_degree))
            q = _p_mul(q, tq, max_degree)
        return p, q
    if isinstance(node, Mul):
        p, q = dict(_P_ONE), dict(_P_ONE)
        for f in node.factors:
            fp, fq = _to_rational(f, max_degree)
            p = _p_mul(p, fp, max_degree)
            q = _p_mul(q, fq, max_degree)
        return p, q
    if isinstance(node, Div):
        ap, aq = _to_rational(node.num, max_degree)
        bp, bq = _to_rational(node.den, max_degree)
        if not bp:
            raise ZeroDivisionError("denominator expands to zero")
        return _p_mul(ap, bq, max_degree), _p_mul(aq, bp, max_degree)
    if isinstance(node, Pow):
        bp, bq = _to_rational(node.base, max_degree)
        n = node.exp
        if n >= 0:
            return _p_pow(bp, n, max_degree), _p_pow(bq, n, max_degree)
        if not bp:
            raise ZeroDivisionError("negative power of zero")
        return _p_pow(bq, -n, max_degree), _p_pow(bp, -n, max_degree)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Canonical forms


@dataclass(frozen=True)
class CanonicalForm:
    """Normal form: numerator and denominator term lists, denominator monic.

    Terms are (monomial, coefficient) pairs in descending graded-lex order.
    """

    num: tuple
    den: tuple

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def conditional(self) -> bool:
        """True when the denominator carries variables.

        Such forms are only equivalent to others where the excluded points
        coincide; they are never collapsed to a plain polynomial.
        """
        return any(mono for mono, _ in self.den)


def _sorted_terms(poly: dict) -> tuple:
    return tuple(
        sorted(poly.items(), key=lambda kv: _term_key(kv[0]), reverse=True)
    )


def canonical_form(expression, max_degree: int = DEFAULT_MAX_DEGREE) -> CanonicalForm:
    """Canonical rational-function form of an expression or source text."""
    node = parse_expr(expression) if isinstance(expression, str) else expression
    p, q = _to_rational(node, max_degree)
    lead = max(q, key=_term_key)
    scale = q[lead]
    p = {m: c / scale for m, c in p.items()}
    q = {m: c / scale for m, c in q.items()}
    return CanonicalForm(num=_sorted_terms(p), den=_sorted_terms(q))


def equivalent(a, b, max_degree: int = DEFAULT_MAX_DEGREE) -> bool:
    """Algebraic equivalence under the no-cancellation policy."""
    return canonical_form(a, max_degree) == canonical_form(b, max_degree)


def _poly_to_ast(terms: tuple) -> ExprNode:
    if not terms:
        return Num(Fraction(0))
    parts = []
    for mono, coeff in terms:
        factors = [
            Var(var) if exp == 1 else Pow(Var(var), exp) for var, exp in mono
        ]
        if not factors:
            parts.append(Num(coeff))
        elif coeff == 1:
            parts.append(factors[0] if len(factors) == 1 else Mul(tuple(factors)))
        else:
            parts.append(Mul((Num(coeff), *factors)))
    return parts[0] if len(parts) == 1 else Add(tuple(parts))


def canonicalize(node: ExprNode, max_degree: int = DEFAULT_MAX_DEGREE) -> ExprNode:
    """Rebuild an AST in canonical form; idempotent by construction."""
    form = canonical_form(node, max_degree)
    num_ast = _poly_to_ast(form.num)
    if form.den == _sorted_terms(_P_ONE):
        return num_ast
    return Div(num_ast, _poly_to_ast(form.den))


def to_text(node: ExprNode) -> str:
    """Render an AST back to parseable source text."""
    if isinstance(node, Num):
        v = node.value
        if v.denominator == 1:
            return str(v.numerator) if v >= 0 else f"({v.numerator})"
        text = f"{v.numerator}/{v.denominator}"
        return text if v >= 0 else f"({text})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Add):
        return "(" + "+".join(to_text(t) for t in node.terms) + ")"
    if isinstance(node, Mul):
        return "(" + "*".join(to_text(f) for f in node.factors) + ")"
    if isinstance(node, Div):
        return f"({to_text(node.num)}/{to_text(node.den)})"
    if isinstance(node, Pow):
        exp = str(node.exp) if node.exp >= 0 else f"-{-node.exp}"
        return f"({to_text(node.base)}^{exp})"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    raise TypeError(f"not an expression node: {node!r}")
