"""
Arithmetic rules over extracted fields.

A rule is written as text, "<field> = <expression>", where the expression
uses field names (dotted names allowed), decimal literals, percentages,
"+", "-", "*", parentheses and sum(<field>). Examples:

    total.cashprice = total.total_price + total.changeprice
    sub_total.tax_price = 10% * (sub_total.subtotal_price + sub_total.service_price)
    subtotal_value = sum(prod_price_value)

Text is parsed with Python's ast module restricted to those node types.
Arithmetic is exact (fractions); a rule holds when both sides differ by at
most one minor unit or by a relative error of at most 1e-6.
"""

import ast
import re
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from attr import dataclass

from amounts import Amount
from errors import ConstraintError
from params import (
    AMOUNT_ABS_TOLERANCE,
    AMOUNT_REL_TOLERANCE,
    MINOR_DIGITS,
    Aggregation,
    FieldKind,
    Verdict,
)

_ABS_TOL = Fraction(AMOUNT_ABS_TOLERANCE, 10 ** MINOR_DIGITS)
_REL_TOL = Fraction(str(AMOUNT_REL_TOLERANCE))
_PERCENT_RE = re.compile(r"(\d+(?:\.\d+)?)\s*%")

# (field name, forced sum) -> value
Lookup = Callable[[str, bool], Fraction]


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: FieldKind = FieldKind.MANDATORY
    aggregation: Aggregation = Aggregation.SINGLE


class Expr:
    def evaluate(self, lookup: Lookup) -> Fraction:
        raise NotImplementedError

    def fields(self) -> set[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class FieldRef(Expr):
    name: str
    force_sum: bool = False

    def evaluate(self, lookup: Lookup) -> Fraction:
        return lookup(self.name, self.force_sum)

    def fields(self) -> set[str]:
        return {self.name}


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def evaluate(self, lookup: Lookup) -> Fraction:
        return self.value

    def fields(self) -> set[str]:
        return set()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, lookup: Lookup) -> Fraction:
        a = self.left.evaluate(lookup)
        b = self.right.evaluate(lookup)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        return a * b

    def fields(self) -> set[str]:
        return self.left.fields() | self.right.fields()


@dataclass(frozen=True)
class ArithmeticRule:
    """lhs = rhs, over the declared field specs."""
    text: str
    lhs: FieldRef
    rhs: Expr
    specs: Mapping[str, FieldSpec]

    def fields(self) -> set[str]:
        return self.lhs.fields() | self.rhs.fields()


_BIN_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*"}


def _dotted(node: ast.AST) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        head = _dotted(node.value)
        return None if head is None else f"{head}.{node.attr}"
    return None


def _build(node: ast.AST, text: str) -> Expr:
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        return BinOp(_BIN_OPS[type(node.op)], _build(node.left, text), _build(node.right, text))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return BinOp("-", Const(Fraction(0)), _build(node.operand, text))
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return Const(Fraction(str(node.value)))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sum":
        if len(node.args) != 1 or node.keywords:
            raise ConstraintError(f"sum() takes exactly one field in rule {text!r}")
        name = _dotted(node.args[0])
        if name is None:
            raise ConstraintError(f"sum() takes a field name in rule {text!r}")
        return FieldRef(name, force_sum=True)
    name = _dotted(node)
    if name is not None:
        return FieldRef(name)
    raise ConstraintError(f"Unsupported syntax {ast.dump(node)} in rule {text!r}")


def _parse_side(side: str, text: str) -> Expr:
    side = _PERCENT_RE.sub(lambda m: str(Decimal(m.group(1)) / 100), side)
    try:
        tree = ast.parse(side.strip(), mode="eval")
    except SyntaxError as e:
        raise ConstraintError(f"Cannot parse rule {text!r}: {e.msg}") from e
    return _build(tree.body, text)


def parse_rule(text: str, specs: Sequence[FieldSpec] | Mapping[str, FieldSpec]) -> ArithmeticRule:
    """
    Parse "<field> = <expression>"
    :param specs: Declared fields; the rule may only mention these
    """
    if not isinstance(specs, Mapping):
        specs = {spec.name: spec for spec in specs}
    sides = text.split("=")
    if len(sides) != 2:
        raise ConstraintError(f"Rule {text!r} needs exactly one '='")
    lhs = _parse_side(sides[0], text)
    if not isinstance(lhs, FieldRef):
        raise ConstraintError(f"Left-hand side of rule {text!r} must be a single field")
    rhs = _parse_side(sides[1], text)

    rule = ArithmeticRule(text=text.strip(), lhs=lhs, rhs=rhs, specs=dict(specs))
    unknown = sorted(rule.fields() - set(specs))
    if unknown:
        raise ConstraintError(f"Rule {text!r} mentions undeclared fields {unknown}")
    return rule


def values_equal(a: Fraction, b: Fraction) -> bool:
    diff = abs(a - b)
    return diff <= _ABS_TOL or diff <= _REL_TOL * max(abs(a), abs(b))


def eval_rule(rule: ArithmeticRule, fields: Mapping[str, Sequence[Amount]]) -> Verdict:
    """
    Evaluate one rule against extracted amounts
    :param fields: field name -> parsed amounts in document order
    :return: NOT_EVALUATED when a mandatory field is missing, otherwise
             SATISFIED or VIOLATED; missing optional fields count as 0 and a
             missing required field is a violation
    """
    missing = [name for name in sorted(rule.fields()) if not fields.get(name)]
    kinds = {rule.specs[name].kind for name in missing}
    if FieldKind.REQUIRED in kinds:
        return Verdict.VIOLATED
    if FieldKind.MANDATORY in kinds:
        return Verdict.NOT_EVALUATED

    def lookup(name: str, force_sum: bool) -> Fraction:
        amounts = fields.get(name) or ()
        if not amounts:
            return Fraction(0)
        if force_sum or rule.specs[name].aggregation is Aggregation.SUM:
            return sum((a.major for a in amounts), Fraction(0))
        # Extra spans of a single-valued field do not count
        return amounts[0].major

    lhs = rule.lhs.evaluate(lookup)
    rhs = rule.rhs.evaluate(lookup)
    return Verdict.SATISFIED if values_equal(lhs, rhs) else Verdict.VIOLATED
