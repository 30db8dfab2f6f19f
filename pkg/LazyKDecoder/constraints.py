"""
Global constraints over (tokens, labels).

A Constraint is a pure predicate; calling it never raises. Verdicts are
three-valued (satisfied / violated / not-evaluated) and a conjunction passes
when none of its members is violated.

RuleSet is the invoice-semantics constraint: BIO validity, parseability of
every declared amount field, and a list of arithmetic rules. The three
dataset rule sets (CORD, WildReceipt, DocILE) are built by dataset_constraints.
"""

import logging
from typing import Callable, Mapping, Sequence

import attr
from attr import dataclass

from amounts import Amount, parse_amount
from bio import bio_valid, extract_spans
from errors import ConstraintError
from params import (
    DEFAULT_LOCALE,
    TAX_RATE_CORD,
    Aggregation,
    ConstraintSetName,
    FieldKind,
    SeparatorLocale,
    Verdict,
)
from rules import ArithmeticRule, FieldSpec, eval_rule, parse_rule

log = logging.getLogger(__name__)


class Constraint:
    name: str = "constraint"

    def verdict(self, tokens: Sequence, labels: Sequence[str]) -> Verdict:
        raise NotImplementedError

    def __call__(self, tokens: Sequence, labels: Sequence[str]) -> bool:
        try:
            return self.verdict(tokens, labels).passes()
        except ConstraintError as e:
            log.debug("%s: treating %s as not satisfied", self.name, e)
            return False

    def for_document(self, doc) -> "Constraint":
        """Bind document-level settings (locale, context amounts)."""
        return self


@dataclass(frozen=True)
class Predicate(Constraint):
    name: str
    predicate: Callable[[Sequence, Sequence[str]], bool]

    def verdict(self, tokens, labels) -> Verdict:
        return Verdict.SATISFIED if self.predicate(tokens, labels) else Verdict.VIOLATED


@dataclass(frozen=True)
class Conjunction(Constraint):
    name: str
    members: tuple[Constraint, ...]

    def verdict(self, tokens, labels) -> Verdict:
        result = Verdict.NOT_EVALUATED
        for member in self.members:
            v = member.verdict(tokens, labels)
            if v is Verdict.VIOLATED:
                return v
            if v is Verdict.SATISFIED:
                result = v
        return result

    def for_document(self, doc) -> Constraint:
        return attr.evolve(self, members=tuple(m.for_document(doc) for m in self.members))


ALWAYS_TRUE = Predicate("always-true", lambda tokens, labels: True)
ALWAYS_FALSE = Predicate("always-false", lambda tokens, labels: False)
BIO_VALID = Predicate("bio", lambda tokens, labels: bio_valid(labels))


def field_values(tokens: Sequence, labels: Sequence[str], specs: Mapping[str, FieldSpec],
                 locale: SeparatorLocale = DEFAULT_LOCALE,
                 context: Mapping[str, str] | None = None,
                 strict: bool = True) -> tuple[dict[str, list[Amount]], list[str]]:
    """
    Parse the declared fields out of a labelling
    :param context: field -> raw text known from outside the labelled tokens
    :param strict: require a BIO-valid labelling, see extract_spans
    :return: (field -> amounts in document order then context, unparseable texts)
    """
    spans = extract_spans(tokens, labels, strict)
    values: dict[str, list[Amount]] = {}
    bad: list[str] = []

    def add(name: str, text: str):
        amount = parse_amount(text, locale)
        if amount is None:
            bad.append(text)
        else:
            values.setdefault(name, []).append(amount)

    for name in specs:
        for span in spans.get(name, ()):
            add(name, span.text)
        if context and name in context:
            add(name, context[name])
    return values, bad


@dataclass(frozen=True)
class RuleSet(Constraint):
    """
    - bio: require a valid BIO labelling first. Without it, stray I- labels
      start a new span.
    - specs: declared amount fields, each must be parseable.
    - rules: arithmetic rules over those fields.
    """
    name: str
    specs: Mapping[str, FieldSpec]
    rules: tuple[ArithmeticRule, ...]
    bio: bool = True
    locale: SeparatorLocale = DEFAULT_LOCALE
    context: Mapping[str, str] = attr.Factory(dict)

    @property
    def member_names(self) -> list[str]:
        names = ["bio"] if self.bio else []
        return names + ["parseable"] + [rule.text for rule in self.rules]

    def rule_verdicts(self, tokens, labels) -> list[tuple[str, Verdict]]:
        """Per-member verdicts, in member order, without short-circuiting."""
        out: list[tuple[str, Verdict]] = []
        if self.bio:
            ok = bio_valid(labels)
            out.append(("bio", Verdict.SATISFIED if ok else Verdict.VIOLATED))
            if not ok:
                return out
        values, bad = field_values(tokens, labels, self.specs, self.locale, self.context, self.bio)
        out.append(("parseable", Verdict.VIOLATED if bad else Verdict.SATISFIED))
        for rule in self.rules:
            out.append((rule.text, eval_rule(rule, values)))
        return out

    def verdict(self, tokens, labels) -> Verdict:
        if self.bio and not bio_valid(labels):
            return Verdict.VIOLATED
        # BIO validity is settled above
        values, bad = field_values(tokens, labels, self.specs, self.locale, self.context, strict=False)
        if bad:
            return Verdict.VIOLATED
        for rule in self.rules:
            if eval_rule(rule, values) is Verdict.VIOLATED:
                return Verdict.VIOLATED
        return Verdict.SATISFIED

    def describe(self, tokens, labels) -> dict:
        """Member verdicts and parsed field values of one labelling, for reports."""
        if self.bio and not bio_valid(labels):
            return {"verdicts": {"bio": Verdict.VIOLATED.value}}
        values, bad = field_values(tokens, labels, self.specs, self.locale, self.context, self.bio)
        return {
            "verdicts": {name: v.value for name, v in self.rule_verdicts(tokens, labels)},
            "fields": {name: [str(a.decimal) for a in amounts] for name, amounts in values.items()},
            "unparseable": bad,
        }

    def for_document(self, doc) -> Constraint:
        locale = doc.locale or self.locale
        context = {**self.context, **(doc.context or {})}
        return attr.evolve(self, locale=SeparatorLocale(locale), context=context)


def make_rule_set(name: str, specs: Sequence[FieldSpec], rules: Sequence[str], bio: bool = True) -> RuleSet:
    by_name = {spec.name: spec for spec in specs}
    if len(by_name) != len(specs):
        raise ConstraintError(f"Rule set {name!r} declares a field twice")
    return RuleSet(
        name=name,
        specs=by_name,
        rules=tuple(parse_rule(text, by_name) for text in rules),
        bio=bio,
    )


def _cord() -> RuleSet:
    specs = [
        FieldSpec("menu.sub.price", aggregation=Aggregation.SUM),
        FieldSpec("sub_total.subtotal_price"),
        FieldSpec("sub_total.tax_price"),
        FieldSpec("sub_total.service_price", FieldKind.OPTIONAL),
        FieldSpec("sub_total.discount_price", FieldKind.OPTIONAL),
        FieldSpec("total.total_price"),
        FieldSpec("total.cashprice"),
        FieldSpec("total.changeprice"),
    ]
    rules = [
        "sum(menu.sub.price) = sub_total.subtotal_price",
        f"sub_total.tax_price = {TAX_RATE_CORD} * (sub_total.subtotal_price + sub_total.service_price)",
        "total.cashprice = total.total_price + total.changeprice",
        "total.total_price = sub_total.subtotal_price + sub_total.tax_price"
        " + sub_total.service_price - sub_total.discount_price",
    ]
    return make_rule_set(ConstraintSetName.CORD.value, specs, rules)


def _wildreceipt() -> RuleSet:
    specs = [
        FieldSpec("total_value"),
        FieldSpec("subtotal_value"),
        FieldSpec("tax_value"),
        FieldSpec("prod_price_value", aggregation=Aggregation.SUM),
    ]
    rules = [
        "total_value = subtotal_value + tax_value",
        "subtotal_value = sum(prod_price_value)",
    ]
    return make_rule_set(ConstraintSetName.WILDRECEIPT.value, specs, rules)


def _docile() -> RuleSet:
    specs = [
        FieldSpec("amount_total_gross"),
        FieldSpec("amount_total_net"),
        FieldSpec("amount_total_tax"),
        FieldSpec("amount_due"),
        FieldSpec("amount_paid"),
    ]
    rules = [
        "amount_total_gross = amount_total_net + amount_total_tax",
        "amount_due = amount_paid + amount_total_gross",
    ]
    return make_rule_set(ConstraintSetName.DOCILE.value, specs, rules)


_DATASETS = {
    ConstraintSetName.CORD: _cord,
    ConstraintSetName.WILDRECEIPT: _wildreceipt,
    ConstraintSetName.DOCILE: _docile,
}


def dataset_constraints(name: ConstraintSetName | str) -> RuleSet:
    """
    Constraint set of one of the receipt/invoice datasets
    :param name: cord, wildreceipt or docile
    """
    try:
        key = ConstraintSetName(name)
        return _DATASETS[key]()
    except (ValueError, KeyError):
        raise ConstraintError(f"Unknown dataset constraint set {name!r}") from None


def resolve_constraint(spec: str) -> Constraint:
    """
    Constraint from a CLI name: a dataset name, "none", or "custom:PATH"
    """
    if spec == ConstraintSetName.NONE.value:
        return ALWAYS_TRUE
    if spec.startswith("custom:"):
        from rule_config import load_rule_file
        return load_rule_file(spec[len("custom:"):])
    return dataset_constraints(spec)


def bind(constraint, doc):
    """constraint.for_document(doc) for Constraint objects, plain callables unchanged."""
    return constraint.for_document(doc) if isinstance(constraint, Constraint) else constraint
