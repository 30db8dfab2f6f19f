"""
Amount parsing for receipt and invoice fields.

Text such as "Rp 56.000", "1,234.50" or "12,50 EUR" is turned into an exact
count of hundredths. Separator handling:
- both "." and "," present: the last one is the decimal mark;
- one kind repeated ("1.234.567"): thousands groups;
- one kind once, followed by exactly three digits: ambiguous, the document
  locale decides (the default reads it as a thousands group, so "56.000" is
  fifty-six thousand);
- one kind once, followed by any other digit count: decimal mark.
Anything that is not a number once currency markers are stripped is
unparseable and parse_amount returns None.
"""

import re
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from fractions import Fraction

from attr import dataclass

from params import DEFAULT_LOCALE, MINOR_DIGITS, SeparatorLocale

_AMOUNT_RE = re.compile(
    r"""^\s*
    (?P<lead>[-+])?\s*
    (?P<cur1>[^\d\s.,+\-()]{1,4}\.?)?\s*
    (?P<sign>[-+])?\s*
    (?P<num>\d[\d.,\s]*\d|\d|[.,]\d+)
    \s*(?P<cur2>[^\d\s.,+\-()]{1,4})?
    \s*(?P<trail>-)?\s*$""",
    re.VERBOSE,
)
_PARENS_RE = re.compile(r"^\s*\((?P<inner>.*)\)\s*$")
# Currency markers may be symbols or short alphabetic codes, never digits
_CURRENCY_RE = re.compile(r"^(?:[^\W\d_]{1,3}\.?|[^\w\s])$")


@dataclass(frozen=True)
class Amount:
    """
    An exact amount.
    - minor: integer count of minor units (hundredths).
    - raw: the text it was parsed from.
    """
    minor: int
    raw: str

    @property
    def major(self) -> Fraction:
        return Fraction(self.minor, 10 ** MINOR_DIGITS)

    @property
    def decimal(self) -> Decimal:
        return Decimal(self.minor).scaleb(-MINOR_DIGITS)


def _normalize_digits(num: str, locale: SeparatorLocale) -> str | None:
    """Rewrite a digit string with separators into plain Decimal syntax."""
    num = re.sub(r"\s+", "", num)
    has_dot, has_comma = "." in num, "," in num

    if has_dot and has_comma:
        decimal_mark = "." if num.rfind(".") > num.rfind(",") else ","
        thousands = "," if decimal_mark == "." else "."
        if num.count(decimal_mark) > 1:
            return None
        return num.replace(thousands, "").replace(decimal_mark, ".")

    if not (has_dot or has_comma):
        return num

    sep = "." if has_dot else ","
    if num.count(sep) > 1:
        groups = num.split(sep)
        if any(len(g) != 3 for g in groups[1:]):
            return None
        return num.replace(sep, "")

    head, tail = num.split(sep)
    if len(tail) == 3 and head:
        if locale is SeparatorLocale.AMBIGUOUS_THOUSANDS:
            is_thousands = True
        elif locale is SeparatorLocale.DECIMAL_POINT:
            is_thousands = sep == ","
        else:
            is_thousands = sep == "."
        if is_thousands:
            return head + tail
    return (head or "0") + "." + tail


def parse_amount(text: str, locale: SeparatorLocale | str = DEFAULT_LOCALE) -> Amount | None:
    """
    Parse amount text
    :param text: Raw span text
    :param locale: Separator convention for ambiguous three-digit tails
    :return: Amount, or None when the text is not a number
    """
    if text is None:
        return None
    locale = SeparatorLocale(locale)
    body = text
    negative = False
    parens = _PARENS_RE.match(body)
    if parens:
        body = parens.group("inner")
        negative = True

    m = _AMOUNT_RE.match(body)
    if m is None:
        return None
    for marker in (m.group("cur1"), m.group("cur2")):
        if marker is not None and not _CURRENCY_RE.match(marker):
            return None
    signs = [s for s in (m.group("lead"), m.group("sign"), m.group("trail")) if s]
    if len(signs) > 1:
        return None
    if signs and signs[0] == "-":
        negative = not negative

    digits = _normalize_digits(m.group("num"), locale)
    if digits is None:
        return None
    try:
        value = Decimal(digits)
    except InvalidOperation:
        return None
    minor = int((value * (10 ** MINOR_DIGITS)).to_integral_value(rounding=ROUND_HALF_UP))
    if negative:
        minor = -minor
    return Amount(minor=minor, raw=text)
