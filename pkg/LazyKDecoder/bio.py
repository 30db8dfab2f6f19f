"""
BIO labelling scheme helpers.

Labels are "O" or a B/I prefix, a "-" or "_" separator and a class name
("B-total", "I_cash", "B-total.total_price"). An I-X label is only valid
right after B-X or I-X; sequences never start with I-X.
"""

from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from attr import dataclass

from errors import ConstraintError

OUTSIDE = "O"


@dataclass(frozen=True)
class Token:
    text: str
    # True when the tokenizer split this token off the previous one ("56" "." "000")
    joins_previous: bool = False


class Span(NamedTuple):
    text: str
    start: int
    end: int


@lru_cache(maxsize=None)
def parse_label(label: str) -> tuple[str, str | None]:
    """
    Split a label into prefix and class
    :return: ("O", None) or ("B"|"I", class name)
    """
    if label == OUTSIDE:
        return OUTSIDE, None
    if len(label) > 2 and label[0] in "BI" and label[1] in "-_":
        return label[0], label[2:]
    raise ConstraintError(f"Unknown label prefix in {label!r}")


def bio_valid(labels: Sequence[str]) -> bool:
    prev_cls = None
    for label in labels:
        prefix, cls = parse_label(label)
        if prefix == "I" and cls != prev_cls:
            return False
        prev_cls = cls
    return True


def _text_of(token) -> tuple[str, bool]:
    if isinstance(token, Token):
        return token.text, token.joins_previous
    return str(token), False


def extract_spans(tokens: Sequence, labels: Sequence[str], strict: bool = True) -> dict[str, list[Span]]:
    """
    Collect the maximal B..I runs of every class
    :param tokens: Token objects (plain strings are treated as space separated)
    :param labels: BIO labels, one per token
    :param strict: refuse BIO-invalid labellings; otherwise a stray I-X opens a new span
    :return: class name -> spans in document order, classes without spans left out
    """
    if len(tokens) != len(labels):
        raise ConstraintError(f"Got {len(tokens)} tokens for {len(labels)} labels")
    if strict and not bio_valid(labels):
        raise ConstraintError("Cannot extract spans from a BIO-invalid labelling")

    spans: dict[str, list[Span]] = {}
    cls = None
    start = 0
    parts: list[str] = []

    def close(end: int):
        if cls is not None:
            spans.setdefault(cls, []).append(Span("".join(parts), start, end))

    for i, (token, label) in enumerate(zip(tokens, labels)):
        prefix, label_cls = parse_label(label)
        text, joins = _text_of(token)
        if prefix == "I" and label_cls == cls:
            parts.append(text if joins else " " + text)
            continue
        close(i)
        cls, start, parts = label_cls, i, [text]
    close(len(labels))
    return spans


def transition_mask(vocab: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """
    Allowed label transitions
    :return: (allowed[prev, cur] l x l bool matrix, allowed_start length-l bool vector)
    """
    parsed = [parse_label(label) for label in vocab]
    l = len(vocab)
    allowed = np.ones((l, l), dtype=bool)
    start = np.ones(l, dtype=bool)
    for j, (prefix, cls) in enumerate(parsed):
        if prefix != "I":
            continue
        start[j] = False
        for i, (_, prev_cls) in enumerate(parsed):
            allowed[i, j] = prev_cls == cls
    return allowed, start
