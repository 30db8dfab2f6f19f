"""
Synthetic receipt corpora.

Each document is a small receipt for one dataset constraint set: amounts are
drawn so the gold labelling satisfies every rule of the set, written in
IDR style ("56.000") and split into sub-tokens ("56" "." "000"). Keyword and
filler tokens are labelled O.

The probability matrix is one-hot-like on the gold labels. With probability
`noise` an entity token's argmax is flipped to a confusable label (same B/I
prefix, another amount class) and the gold label keeps the second highest
probability. O tokens are never flipped.
"""

import logging

import attr
import numpy as np
from attr import dataclass

from bio import OUTSIDE, Token, parse_label
from constraints import dataset_constraints
from document import DocRecord
from errors import SynthError
from params import ConstraintSetName

log = logging.getLogger(__name__)

_SHOPS = ["TOKO", "WARUNG", "KEDAI", "RESTO", "KAFE"]
_ITEMS = ["NASI", "MIE", "AYAM", "TEH", "KOPI", "ES", "SOTO", "ROTI", "BAKSO", "JUS"]
_FILLER = ["THANK", "YOU", "PLEASE", "COME", "AGAIN", "*", "-", "#", "NO", "TABLE"]

# (keyword tokens, field, amount in whole currency units)
Line = tuple[list[str], str, int]


@dataclass(frozen=True)
class SynthSpec:
    """
    - docs: number of documents.
    - tokens_per_doc: target length, padded with filler; receipts longer than
      this keep their full length.
    - noise: per entity token probability of a flipped argmax, in [0, 1].
    """
    docs: int = 100
    tokens_per_doc: int = 40
    noise: float = 0.05
    constraints: ConstraintSetName = ConstraintSetName.CORD
    seed: int = 0

    def check(self):
        if self.docs < 0:
            raise SynthError(f"Number of documents must not be negative, got {self.docs}")
        if self.tokens_per_doc < 1:
            raise SynthError(f"tokens_per_doc must be at least 1, got {self.tokens_per_doc}")
        if not 0.0 <= self.noise <= 1.0:
            raise SynthError(f"Noise must be in [0, 1], got {self.noise}")
        if self.constraints not in _TEMPLATES:
            raise SynthError(f"No receipt template for constraint set {self.constraints!r}")


def _thousands(rng: np.random.Generator, low: int, high: int) -> int:
    return 1000 * int(rng.integers(low, high))


def _cord_lines(rng: np.random.Generator) -> list[Line]:
    prices = [_thousands(rng, 5, 60) for _ in range(int(rng.integers(1, 4)))]
    subtotal = sum(prices)
    service = _thousands(rng, 1, 10) if rng.random() < 0.5 else None
    discount = _thousands(rng, 1, 5) if rng.random() < 0.3 else None
    # Multiples of 1000, so 10% stays whole
    tax = (subtotal + (service or 0)) // 10
    total = subtotal + tax + (service or 0) - (discount or 0)
    cash = -(-total // 50000) * 50000

    lines: list[Line] = [([_ITEMS[int(rng.integers(len(_ITEMS)))]], "menu.sub.price", p) for p in prices]
    lines.append((["SUBTOTAL"], "sub_total.subtotal_price", subtotal))
    if service is not None:
        lines.append((["SERVICE"], "sub_total.service_price", service))
    if discount is not None:
        lines.append((["DISC"], "sub_total.discount_price", discount))
    lines += [
        (["TAX"], "sub_total.tax_price", tax),
        (["TOTAL"], "total.total_price", total),
        (["CASH"], "total.cashprice", cash),
        (["CHANGE"], "total.changeprice", cash - total),
    ]
    return lines


def _wildreceipt_lines(rng: np.random.Generator) -> list[Line]:
    prices = [_thousands(rng, 5, 60) for _ in range(int(rng.integers(1, 4)))]
    subtotal = sum(prices)
    tax = _thousands(rng, 1, 10)
    lines: list[Line] = [([_ITEMS[int(rng.integers(len(_ITEMS)))]], "prod_price_value", p) for p in prices]
    lines += [
        (["SUBTOTAL"], "subtotal_value", subtotal),
        (["TAX"], "tax_value", tax),
        (["TOTAL"], "total_value", subtotal + tax),
    ]
    return lines


def _docile_lines(rng: np.random.Generator) -> list[Line]:
    net = _thousands(rng, 10, 500)
    tax = net // 10
    gross = net + tax
    paid = _thousands(rng, 0, 50)
    return [
        (["NET"], "amount_total_net", net),
        (["VAT"], "amount_total_tax", tax),
        (["GROSS"], "amount_total_gross", gross),
        (["PAID"], "amount_paid", paid),
        (["DUE"], "amount_due", paid + gross),
    ]


_TEMPLATES = {
    ConstraintSetName.CORD: _cord_lines,
    ConstraintSetName.WILDRECEIPT: _wildreceipt_lines,
    ConstraintSetName.DOCILE: _docile_lines,
}


def amount_tokens(value: int) -> list[Token]:
    """56000 -> "56" "." "000", the way a sub-word tokenizer splits "56.000"."""
    parts = f"{value:,}".replace(",", ".").split(".")
    tokens = [Token(parts[0])]
    for part in parts[1:]:
        tokens += [Token(".", joins_previous=True), Token(part, joins_previous=True)]
    return tokens


def label_vocab(name: ConstraintSetName) -> list[str]:
    """O followed by B-/I- labels of every declared field of the set."""
    vocab = [OUTSIDE]
    for field in dataset_constraints(name).specs:
        vocab += [f"B-{field}", f"I-{field}"]
    return vocab


def _receipt(rng: np.random.Generator, spec: SynthSpec) -> tuple[list[Token], list[str]]:
    tokens = [Token(_SHOPS[int(rng.integers(len(_SHOPS)))])]
    labels = [OUTSIDE]
    for keywords, field, value in _TEMPLATES[spec.constraints](rng):
        tokens += [Token(k) for k in keywords]
        labels += [OUTSIDE] * len(keywords)
        pieces = amount_tokens(value)
        tokens += pieces
        labels += [f"B-{field}"] + [f"I-{field}"] * (len(pieces) - 1)
    while len(tokens) < spec.tokens_per_doc:
        tokens.append(Token(_FILLER[int(rng.integers(len(_FILLER)))]))
        labels.append(OUTSIDE)
    return tokens, labels


def _confusables(vocab: list[str]) -> dict[int, list[int]]:
    """Label index -> indices of labels with the same prefix and another class."""
    parsed = [parse_label(label) for label in vocab]
    out: dict[int, list[int]] = {}
    for j, (prefix, cls) in enumerate(parsed):
        if prefix == OUTSIDE:
            out[j] = [i for i in range(len(vocab)) if i != j]
        else:
            out[j] = [i for i, (p, c) in enumerate(parsed) if p == prefix and c != cls]
    return out


def _prob_row(rng: np.random.Generator, gold: int, confusable: list[int], flip: bool, l: int) -> np.ndarray:
    hi = rng.uniform(0.55, 0.85)
    # Keeps the runner-up above every remaining label
    second = rng.uniform(0.6, 0.9) * (1 - hi)
    other = confusable[int(rng.integers(len(confusable)))]
    top, runner = (other, gold) if flip else (gold, other)

    row = np.empty(l)
    rest = [j for j in range(l) if j not in (top, runner)]
    row[rest] = (1 - hi - second) * rng.dirichlet(np.ones(len(rest)))
    row[top] = hi
    row[runner] = second
    return row


def gen_synthetic(spec: SynthSpec) -> list[DocRecord]:
    """
    Generate a corpus; the same spec always gives the same documents
    :raises SynthError: invalid parameters
    """
    try:
        spec = attr.evolve(spec, constraints=ConstraintSetName(spec.constraints))
    except ValueError:
        raise SynthError(f"Unknown constraint set {spec.constraints!r}") from None
    spec.check()

    rng = np.random.default_rng(spec.seed)
    vocab = label_vocab(spec.constraints)
    index = {label: j for j, label in enumerate(vocab)}
    confusables = _confusables(vocab)

    docs: list[DocRecord] = []
    flips = 0
    for d in range(spec.docs):
        tokens, labels = _receipt(rng, spec)
        rows = []
        for label in labels:
            gold = index[label]
            flip = label != OUTSIDE and rng.random() < spec.noise
            flips += flip
            rows.append(_prob_row(rng, gold, confusables[gold], flip, len(vocab)))
        docs.append(DocRecord(
            doc_id=f"synth-{spec.constraints.value}-{d:05d}",
            tokens=tokens,
            label_vocab=list(vocab),
            probs=np.vstack(rows),
            gold_labels=labels,
        ))
    log.info("Generated %d %s documents, %d flipped tokens", len(docs), spec.constraints.value, flips)
    return docs
