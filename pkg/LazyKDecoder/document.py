"""
One document: tokens, the label vocabulary and the model's per-token label
probabilities, with optional gold labels and amount-parsing settings.
"""

import attr
import numpy as np
from attr import dataclass

from bio import Token
from errors import CorpusError
from params import SeparatorLocale
from prob_table import ProbTable, build_table


@dataclass(eq=True)
class DocRecord:
    """
    - tokens: Token objects, one per matrix row.
    - label_vocab: label names in matrix column order.
    - probs: n x l matrix, raw probabilities or log-probabilities.
    - gold_labels: reference labels, required for evaluation only.
    - locale: separator convention for amounts, None for the default.
    - context: field -> raw amount text printed outside the token window.
    """
    doc_id: str
    tokens: list[Token]
    label_vocab: list[str]
    probs: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    probs_are_log: bool = False
    gold_labels: list[str] | None = None
    locale: SeparatorLocale | None = None
    context: dict[str, str] | None = None

    @property
    def n(self) -> int:
        return len(self.tokens)

    def logp(self) -> np.ndarray:
        if self.probs_are_log:
            return np.asarray(self.probs, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.probs, dtype=np.float64))

    def table(self) -> ProbTable:
        return build_table(self.logp())

    def check(self):
        """
        Dimension and label checks
        :raises CorpusError: on the first problem found
        """
        if self.n == 0:
            raise CorpusError(f"Document {self.doc_id} has no tokens")
        probs = np.asarray(self.probs)
        if probs.ndim != 2 or probs.shape != (self.n, len(self.label_vocab)):
            raise CorpusError(
                f"Document {self.doc_id}: probs has shape {probs.shape}, "
                f"expected ({self.n}, {len(self.label_vocab)})"
            )
        if len(set(self.label_vocab)) != len(self.label_vocab):
            raise CorpusError(f"Document {self.doc_id}: label vocabulary has duplicates")
        if self.gold_labels is not None:
            if len(self.gold_labels) != self.n:
                raise CorpusError(
                    f"Document {self.doc_id}: {len(self.gold_labels)} gold labels for {self.n} tokens"
                )
            unknown = sorted(set(self.gold_labels) - set(self.label_vocab))
            if unknown:
                raise CorpusError(f"Document {self.doc_id}: gold labels {unknown} are not in the vocabulary")
