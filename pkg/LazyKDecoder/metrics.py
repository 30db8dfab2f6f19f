"""
Scores and timings.

- micro_f1: token level; a token is a true positive when the predicted
  non-O label equals the gold label. O is the negative class.
- satisfaction_ratio (CSR): share of documents whose predicted labels
  satisfy the constraint.
- f1s: micro_f1 * CSR.
- bench: per-page decode time over repeated passes, with and without the
  time spent inside the constraint.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from attr import dataclass

from bio import OUTSIDE
from constraints import bind
from decoders import DocResult, decode_corpus, get_decoder
from document import DocRecord
from errors import CorpusError, DecodeError
from outcome import DecodeOutcome
from params import DEFAULT_JOBS, DEFAULT_REPEATS, DecoderName

log = logging.getLogger(__name__)


def confusion(preds: Sequence[Sequence[str]], golds: Sequence[Sequence[str]]) -> tuple[int, int, int]:
    """
    Token-level counts over all documents
    :return: (true positives, false positives, false negatives)
    """
    if len(preds) != len(golds):
        raise ValueError(f"Got {len(preds)} predictions for {len(golds)} gold documents")
    tp = fp = fn = 0
    for d, (pred, gold) in enumerate(zip(preds, golds)):
        if len(pred) != len(gold):
            raise ValueError(f"Document {d}: {len(pred)} predicted labels for {len(gold)} gold labels")
        for p, g in zip(pred, gold):
            if p == g:
                tp += p != OUTSIDE
                continue
            fp += p != OUTSIDE
            fn += g != OUTSIDE
    return tp, fp, fn


def precision_recall_f1(preds, golds) -> tuple[float, float, float]:
    """Micro precision, recall and F1; each is 1.0 when its denominator is empty."""
    tp, fp, fn = confusion(preds, golds)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 1.0
    return precision, recall, f1


def micro_f1(preds, golds) -> float:
    return precision_recall_f1(preds, golds)[2]


def satisfaction_ratio(docs: Sequence[DocRecord], preds: Sequence[Sequence[str]], constraint) -> float:
    """Share of documents whose predicted labels satisfy the constraint, 1.0 for no documents."""
    if len(docs) != len(preds):
        raise ValueError(f"Got {len(preds)} predictions for {len(docs)} documents")
    if not docs:
        return 1.0
    ok = sum(bool(bind(constraint, doc)(doc.tokens, pred)) for doc, pred in zip(docs, preds))
    return ok / len(docs)


@dataclass(frozen=True)
class EvalReport:
    """
    One decoder x budget cell.
    - satisfied: documents on which the decoder itself reported a satisfying sequence.
    - time_mean / time_std: seconds per page over the documents.
    """
    decoder: str
    max_k: int
    docs: int
    micro_f1: float
    precision: float
    recall: float
    csr: float
    satisfied: int
    examined_mean: float
    examined_max: int
    time_mean: float = 0.0
    time_std: float = 0.0

    @property
    def f1s(self) -> float:
        return self.micro_f1 * self.csr

    def as_record(self, timing: bool = False) -> dict:
        record = {
            "decoder": self.decoder,
            "max_k": self.max_k,
            "docs": self.docs,
            "f1s": round(self.f1s, 6),
            "micro_f1": round(self.micro_f1, 6),
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "csr": round(self.csr, 6),
            "satisfied": self.satisfied,
            "examined_mean": round(self.examined_mean, 3),
            "examined_max": self.examined_max,
        }
        if timing:
            record["time_mean"] = self.time_mean
            record["time_std"] = self.time_std
        return record


def f1s(report: EvalReport) -> float:
    return report.f1s


def evaluate(docs: Sequence[DocRecord], decoder: DecoderName | str, constraint, max_k: int,
             mass_threshold: float | None = None, jobs: int = DEFAULT_JOBS) -> tuple[EvalReport, list[DocResult]]:
    """
    Decode and score a corpus
    :raises CorpusError: when a document has no gold labels
    """
    for doc in docs:
        if doc.gold_labels is None:
            raise CorpusError(f"Document {doc.doc_id} has no gold labels to evaluate against")
    results = decode_corpus(docs, decoder, constraint, max_k, mass_threshold, jobs)
    preds = [r.labels for r in results]
    precision, recall, f1 = precision_recall_f1(preds, [doc.gold_labels for doc in docs])
    examined = np.array([r.outcome.sequences_examined for r in results], dtype=np.float64)
    elapsed = np.array([r.outcome.elapsed for r in results], dtype=np.float64)

    report = EvalReport(
        decoder=DecoderName(decoder).value,
        max_k=max_k,
        docs=len(docs),
        micro_f1=f1,
        precision=precision,
        recall=recall,
        csr=satisfaction_ratio(docs, preds, constraint),
        satisfied=sum(r.outcome.satisfied for r in results),
        examined_mean=float(examined.mean()) if len(docs) else 0.0,
        examined_max=int(examined.max()) if len(docs) else 0,
        time_mean=float(elapsed.mean()) if len(docs) else 0.0,
        time_std=float(elapsed.std()) if len(docs) else 0.0,
    )
    log.info("%s k=%d: f1s=%.4f micro_f1=%.4f csr=%.4f", report.decoder, max_k, report.f1s, f1, report.csr)
    return report, results


@dataclass(frozen=True)
class BenchStats:
    """
    Per-page decode seconds, mean and standard deviation over repeated passes.
    The exclusive figures leave out time spent inside the constraint.
    """
    decoder: str
    max_k: int
    repeats: int
    docs: int
    mean: float
    std: float
    exclusive_mean: float
    exclusive_std: float

    def as_record(self) -> dict:
        return {
            "decoder": self.decoder,
            "max_k": self.max_k,
            "repeats": self.repeats,
            "docs": self.docs,
            "time_mean": self.mean,
            "time_std": self.std,
            "exclusive_mean": self.exclusive_mean,
            "exclusive_std": self.exclusive_std,
        }


def bench(docs: Sequence[DocRecord], decoder: DecoderName | str, constraint, max_k: int,
          repeats: int = DEFAULT_REPEATS, mass_threshold: float | None = None,
          jobs: int = DEFAULT_JOBS) -> BenchStats:
    """
    Time repeated passes over a corpus. Tables are built once, outside the timing.
    :param jobs: threads decoding the documents of one pass
    """
    if repeats < 1:
        raise DecodeError(f"repeats must be at least 1, got {repeats}")
    if jobs < 1:
        raise DecodeError(f"jobs must be at least 1, got {jobs}")
    decode = get_decoder(decoder)
    prepared = [(doc, doc.table(), bind(constraint, doc)) for doc in docs]
    pages = max(len(docs), 1)

    inclusive = np.zeros(repeats)
    exclusive = np.zeros(repeats)

    def one(item) -> DecodeOutcome:
        doc, table, bound = item
        return decode(table, doc.label_vocab, doc.tokens, bound, max_k, mass_threshold)

    with ThreadPoolExecutor(max_workers=jobs) as ex:
        for r in range(repeats):
            outcomes = [one(item) for item in prepared] if jobs == 1 else list(ex.map(one, prepared))
            for outcome in outcomes:
                inclusive[r] += outcome.elapsed
                exclusive[r] += outcome.elapsed - outcome.constraint_seconds
    inclusive /= pages
    exclusive /= pages

    stats = BenchStats(
        decoder=DecoderName(decoder).value,
        max_k=max_k,
        repeats=repeats,
        docs=len(docs),
        mean=float(inclusive.mean()),
        std=float(inclusive.std()),
        exclusive_mean=float(exclusive.mean()),
        exclusive_std=float(exclusive.std()),
    )
    log.info("%s k=%d: %.6f +- %.6f s/page over %d passes", stats.decoder, max_k, stats.mean, stats.std, repeats)
    return stats
