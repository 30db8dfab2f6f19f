"""
Decoder registry: every decoder behind one signature so the CLI, the
evaluation harness and the HTTP endpoint drive them the same way.

One-shot decoders (argmax, viterbi-bio) examine a single sequence: they
report satisfied when the constraint holds on it and exhausted-budget
otherwise. viterbi-bio reports search-exhausted, with the argmax as
fallback, when no BIO-valid sequence has non-zero probability.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from attr import dataclass

from baselines import argmax_decode, beam_filter_decode, best_first_decode, viterbi_bio
from constraints import bind
from document import DocRecord
from errors import DecodeError
from lazy_k import ConstraintProbe, check_decode_args, fast_cost, lazy_k_decode
from outcome import DecodeOutcome
from params import DEFAULT_JOBS, DecodeStatus, DecoderName
from prob_table import LabelSeq, ProbTable, labels_of, ranks_of

log = logging.getLogger(__name__)

# (table, vocab, tokens, constraint, max_k, mass_threshold) -> outcome
DecodeFn = Callable[[ProbTable, Sequence[str], Sequence, Callable, int, float | None], DecodeOutcome]


def _one_shot(table: ProbTable, vocab, tokens, constraint, labels: list[str] | None,
              start: float) -> DecodeOutcome:
    probe = ConstraintProbe(constraint, table, vocab, tokens)
    y1 = (0,) * table.n
    best = LabelSeq(y1, fast_cost(table, y1))
    if labels is None:
        return DecodeOutcome(
            status=DecodeStatus.SEARCH_EXHAUSTED,
            sequence=None,
            best=best,
            sequences_examined=0,
            elapsed=time.perf_counter() - start,
        )
    index = {label: j for j, label in enumerate(vocab)}
    ranks = ranks_of(table, [index[label] for label in labels])
    seq = LabelSeq(ranks, fast_cost(table, ranks))
    ok = probe(ranks)
    return DecodeOutcome(
        status=DecodeStatus.SATISFIED if ok else DecodeStatus.EXHAUSTED_BUDGET,
        sequence=seq if ok else None,
        best=seq,
        sequences_examined=1,
        elapsed=time.perf_counter() - start,
        constraint_seconds=probe.seconds,
    )


def decode_argmax(table, vocab, tokens, constraint, max_k, mass_threshold=None) -> DecodeOutcome:
    check_decode_args(table, vocab, tokens, max_k)
    start = time.perf_counter()
    return _one_shot(table, vocab, tokens, constraint, argmax_decode(table, vocab), start)


def decode_viterbi(table, vocab, tokens, constraint, max_k, mass_threshold=None) -> DecodeOutcome:
    check_decode_args(table, vocab, tokens, max_k)
    start = time.perf_counter()
    try:
        labels = viterbi_bio(table, vocab)
    except DecodeError as e:
        log.debug("viterbi-bio: %s", e)
        labels = None
    return _one_shot(table, vocab, tokens, constraint, labels, start)


def decode_beam(table, vocab, tokens, constraint, max_k, mass_threshold=None) -> DecodeOutcome:
    return beam_filter_decode(table, vocab, tokens, constraint, max_k)


DECODERS: dict[DecoderName, DecodeFn] = {
    DecoderName.ARGMAX: decode_argmax,
    DecoderName.LAZYK: lazy_k_decode,
    DecoderName.BESTFIRST: best_first_decode,
    DecoderName.BEAM: decode_beam,
    DecoderName.VITERBI_BIO: decode_viterbi,
}


def get_decoder(name: DecoderName | str) -> DecodeFn:
    try:
        return DECODERS[DecoderName(name)]
    except ValueError:
        raise DecodeError(f"Unknown decoder {name!r}") from None


@dataclass(frozen=True)
class DocResult:
    """Outcome of one document plus the predicted labels (fallback included)."""
    doc: DocRecord
    outcome: DecodeOutcome
    labels: list[str]

    def as_record(self, decoder: DecoderName | str) -> dict:
        return {
            "doc_id": self.doc.doc_id,
            "decoder": DecoderName(decoder).value,
            "status": self.outcome.status.value,
            "sequences_examined": self.outcome.sequences_examined,
            "probability": self.outcome.prediction.probability,
            "labels": list(self.labels),
        }


def decode_doc(doc: DocRecord, decoder: DecoderName | str, constraint, max_k: int,
               mass_threshold: float | None = None, table: ProbTable | None = None) -> DocResult:
    """
    Decode one document with the constraint bound to it
    :param table: prebuilt table of doc, built here when None
    """
    decode = get_decoder(decoder)
    table = table if table is not None else doc.table()
    bound = bind(constraint, doc)
    outcome = decode(table, doc.label_vocab, doc.tokens, bound, max_k, mass_threshold)
    return DocResult(doc, outcome, labels_of(table, outcome.prediction, doc.label_vocab))


def decode_corpus(docs: Sequence[DocRecord], decoder: DecoderName | str, constraint, max_k: int,
                  mass_threshold: float | None = None, jobs: int = DEFAULT_JOBS) -> list[DocResult]:
    """Decode every document; results are in input order whatever the job count."""
    if jobs < 1:
        raise DecodeError(f"jobs must be at least 1, got {jobs}")
    get_decoder(decoder)

    def one(doc: DocRecord) -> DocResult:
        return decode_doc(doc, decoder, constraint, max_k, mass_threshold)

    if jobs == 1:
        results = [one(doc) for doc in docs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one, docs))
    if results:
        log.info(
            "%s: %d/%d documents satisfied, %d sequences examined in total",
            DecoderName(decoder).value,
            sum(r.outcome.satisfied for r in results),
            len(results),
            sum(r.outcome.sequences_examined for r in results),
        )
    return results
