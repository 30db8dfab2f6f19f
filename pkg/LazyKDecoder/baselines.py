"""
Reference decoders used for comparison and cross-checking:
- argmax_decode: per-position most probable label.
- beam_topk / beam_filter_decode: width-k beam search, then the first beam
  the constraint accepts.
- best_first_decode: plain best-first search pushing every child.
- viterbi_bio: best BIO-valid labelling by dynamic programming.
- brute_force_topk: full enumeration, the test oracle.

All orderings follow the canonical (cost, rank vector) order.
"""

import heapq
import itertools
import logging
import math
import time
from typing import Sequence

import numpy as np

from bio import transition_mask
from errors import DecodeError
from lazy_k import ConstraintProbe, check_decode_args, fast_cost
from outcome import DecodeOutcome
from params import BRUTE_FORCE_LIMIT, DecodeStatus
from prob_table import LabelSeq, ProbTable, labels_of

log = logging.getLogger(__name__)

# Relative cost difference below which two Viterbi paths count as tied
_TIE_RTOL = 1e-12


def argmax_decode(table: ProbTable, vocab: Sequence[str]) -> list[str]:
    return labels_of(table, (0,) * table.n, vocab)


class Beam:
    """
    The k cheapest prefixes of the current length, kept sorted by
    (cost, prefix ranks).
    """

    def __init__(self, table: ProbTable, k: int):
        if k < 1:
            raise DecodeError(f"Beam width must be at least 1, got {k}")
        self.table = table
        self.k = k
        self.entries: list[tuple[tuple[int, ...], float]] = [((), 0.0)]

    def advance(self, position: int):
        """Extend every prefix by every rank at position and keep the best k."""
        neg = -self.table.sorted_logp[position]
        candidates = [
            (prefix + (r,), cost + float(neg[r]))
            for prefix, cost in self.entries
            for r in range(self.table.l)
        ]
        candidates.sort(key=lambda c: (c[1], c[0]))
        self.entries = candidates[:self.k]

    def run(self) -> list[LabelSeq]:
        for position in range(self.table.n):
            self.advance(position)
        # Re-score exactly so results compare equal to the other decoders
        seqs = [LabelSeq(prefix, fast_cost(self.table, prefix)) for prefix, _ in self.entries]
        seqs.sort(key=lambda s: (s.cost, s.ranks))
        return seqs


def beam_topk(table: ProbTable, k: int) -> list[LabelSeq]:
    """The min(k, l^n) cheapest sequences, cheapest first."""
    return Beam(table, k).run()


def brute_force_topk(table: ProbTable, k: int) -> list[LabelSeq]:
    """
    Enumerate every sequence and keep the k cheapest
    :raises DecodeError: when l^n exceeds BRUTE_FORCE_LIMIT
    """
    if k < 1:
        raise DecodeError(f"k must be at least 1, got {k}")
    size = table.l ** table.n
    if size > BRUTE_FORCE_LIMIT:
        raise DecodeError(f"State space {table.l}^{table.n} is too large to enumerate")
    neg = (-table.sorted_logp).tolist()
    scored = (
        (math.fsum(row[r] for row, r in zip(neg, ranks)), ranks)
        for ranks in itertools.product(range(table.l), repeat=table.n)
    )
    return [LabelSeq(ranks, cost) for cost, ranks in heapq.nsmallest(k, scored)]


def _final_status(found: LabelSeq | None, examined: int, table: ProbTable) -> DecodeStatus:
    if found is not None:
        return DecodeStatus.SATISFIED
    if examined >= table.l ** table.n:
        return DecodeStatus.SEARCH_EXHAUSTED
    return DecodeStatus.EXHAUSTED_BUDGET


def best_first_decode(table: ProbTable, vocab: Sequence[str], tokens: Sequence, constraint, max_k: int,
                      mass_threshold: float | None = None) -> DecodeOutcome:
    """Same contract as lazy_k_decode, but every popped state pushes all of its children."""
    check_decode_args(table, vocab, tokens, max_k)
    start = time.perf_counter()
    probe = ConstraintProbe(constraint, table, vocab, tokens)

    y1 = (0,) * table.n
    heap = [(fast_cost(table, y1), y1)]
    visited = {y1}
    best = None
    found = None
    examined = 0
    peak = 1
    mass = 0.0
    while heap:
        cost, state = heapq.heappop(heap)
        seq = LabelSeq(state, cost)
        if best is None:
            best = seq
        examined += 1
        if probe(state):
            found = seq
            break
        mass += seq.probability
        if examined >= max_k or (mass_threshold is not None and mass > mass_threshold):
            break
        for i, r in enumerate(state):
            if r == table.l - 1:
                continue
            child = state[:i] + (r + 1,) + state[i + 1:]
            if child not in visited:
                visited.add(child)
                heapq.heappush(heap, (fast_cost(table, child), child))
        peak = max(peak, len(heap))

    status = _final_status(found, examined, table)
    log.debug("best-first: %s after %d sequences", status.value, examined)
    return DecodeOutcome(
        status=status,
        sequence=found,
        best=best,
        sequences_examined=examined,
        elapsed=time.perf_counter() - start,
        constraint_seconds=probe.seconds,
        peak_heap=peak,
        frontier_size=len(visited),
    )


def beam_filter_decode(table: ProbTable, vocab: Sequence[str], tokens: Sequence, constraint,
                       max_k: int) -> DecodeOutcome:
    """Beam search to width max_k, then the first beam the constraint accepts."""
    check_decode_args(table, vocab, tokens, max_k)
    start = time.perf_counter()
    probe = ConstraintProbe(constraint, table, vocab, tokens)
    beams = beam_topk(table, max_k)

    found = None
    examined = 0
    for seq in beams:
        examined += 1
        if probe(seq.ranks):
            found = seq
            break

    return DecodeOutcome(
        status=_final_status(found, examined, table),
        sequence=found,
        best=beams[0],
        sequences_examined=examined,
        elapsed=time.perf_counter() - start,
        constraint_seconds=probe.seconds,
    )


def viterbi_bio(table: ProbTable, vocab: Sequence[str]) -> list[str]:
    """
    Most probable BIO-valid labelling. Among equally probable ones this is
    the smallest rank vector, the one lazy-k with a BIO constraint examines first.
    :raises DecodeError: when every BIO-valid labelling has probability 0
    """
    if len(vocab) != table.l:
        raise DecodeError(f"Vocabulary has {len(vocab)} labels, table has {table.l}")
    allowed, can_start = transition_mask(vocab)
    trans = np.where(allowed, 0.0, np.inf)
    cost = -table.logp

    # suffix[t, j]: cheapest cost of positions after t, given label j at t
    suffix = np.zeros_like(cost)
    for t in range(table.n - 2, -1, -1):
        suffix[t] = (trans + (cost[t + 1] + suffix[t + 1])[None, :]).min(axis=1)

    # Walk forward, keeping to cheapest completions and taking the lowest rank among ties
    path: list[int] = []
    spent = 0.0
    options = can_start
    for t in range(table.n):
        through = np.where(options, spent + cost[t] + suffix[t], np.inf)
        best = through.min()
        if np.isinf(best):
            raise DecodeError("No BIO-valid labelling has non-zero probability")
        tied = np.flatnonzero(np.isclose(through, best, rtol=_TIE_RTOL, atol=0.0))
        j = int(tied[np.argmin(table.inverse[t, tied])])
        path.append(j)
        spent += cost[t, j]
        options = allowed[j]
    return [vocab[j] for j in path]
