"""
Lazy-k decoding.

Enumerates full label assignments in decreasing probability order and stops
at the first one the constraint accepts, or when the budget runs out.

How the enumeration works:
- Every assignment k > 1 is one rank increment away from an assignment that
  was already examined, so the search only ever needs single-edit children.
- The frontier maps each registered assignment to the index of its next
  untried child; children are tried in order of their cost increase (the
  per-state edit list, computed once and cached).
- The heap holds at most one entry per examined assignment, keyed by the cost
  of that assignment's next unexplored child (partial expansion). Popping an
  entry yields that child; the child and its parent are then both re-armed.

Ties: assignments of equal cost come out in ascending lexicographic order of
their rank vectors. Edit lists order equal deltas by descending position
(which is the same thing for the children of one parent), and heap entries
compare by (cost, child ranks, insertion counter).

Memory: states are stored as bytes when the table has at most 256 labels
(tuples otherwise) and cached edit lists as compact arrays; both orderings
are unchanged by the packing.
"""

import itertools
import heapq
import logging
import math
import time
from array import array
from typing import Callable, NamedTuple, Sequence

from errors import DecodeError
from outcome import DecodeOutcome
from params import DecodeStatus
from prob_table import LabelSeq, ProbTable

log = logging.getLogger(__name__)

Ranks = tuple[int, ...]
# A rank vector as the search stores it: bytes or a tuple
State = bytes | Ranks
# observer(sequence, heap size, frontier size), called on every examination
Observer = Callable[[LabelSeq, int, int], None]


def fast_cost(table: ProbTable, ranks: Sequence[int]) -> float:
    """seq_cost without the argument checks, for ranks the search produced itself."""
    return math.fsum([row[r] for row, r in zip(table.cost_rows, ranks)])


class Frontier(dict):
    """
    Rank vector -> index of its next untried single-edit child.
    A counter equal to the length of the state's edit list means no children remain.
    """


class EditCache:
    """Per-state edit lists, dropped once the state has no children left."""

    def __init__(self):
        self._lists: dict[State, array] = {}

    def __len__(self):
        return len(self._lists)

    def get(self, table: ProbTable, state: State) -> array:
        edits = self._lists.get(state)
        if edits is None:
            edits = array("H" if table.n <= 0xFFFF else "L", edit_list(table, state))
            self._lists[state] = edits
        return edits

    def drop(self, state: State):
        self._lists.pop(state, None)


class HeapEntry(NamedTuple):
    priority: float
    child: State
    order: int
    state: State


class SearchHeap:
    """Binary min-heap of HeapEntry, with an insertion counter as the last key."""

    def __init__(self):
        self._heap: list[HeapEntry] = []
        self._counter = itertools.count()

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)

    def push(self, state: State, child: State, priority: float):
        heapq.heappush(self._heap, HeapEntry(priority, child, next(self._counter), state))

    def pop(self) -> HeapEntry:
        return heapq.heappop(self._heap)


def edit_list(table: ProbTable, state: State) -> list[int]:
    """
    Positions of state sorted by the cost increase of moving that position
    one rank down. Positions already at the last rank are left out.
    :return: at most n positions
    """
    last = table.l - 1
    keyed = []
    for i, (row, r) in enumerate(zip(table.cost_rows, state)):
        if r == last:
            continue
        cur = row[r]
        # inf to inf keeps the cost at +inf
        keyed.append((0.0 if cur == math.inf else row[r + 1] - cur, -i))
    keyed.sort()
    return [-i for _, i in keyed]


def next_best(state: State, frontier: Frontier, table: ProbTable, cache: EditCache) -> State | None:
    """
    The frontier[state]-th cheapest single-edit child of state, without
    touching the counter.
    :return: Child rank vector, or None when state has no untried child left
    """
    if state not in frontier:
        raise DecodeError("State is not in the frontier")
    edits = cache.get(table, state)
    counter = frontier[state]
    if counter >= len(edits):
        return None
    i = edits[counter]
    return state[:i] + type(state)((state[i] + 1,)) + state[i + 1:]


def add_next_best(state: State, heap: SearchHeap, frontier: Frontier, table: ProbTable, cache: EditCache):
    """
    Re-arm state: skip children already registered, then register the first
    unseen child and push state keyed by that child's cost. A state with no
    unseen child is retired and pushes nothing.
    """
    child = next_best(state, frontier, table, cache)
    while child is not None and child in frontier:
        frontier[state] += 1
        child = next_best(state, frontier, table, cache)

    if child is None:
        cache.drop(state)
        return
    frontier[child] = 0
    heap.push(state, child, fast_cost(table, child))


class LazyEnumerator:
    """
    Iterator over all assignments of a table in canonical order. Work for the
    next assignment is only done when it is requested.
    """

    def __init__(self, table: ProbTable):
        self.table = table
        self.frontier = Frontier()
        self.cache = EditCache()
        self.heap = SearchHeap()
        self.peak_heap = 0

    def _note_peak(self):
        self.peak_heap = max(self.peak_heap, len(self.heap))

    def __iter__(self):
        table = self.table
        y1: State = bytes(table.n) if table.l <= 256 else (0,) * table.n
        yield LabelSeq(tuple(y1), fast_cost(table, y1))

        self.frontier[y1] = 0
        add_next_best(y1, self.heap, self.frontier, table, self.cache)
        self._note_peak()

        while self.heap:
            entry = self.heap.pop()
            yi = entry.state
            yk = next_best(yi, self.frontier, table, self.cache)
            yield LabelSeq(tuple(yk), entry.priority)

            add_next_best(yk, self.heap, self.frontier, table, self.cache)
            add_next_best(yi, self.heap, self.frontier, table, self.cache)
            self._note_peak()


class ConstraintProbe:
    """Evaluates a constraint on rank vectors and keeps time spent inside it."""

    def __init__(self, constraint, table: ProbTable, vocab: Sequence[str], tokens: Sequence):
        self.constraint = constraint
        self.table = table
        self.vocab = list(vocab)
        self.tokens = tokens
        self.seconds = 0.0

    def __call__(self, ranks: Sequence[int]) -> bool:
        vocab = self.vocab
        labels = [vocab[row[r]] for row, r in zip(self.table.order_rows, ranks)]
        start = time.perf_counter()
        ok = bool(self.constraint(self.tokens, labels))
        self.seconds += time.perf_counter() - start
        return ok


def check_decode_args(table: ProbTable, vocab: Sequence[str], tokens: Sequence, max_k: int):
    if max_k < 1:
        raise DecodeError(f"Budget must be at least 1, got {max_k}")
    if len(vocab) != table.l:
        raise DecodeError(f"Vocabulary has {len(vocab)} labels, table has {table.l}")
    if len(tokens) != table.n:
        raise DecodeError(f"Got {len(tokens)} tokens, table has {table.n} positions")


def lazy_k_decode(table: ProbTable, vocab: Sequence[str], tokens: Sequence, constraint, max_k: int,
                  mass_threshold: float | None = None, observer: Observer | None = None) -> DecodeOutcome:
    """
    Return the most probable assignment the constraint accepts, looking at
    no more than max_k assignments.
    :param constraint: Callable (tokens, labels) -> bool
    :param mass_threshold: Optional stop once the examined probability mass exceeds it
    :param observer: Optional hook called on every examined assignment
    """
    check_decode_args(table, vocab, tokens, max_k)
    start = time.perf_counter()
    probe = ConstraintProbe(constraint, table, vocab, tokens)
    search = LazyEnumerator(table)

    best: LabelSeq | None = None
    found: LabelSeq | None = None
    examined = 0
    mass = 0.0
    for seq in search:
        if best is None:
            best = seq
        examined += 1
        if observer is not None:
            observer(seq, len(search.heap), len(search.frontier))
        if probe(seq.ranks):
            found = seq
            break
        if examined >= max_k:
            break
        if mass_threshold is not None:
            mass += seq.probability
            if mass > mass_threshold:
                break

    if found is not None:
        status = DecodeStatus.SATISFIED
    elif examined >= table.l ** table.n:
        status = DecodeStatus.SEARCH_EXHAUSTED
    else:
        status = DecodeStatus.EXHAUSTED_BUDGET

    outcome = DecodeOutcome(
        status=status,
        sequence=found,
        best=best,
        sequences_examined=examined,
        elapsed=time.perf_counter() - start,
        constraint_seconds=probe.seconds,
        peak_heap=search.peak_heap,
        frontier_size=len(search.frontier),
    )
    log.debug("lazy-k: %s after %d sequences", status.value, examined)
    return outcome


def topk_lazy(table: ProbTable, k: int) -> list[LabelSeq]:
    """The k most probable assignments, as lazy-k would examine them."""
    if k < 1:
        raise DecodeError(f"k must be at least 1, got {k}")
    return list(itertools.islice(LazyEnumerator(table), k))
