"""
Probability tables and the rank representation of label sequences.

A ProbTable holds the n x l matrix of natural-log label probabilities of one
document plus, per position, the labels sorted by decreasing probability
(ties by ascending label index). A label sequence is stored as the vector of
ranks into those per-position orders; rank 0 everywhere is the argmax.

Impossible labels are -inf and always sort last.
"""

import math
from functools import cached_property
from typing import Sequence

import numpy as np
from attr import dataclass

from errors import TableError


@dataclass(frozen=True, eq=False)
class ProbTable:
    """
    Immutable per-document table.
    - logp: n x l log-probabilities, columns in vocabulary order.
    - rank_order: n x l label indices, row i sorted by decreasing logp[i].
    - sorted_logp: logp gathered in rank order, so sorted_logp[i][j] is the
      log-probability of the rank-j label at position i.
    - inverse: inverse permutation of rank_order (label index -> rank).
    """
    logp: np.ndarray
    rank_order: np.ndarray
    sorted_logp: np.ndarray
    inverse: np.ndarray

    @property
    def n(self) -> int:
        return self.logp.shape[0]

    @property
    def l(self) -> int:
        return self.logp.shape[1]

    def label_at(self, position: int, rank: int) -> int:
        return int(self.rank_order[position, rank])

    def rank_of(self, position: int, label: int) -> int:
        return int(self.inverse[position, label])

    def logp_at(self, position: int, rank: int) -> float:
        return float(self.sorted_logp[position, rank])

    # Plain list views for the per-sequence search loops
    @cached_property
    def cost_rows(self) -> list[list[float]]:
        """cost_rows[i][j] = -sorted_logp[i][j]; impossible labels are +inf."""
        return (-self.sorted_logp).tolist()

    @cached_property
    def order_rows(self) -> list[list[int]]:
        return self.rank_order.tolist()


@dataclass(frozen=True)
class LabelSeq:
    ranks: tuple[int, ...]
    cost: float

    @property
    def probability(self) -> float:
        return math.exp(-self.cost)

    def __len__(self) -> int:
        return len(self.ranks)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def build_table(logp_matrix) -> ProbTable:
    """
    Build a table from an n x l matrix of log-probabilities
    :param logp_matrix: Anything numpy can turn into a 2-D float array
    :return: Immutable ProbTable
    """
    logp = np.array(logp_matrix, dtype=np.float64)
    if logp.ndim != 2 or logp.size == 0:
        raise TableError(f"Expected a non-empty n x l matrix, got shape {logp.shape}")
    if np.isnan(logp).any():
        raise TableError("Matrix contains NaN entries")
    if np.isposinf(logp).any():
        raise TableError("Matrix contains +inf entries")
    dead = np.flatnonzero(np.isneginf(logp).all(axis=1))
    if dead.size:
        raise TableError(f"Position {int(dead[0])} has no possible label")

    # Stable sort keeps ascending label index among equal values
    rank_order = np.argsort(-logp, axis=1, kind="stable")
    sorted_logp = np.take_along_axis(logp, rank_order, axis=1)
    inverse = np.argsort(rank_order, axis=1)

    return ProbTable(
        logp=_readonly(logp),
        rank_order=_readonly(rank_order),
        sorted_logp=_readonly(sorted_logp),
        inverse=_readonly(inverse),
    )


def _check_ranks(table: ProbTable, ranks: Sequence[int]) -> None:
    if len(ranks) != table.n:
        raise TableError(f"Rank vector has length {len(ranks)}, table has {table.n} positions")
    for i, r in enumerate(ranks):
        if not 0 <= r < table.l:
            raise TableError(f"Rank {r} at position {i} out of range [0, {table.l})")


def seq_cost(table: ProbTable, ranks: Sequence[int]) -> float:
    """
    Negative log-probability of a sequence, summed exactly rounded so the
    same ranks always give the same float.
    """
    _check_ranks(table, ranks)
    picks = table.sorted_logp[np.arange(table.n), np.asarray(ranks, dtype=np.intp)]
    return math.fsum(-picks)


def make_seq(table: ProbTable, ranks: Sequence[int]) -> LabelSeq:
    return LabelSeq(tuple(int(r) for r in ranks), seq_cost(table, ranks))


def _ranks(seq) -> Sequence[int]:
    return seq.ranks if isinstance(seq, LabelSeq) else seq


def seq_distance(a, b) -> int:
    """
    Signed rank distance: sum of b.ranks[i] - a.ranks[i]
    :param a: LabelSeq or rank vector
    :param b: LabelSeq or rank vector of the same length
    """
    ra, rb = _ranks(a), _ranks(b)
    if len(ra) != len(rb):
        raise TableError(f"Cannot compare sequences of length {len(ra)} and {len(rb)}")
    return sum(int(y) - int(x) for x, y in zip(ra, rb))


def labels_of(table: ProbTable, seq, vocab: Sequence[str]) -> list[str]:
    """
    Map a rank vector back to label names
    :param seq: LabelSeq or rank vector
    :param vocab: Label names in matrix column order
    """
    if len(vocab) != table.l:
        raise TableError(f"Vocabulary has {len(vocab)} labels, table has {table.l}")
    ranks = _ranks(seq)
    _check_ranks(table, ranks)
    return [vocab[table.label_at(i, r)] for i, r in enumerate(ranks)]


def ranks_of(table: ProbTable, label_indices: Sequence[int]) -> tuple[int, ...]:
    """Inverse of labels_of on label indices."""
    if len(label_indices) != table.n:
        raise TableError(f"Label vector has length {len(label_indices)}, table has {table.n} positions")
    return tuple(table.rank_of(i, int(lab)) for i, lab in enumerate(label_indices))
