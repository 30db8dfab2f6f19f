from attr import dataclass

from params import DecodeStatus
from prob_table import LabelSeq


@dataclass(frozen=True)
class DecodeOutcome:
    """
    Result of one decode.
    - sequence: the satisfying sequence, None unless status is SATISFIED.
    - best: the most probable sequence (y1), the fallback prediction.
    - constraint_seconds: part of elapsed spent inside the constraint.
    - peak_heap / frontier_size: search bookkeeping, 0 for one-shot decoders.
    """
    status: DecodeStatus
    sequence: LabelSeq | None
    best: LabelSeq
    sequences_examined: int
    elapsed: float
    constraint_seconds: float = 0.0
    peak_heap: int = 0
    frontier_size: int = 0

    @property
    def satisfied(self) -> bool:
        return self.status is DecodeStatus.SATISFIED

    @property
    def prediction(self) -> LabelSeq:
        return self.sequence if self.sequence is not None else self.best
