from typing import Final
from enum import Enum


class DecoderName(str, Enum):
    ARGMAX = "argmax"
    LAZYK = "lazyk"
    BESTFIRST = "bestfirst"
    BEAM = "beam"
    VITERBI_BIO = "viterbi-bio"


# Decoders that honour a probability mass stop
MASS_DECODERS: Final = frozenset({DecoderName.LAZYK.value, DecoderName.BESTFIRST.value})


class ConstraintSetName(str, Enum):
    CORD = "cord"
    WILDRECEIPT = "wildreceipt"
    DOCILE = "docile"
    NONE = "none"


class DecodeStatus(str, Enum):
    SATISFIED = "satisfied"
    EXHAUSTED_BUDGET = "exhausted-budget"
    SEARCH_EXHAUSTED = "search-exhausted"


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    NOT_EVALUATED = "not-evaluated"

    def passes(self) -> bool:
        # Not-evaluated counts as satisfied inside a conjunction
        return self is not Verdict.VIOLATED


class FieldKind(str, Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    REQUIRED = "required"


class Aggregation(str, Enum):
    SINGLE = "single"
    SUM = "sum"


class SeparatorLocale(str, Enum):
    AMBIGUOUS_THOUSANDS = "ambiguous-thousands"
    DECIMAL_POINT = "decimal-point"
    DECIMAL_COMMA = "decimal-comma"


DEFAULT_LOCALE = SeparatorLocale.AMBIGUOUS_THOUSANDS

DEFAULT_MAX_K: Final[int] = 2 ** 10
DEFAULT_REPEATS: Final[int] = 10
DEFAULT_JOBS: Final[int] = 1

# Largest l^n brute force will enumerate
BRUTE_FORCE_LIMIT: Final[int] = 10 ** 7

# Amounts are integer hundredths
MINOR_DIGITS: Final[int] = 2
AMOUNT_ABS_TOLERANCE: Final[int] = 1
AMOUNT_REL_TOLERANCE: Final[float] = 1e-6

TAX_RATE_CORD: Final[str] = "0.1"

EXIT_OK: Final[int] = 0
EXIT_USAGE: Final[int] = 1
EXIT_DATA: Final[int] = 2
EXIT_UNSATISFIED: Final[int] = 3
