"""Word maps on finite permutation groups: evaluation, probabilities and word synthesis."""

from .errors import (
    CapExceeded,
    DegreeMismatch,
    InvariantViolation,
    NotInGroup,
    OracleTooLarge,
    PreconditionError,
    WordsatError,
)
from .perm import Permutation, PermutationGroup, StabilizerChain
from .slp import SLPBuilder, StraightLineProgram, Word, parse_word

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "DegreeMismatch",
    "InvariantViolation",
    "NotInGroup",
    "OracleTooLarge",
    "PreconditionError",
    "WordsatError",
    "Permutation",
    "PermutationGroup",
    "StabilizerChain",
    "SLPBuilder",
    "StraightLineProgram",
    "Word",
    "parse_word",
]
