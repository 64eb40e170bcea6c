"""framelab: numerical experiments with frame-convertible sequences.

The package builds the model sequences as finite truncations, computes
their frame-theoretic operators, classifies them along truncation
ladders through singular value analysis, constructs Parseval-converting
operators, and runs exponential-system and Kaczmarz experiments over
mixed Borel measures on [0,1).
"""

__version__ = "0.1.0"

from .numerics import SpectralTolerance, DEFAULT_TOL  # noqa: F401
from .sequences import (LadderSchedule, SequenceSpec, TruncatedSequence,  # noqa: F401
                        generate)
from .measures import MeasureModel  # noqa: F401
