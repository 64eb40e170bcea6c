"""Named sequence specs and measure models used by the CLI and the tests."""

from __future__ import annotations

from .errors import ConfigError
from .measures import (AffineDensity, CantorPart, ConstantDensity, GridDensity,
                       MeasureModel)
from .sequences import SequenceSpec

_SEQUENCES = {
    "orthonormal": ("standard orthonormal basis e_n",
                    lambda: SequenceSpec("weighted_basis", {"formula": ("constant", 1.0)})),
    "weighted-basis-n": ("f_0 = 0 and f_n = n e_n (incomplete, injectively convertible)",
                         lambda: SequenceSpec("weighted_basis", {"formula": "n"})),
    "weighted-basis-n1": ("(n+1) e_n (norms grow, orthonormalizable)",
                          lambda: SequenceSpec("weighted_basis", {"formula": "n+1"})),
    "weighted-basis-inv": ("e_n / (n+1) (norms vanish, not convertible)",
                           lambda: SequenceSpec("weighted_basis", {"formula": "1/(n+1)"})),
    "union-weights": ("union of (n+1) e_n and e_n / (n+1), round-robin",
                      lambda: SequenceSpec("union", {"members": [
                          SequenceSpec("weighted_basis", {"formula": "n+1"}),
                          SequenceSpec("weighted_basis", {"formula": "1/(n+1)"})]})),
    "parseval-blocks": ("block Parseval frame e_0, e_1, e_2/sqrt2 x2, e_3/sqrt3 x3, ...",
                        lambda: SequenceSpec("parseval_blocks", {})),
    "weighted-parseval-blocks": ("block Parseval frame rescaled by the block weights a_n",
                                 lambda: SequenceSpec("weighted_parseval_blocks", {})),
    "block-weighted-basis": ("a_n e_n with the block weights, in block-index space",
                             lambda: SequenceSpec("block_weighted_basis", {})),
}

_MEASURES = {
    "lebesgue": ("Lebesgue measure on [0,1)",
                 lambda: MeasureModel(density=ConstantDensity(1.0))),
    "affine": ("density 1/2 + x",
               lambda: MeasureModel(density=AffineDensity(0.5, 1.0))),
    "cantor3": ("middle-thirds Cantor measure (ratio 1/3, digits 0 and 2/3)",
                lambda: MeasureModel(cantor=CantorPart(1.0 / 3.0, (0.0, 2.0 / 3.0), 1.0))),
    "mix-cantor3": ("half Lebesgue plus half middle-thirds Cantor",
                    lambda: MeasureModel(density=ConstantDensity(0.5),
                                         cantor=CantorPart(1.0 / 3.0, (0.0, 2.0 / 3.0), 0.5))),
    "atom0": ("single unit atom at x = 0",
              lambda: MeasureModel(atoms=((0.0, 1.0),))),
    "step2": ("ramped two-level density between 2 and 2/3 (mass-exact)",
              lambda: MeasureModel(density=GridDensity(
                  (0.0, 0.25 - 1.0 / 64, 0.25 + 1.0 / 64, 1.0),
                  (2.0, 2.0, 2.0 / 3.0, 2.0 / 3.0)))),
}


def sequence_names():
    return sorted(_SEQUENCES)


def measure_names():
    return sorted(_MEASURES)


def sequence_spec(name: str) -> SequenceSpec:
    try:
        return _SEQUENCES[name][1]()
    except KeyError:
        raise ConfigError(
            f"unknown gallery sequence {name!r}; known: {', '.join(sequence_names())}"
        ) from None


def measure_model(name: str) -> MeasureModel:
    try:
        return _MEASURES[name][1]()
    except KeyError:
        raise ConfigError(
            f"unknown gallery measure {name!r}; known: {', '.join(measure_names())}"
        ) from None


def describe() -> list:
    """(kind, name, description) rows for `gallery list`."""
    rows = [("sequence", name, _SEQUENCES[name][0]) for name in sequence_names()]
    rows += [("measure", name, _MEASURES[name][0]) for name in measure_names()]
    return rows
