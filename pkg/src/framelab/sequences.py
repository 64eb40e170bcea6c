"""Generators for the model sequences.

Every sequence is produced as a finite truncation of a declarative spec:
weighted orthonormal bases w(n) e_n, the Parseval block system
{e0, e1, e2/sqrt(2), e2/sqrt(2), e3/sqrt(3), ...}, its weight list,
the weighted standard basis {a_n e_n} built from those weights, unions,
pointwise perturbations, explicit matrices, and exponential systems in
L2(mu) (delegated to the measures module).

Vectors are stored as the columns of a (d, N) complex matrix.  Generators
are pure functions of (spec, d): identical inputs give bitwise-identical
output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadWeight, ConfigError, DimensionMismatch
from .numerics import as_matrix

#: weight formula catalog: "n", "n+1", "1/(n+1)", ("constant", c), ("table", values)
WEIGHT_CATALOG = ("n", "n+1", "1/(n+1)", "constant", "table")


def eval_weights(formula, d: int) -> np.ndarray:
    """Evaluate a catalog weight formula at n = 0..d-1.

    `formula` is one of the plain strings "n", "n+1", "1/(n+1)", or a pair
    ("constant", c), or ("table", values) with at least d values.
    """
    n = np.arange(d, dtype=float)
    if formula == "n":
        w = n
    elif formula == "n+1":
        w = n + 1.0
    elif formula == "1/(n+1)":
        w = 1.0 / (n + 1.0)
    elif isinstance(formula, (tuple, list)) and len(formula) == 2:
        name, arg = formula
        if name == "constant":
            w = np.full(d, float(arg))
        elif name == "table":
            vals = np.asarray(arg, dtype=float)
            if vals.size < d:
                raise BadWeight(f"weight table has {vals.size} entries, need {d}")
            w = vals[:d].copy()
        else:
            raise BadWeight(f"unknown weight formula {name!r}")
    else:
        raise BadWeight(f"unknown weight formula {formula!r}")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise BadWeight("weights must be finite and nonnegative")
    return w


@dataclass
class SequenceSpec:
    """Declarative description of an asymptotic sequence.

    kind is one of: weighted_basis, parseval_blocks, weighted_parseval_blocks,
    block_weighted_basis, union, perturbed, explicit, exponential.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        params = {}
        for key, val in self.params.items():
            if isinstance(val, SequenceSpec):
                params[key] = val.to_json()
            elif key == "members":
                params[key] = [m.to_json() for m in val]
            elif key == "matrix":
                a = as_matrix(val)
                params[key] = [[[float(z.real), float(z.imag)] for z in row] for row in a]
            elif key == "measure":
                params[key] = val if isinstance(val, dict) else val.to_json()
            else:
                params[key] = val
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_json(cls, doc: dict) -> "SequenceSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigError("sequence spec document must have a 'kind' field")
        kind = doc["kind"]
        raw = dict(doc.get("params", {}))
        params = {}
        for key, val in raw.items():
            if key in ("base", "delta"):
                params[key] = cls.from_json(val)
            elif key == "members":
                params[key] = [cls.from_json(m) for m in val]
            elif key == "matrix":
                rows = [[complex(re, im) for re, im in row] for row in val]
                params[key] = np.asarray(rows, dtype=np.complex128)
            elif key == "formula" and isinstance(val, list):
                params[key] = tuple(val)
            else:
                params[key] = val
        return cls(kind, params)


@dataclass
class TruncatedSequence:
    """A finite window onto a sequence: N vectors as columns of a d x N matrix."""

    matrix: np.ndarray
    spec: SequenceSpec | None = None

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix)
        if self.matrix.shape[1] < 1:
            raise DimensionMismatch("a truncated sequence needs at least one vector")

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def count(self) -> int:
        return self.matrix.shape[1]

    @property
    def level(self) -> tuple[int, int]:
        return self.matrix.shape

    def vector(self, n: int) -> np.ndarray:
        return self.matrix[:, n]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.matrix, axis=0)


@dataclass(frozen=True)
class LadderSchedule:
    """Ordered (d, N) truncation levels, strictly increasing in both."""

    levels: tuple
    note: str = ""

    def __post_init__(self):
        lv = tuple((int(d), int(n)) for d, n in self.levels)
        if not lv:
            raise ConfigError("ladder must contain at least one level")
        for (d0, n0), (d1, n1) in zip(lv, lv[1:]):
            if not (d1 > d0 and n1 > n0):
                raise ConfigError(f"ladder not strictly increasing: {(d0, n0)} -> {(d1, n1)}")
        object.__setattr__(self, "levels", lv)

    @property
    def dims(self) -> tuple:
        return tuple(d for d, _ in self.levels)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_weighted_basis(formula, d: int) -> TruncatedSequence:
    """w(n) e_n for n = 0..d-1 in the standard basis of C^d."""
    if d < 2:
        raise ConfigError("weighted basis needs d >= 2")
    w = eval_weights(formula, d)
    m = np.zeros((d, d), dtype=np.complex128)
    m[np.arange(d), np.arange(d)] = w
    return TruncatedSequence(m, SequenceSpec("weighted_basis", {"formula": formula}))


def block_sizes(d: int) -> list:
    """Block sizes 1, 1, 2, 3, ..., d-1 for d blocks."""
    return [1] + [max(k, 1) for k in range(1, d)]


def parseval_block_count(d: int) -> int:
    """Total vector count for d blocks: 1 + d(d-1)/2."""
    return 1 + d * (d - 1) // 2


def gen_parseval_blocks(d: int) -> TruncatedSequence:
    """Block k of the Parseval system: k copies of e_k / sqrt(k) (block 0 is e_0).

    The frame operator of the output is the identity on the spanned
    coordinates, i.e. the system is a Parseval frame of C^d.
    """
    if d < 2:
        raise ConfigError("parseval blocks need d >= 2")
    n_total = parseval_block_count(d)
    m = np.zeros((d, n_total), dtype=np.complex128)
    col = 0
    m[0, col] = 1.0
    col += 1
    for k in range(1, d):
        m[k, col:col + k] = 1.0 / math.sqrt(k)
        col += k
    return TruncatedSequence(m, SequenceSpec("parseval_blocks", {}))


def gen_block_weights(d: int) -> np.ndarray:
    """Weights aligned with gen_parseval_blocks: 1, 1, then per block k >= 2
    one sqrt(k) followed by k-1 copies of 1/sqrt(k)."""
    if d < 2:
        raise ConfigError("block weights need d >= 2")
    out = [1.0, 1.0]
    for k in range(2, d):
        out.append(math.sqrt(k))
        out.extend([1.0 / math.sqrt(k)] * (k - 1))
    return np.asarray(out)


def gen_weighted_parseval_blocks(d: int) -> TruncatedSequence:
    """The Parseval block vectors rescaled entrywise by the block weights a_n."""
    blocks = gen_parseval_blocks(d)
    a = gen_block_weights(d)
    m = blocks.matrix * a[np.newaxis, :]
    return TruncatedSequence(m, SequenceSpec("weighted_parseval_blocks", {}))


def gen_weighted_std_basis_from_blocks(d: int) -> TruncatedSequence:
    """a_n e_n with a = gen_block_weights(d), in the N-dimensional space that
    indexes the block system (N = 1 + d(d-1)/2)."""
    a = gen_block_weights(d)
    n_total = a.size
    m = np.zeros((n_total, n_total), dtype=np.complex128)
    m[np.arange(n_total), np.arange(n_total)] = a
    return TruncatedSequence(m, SequenceSpec("block_weighted_basis", {}))


def gen_zero_sum_subspace_basis(d: int) -> np.ndarray:
    """Orthonormal basis (d x (d-1) columns) of {a in C^d : sum_k a_k = 0}.

    Built from the Householder reflection mapping e_0 to the normalized
    all-ones vector; columns 1..d-1 of the reflector span the orthogonal
    complement of the ones vector.
    """
    if d < 2:
        raise ConfigError("zero-sum subspace needs d >= 2")
    ones = np.full(d, 1.0 / math.sqrt(d))
    u = -ones.copy()
    u[0] += 1.0
    h = np.eye(d) - 2.0 * np.outer(u, u) / float(u @ u)
    return h[:, 1:].astype(np.complex128)


def gen_union(seqs) -> TruncatedSequence:
    """Interleave several truncations round-robin by source index."""
    seqs = list(seqs)
    if not seqs:
        raise ConfigError("union of sequences must be non-empty")
    d = seqs[0].ambient_dim
    for s in seqs:
        if s.ambient_dim != d:
            raise DimensionMismatch("union members must share ambient dimension")
    cols = []
    for j in range(max(s.count for s in seqs)):
        for s in seqs:
            if j < s.count:
                cols.append(s.matrix[:, j])
    m = np.column_stack(cols)
    members = [s.spec for s in seqs if s.spec is not None]
    spec = SequenceSpec("union", {"members": members}) if len(members) == len(seqs) else None
    return TruncatedSequence(m, spec)


def gen_perturbed(base: TruncatedSequence, delta: TruncatedSequence,
                  scale: float) -> TruncatedSequence:
    """base + scale * delta, vector by vector."""
    if base.matrix.shape != delta.matrix.shape:
        raise DimensionMismatch(
            f"perturbation shape {delta.matrix.shape} does not match base {base.matrix.shape}")
    m = base.matrix + scale * delta.matrix
    spec = None
    if base.spec is not None and delta.spec is not None:
        spec = SequenceSpec("perturbed", {"base": base.spec, "delta": delta.spec,
                                          "scale": float(scale)})
    return TruncatedSequence(m, spec)


_GENERATOR_KINDS = ("weighted_basis", "parseval_blocks", "weighted_parseval_blocks",
                    "block_weighted_basis", "union", "perturbed", "explicit",
                    "exponential")


def generate(spec: SequenceSpec, d: int) -> TruncatedSequence:
    """Materialize a spec at truncation level d (d = ambient dim for basis
    kinds, block count for block kinds, window size for exponentials)."""
    if spec.kind == "weighted_basis":
        return gen_weighted_basis(spec.params["formula"], d)
    if spec.kind == "parseval_blocks":
        return gen_parseval_blocks(d)
    if spec.kind == "weighted_parseval_blocks":
        return gen_weighted_parseval_blocks(d)
    if spec.kind == "block_weighted_basis":
        return gen_weighted_std_basis_from_blocks(d)
    if spec.kind == "union":
        members = [generate(m, d) for m in spec.params["members"]]
        out = gen_union(members)
        out.spec = spec
        return out
    if spec.kind == "perturbed":
        base = generate(spec.params["base"], d)
        delta = generate(spec.params["delta"], d)
        out = gen_perturbed(base, delta, spec.params.get("scale", 1.0))
        out.spec = spec
        return out
    if spec.kind == "explicit":
        m = as_matrix(spec.params["matrix"])
        if d is not None and d != m.shape[0]:
            raise DimensionMismatch(
                f"explicit matrix has ambient dim {m.shape[0]}, requested {d}")
        return TruncatedSequence(m.copy(), spec)
    if spec.kind == "exponential":
        from . import measures  # deferred: measures depends on this module

        model = spec.params["measure"]
        if isinstance(model, dict):
            model = measures.MeasureModel.from_json(model)
        window = spec.params.get("window")
        if window is None:
            n_min = int(spec.params.get("n_min", 0))
            window = (n_min, n_min + d - 1)
        else:
            window = (int(window[0]), int(window[1]))
            if window[1] - window[0] + 1 != d:
                raise DimensionMismatch(
                    f"exponential window {window} has size {window[1]-window[0]+1}, requested {d}")
        out = measures.exp_system_as_sequence(
            model, window,
            realization=spec.params.get("realization", "coefficient_space"),
            grid_points=spec.params.get("grid_points"))
        out.spec = spec
        return out
    raise ConfigError(f"unknown sequence kind {spec.kind!r}; expected one of {_GENERATOR_KINDS}")


def natural_ladder(spec: SequenceSpec, dims) -> LadderSchedule:
    """Ladder with N taken from the generator's natural count at each d."""
    levels = []
    for d in dims:
        seq = generate(spec, int(d))
        levels.append(seq.level)
    return LadderSchedule(tuple(levels))
