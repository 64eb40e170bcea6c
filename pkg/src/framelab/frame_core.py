"""Frame-theoretic operators at a fixed truncation.

Conventions: a truncated sequence stores its vectors as the columns of
F (d x N).  The analysis matrix is A = F* (N x d), so (A f)_n = <f, f_n>
with the inner product linear in the first slot.  The synthesis operator
is A* = F, the frame operator is S = A* A = F F* (computed exactly in
that contraction order), and the Gram matrix is F* F.

Zero vectors are allowed everywhere; nothing here divides by a vector
norm without the pseudo-inverse guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LowerBoundTooSmall, NotOrthonormal, OutOfRange
from .numerics import (DEFAULT_TOL, SpectralTolerance, as_matrix, eig_hermitian,
                       numerical_rank, operator_norm, psd_inverse_sqrt, psd_pinv,
                       range_projector)
from .sequences import TruncatedSequence


def analysis_matrix(seq: TruncatedSequence) -> np.ndarray:
    """N x d matrix whose n-th row is the conjugate transpose of f_n."""
    return seq.matrix.conj().T


def synthesis_matrix(seq: TruncatedSequence) -> np.ndarray:
    """Adjoint of the analysis matrix: the d x N matrix F itself."""
    return seq.matrix


def frame_operator(seq: TruncatedSequence) -> np.ndarray:
    """S = sum_n f_n f_n*, computed as A* A (fixed contraction order)."""
    a = analysis_matrix(seq)
    return a.conj().T @ a


def gram_matrix(seq: TruncatedSequence) -> np.ndarray:
    """Pairwise inner products F* F; entry (n, m) is <f_m, f_n>."""
    return seq.matrix.conj().T @ seq.matrix


@dataclass(frozen=True)
class FrameBounds:
    """Optimal lower/upper frame constants (on a subspace when restricted)."""

    lower: float
    upper: float
    subspace_dim: int


def _check_orthonormal(q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    q = as_matrix(q)
    gram = q.conj().T @ q
    defect = np.max(np.abs(gram - np.eye(q.shape[1]))) if q.size else 0.0
    if defect > tol:
        raise NotOrthonormal(f"subspace basis defect {defect:.3e} exceeds {tol:.1e}")
    return q


def frame_bounds(seq: TruncatedSequence, subspace: np.ndarray | None = None,
                 tol: SpectralTolerance = DEFAULT_TOL) -> FrameBounds:
    """Optimal frame constants of the sequence, optionally restricted.

    Unrestricted, these are the extreme eigenvalues of S.  Restricted to
    D = range(Q) for orthonormal columns Q, they are the extreme
    eigenvalues of Q* S Q, which are exactly the best constants over D.
    """
    s = frame_operator(seq)
    if subspace is None:
        dim = seq.ambient_dim
    else:
        q = _check_orthonormal(subspace)
        s = q.conj().T @ s @ q
        dim = q.shape[1]
    w, _ = eig_hermitian(s, tol)
    lower = max(float(w[0]), 0.0) if w.size else 0.0
    upper = max(float(w[-1]), 0.0) if w.size else 0.0
    return FrameBounds(lower, upper, dim)


def bessel_bound(seq: TruncatedSequence, tol: SpectralTolerance = DEFAULT_TOL) -> float:
    """Optimal Bessel constant at this truncation: lambda_max(S)."""
    return frame_bounds(seq, tol=tol).upper


def canonical_parseval(seq: TruncatedSequence,
                       tol: SpectralTolerance = DEFAULT_TOL) -> TruncatedSequence:
    """Rescale by the pseudo-inverse square root of the frame operator.

    Returns {W f_n} with W = S^(-1/2) on the numerical range of S and zero
    on its kernel.  The output's frame operator equals the orthogonal
    projector onto range(S); when the input is a frame the output has
    bounds (1, 1).
    """
    s = frame_operator(seq)
    w = psd_inverse_sqrt(s, tol)
    return TruncatedSequence(w @ seq.matrix)


def canonical_dual_reconstruct(seq: TruncatedSequence, f, *,
                               tol: SpectralTolerance = DEFAULT_TOL,
                               range_rtol: float = 1e-8) -> np.ndarray:
    """Reconstruct f = sum_n <f, S^+ f_n> f_n for f in range(S).

    Raises OutOfRange when the residual of projecting f onto the numerical
    range of S exceeds range_rtol * ||f||.
    """
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    s = frame_operator(seq)
    proj = range_projector(s, tol)
    resid = float(np.linalg.norm(f - proj @ f))
    scale = float(np.linalg.norm(f))
    if resid > range_rtol * max(scale, 1e-300):
        raise OutOfRange(f"projection residual {resid:.3e} exceeds {range_rtol:.1e} * ||f||")
    s_dag = psd_pinv(s, tol)
    coeffs = analysis_matrix(seq) @ (s_dag @ f)
    return seq.matrix @ coeffs


@dataclass
class ConverterResult:
    """A bounded operator B making {B f_n} a Parseval frame of its span.

    parseval_residual is the spectral norm of (frame operator of {B f_n})
    minus the orthogonal projector onto span{B f_n}; at most 1e-8 on
    success.  The flags are rank statements at rank_tol: surjective means
    rank(B) equals the witness subspace dimension, injective means
    rank(B) equals the ambient dimension.
    """

    operator: np.ndarray
    target_subspace: np.ndarray
    parseval_residual: float
    surjective_flag: bool
    injective_flag: bool
    rank: int
    subspace_dim: int
    restricted_lower_bound: float


def build_converter(seq: TruncatedSequence, subspace: np.ndarray,
                    tol: SpectralTolerance = DEFAULT_TOL,
                    complete_to_injective: bool = False) -> ConverterResult:
    """Construct the converting operator for a witness subspace D.

    With Q an orthonormal basis of D, the restricted analysis matrix is
    A_D = A Q and T = pinv(A_D) maps coefficient space onto D.  The
    converter is B = (T T*)^(1/2) expressed on the ambient space, which
    equals Q (Q* S Q)^(-1/2) Q* and vanishes on the orthogonal complement
    of D.  The restricted lower frame bound must exceed rank_tol
    (relative), otherwise LowerBoundTooSmall is raised.

    With complete_to_injective=True, B is extended by a unit-scale
    isometry carrying the directions orthogonal to span{f_n} (which the
    data never sees) onto directions orthogonal to span{B f_n}.  This
    leaves {B f_n} and the Parseval residual untouched while making B
    injective whenever the witness has full numerical density.
    """
    q = _check_orthonormal(subspace)
    if q.shape[0] != seq.ambient_dim:
        raise NotOrthonormal(
            f"subspace lives in dim {q.shape[0]}, sequence in {seq.ambient_dim}")
    s_res = q.conj().T @ frame_operator(seq) @ q
    w, _ = eig_hermitian(s_res, tol)
    lower = float(w[0]) if w.size else 0.0
    upper = float(w[-1]) if w.size else 0.0
    if lower <= tol.rank_tol * max(upper, 1.0):
        raise LowerBoundTooSmall(
            f"restricted lower bound {lower:.3e} does not clear "
            f"rank_tol * max bound {tol.rank_tol * max(upper, 1.0):.3e}")
    b = q @ psd_inverse_sqrt(s_res, tol) @ q.conj().T

    if complete_to_injective:
        b = b + _injective_completion(b, seq.matrix, tol)

    bf = b @ seq.matrix
    s_b = bf @ bf.conj().T
    proj = range_projector(bf, tol)
    residual = operator_norm(s_b - proj)
    rank_b = numerical_rank(b, tol)
    return ConverterResult(
        operator=b,
        target_subspace=q,
        parseval_residual=residual,
        surjective_flag=rank_b == q.shape[1],
        injective_flag=rank_b == seq.ambient_dim,
        rank=rank_b,
        subspace_dim=q.shape[1],
        restricted_lower_bound=lower,
    )


def _injective_completion(b: np.ndarray, f: np.ndarray,
                          tol: SpectralTolerance) -> np.ndarray:
    """Isometry from span{f_n}-perp onto a complement of span{B f_n}.

    Ranges and domains are taken from deterministic SVD bases, so the
    completion is reproducible.
    """
    s_f, u_f = _full_left(f)
    if s_f.size == 0 or s_f[0] == 0.0:
        r_data = 0
    else:
        r_data = int(np.count_nonzero(s_f > tol.rank_tol * s_f[0]))
    unseen = u_f[:, r_data:]                       # basis of span{f_n}-perp
    if unseen.shape[1] == 0:
        return np.zeros_like(b)
    bf = b @ f
    s_b, u_b = _full_left(bf)
    if s_b.size == 0 or s_b[0] == 0.0:
        r_img = 0
    else:
        r_img = int(np.count_nonzero(s_b > tol.rank_tol * s_b[0]))
    slots = u_b[:, r_img:]                         # complement of span{B f_n}
    m = min(unseen.shape[1], slots.shape[1])
    if m == 0:
        return np.zeros_like(b)
    return slots[:, :m] @ unseen[:, :m].conj().T


def _full_left(m: np.ndarray):
    """Singular values and the full (square) left singular basis of m."""
    u, s, _ = np.linalg.svd(m, full_matrices=True)
    return s, u


def random_coisometry(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    """Random rows-orthonormal matrix (rows x dim), rows <= dim."""
    if rows > dim:
        raise NotOrthonormal(f"co-isometry needs rows <= dim, got {rows} > {dim}")
    g = rng.standard_normal((dim, rows)) + 1j * rng.standard_normal((dim, rows))
    q, _ = np.linalg.qr(g)
    return q[:, :rows].conj().T
