"""Dense complex spectral kernels.

Hermitian eigendecomposition, singular value decomposition, PSD functional
calculus and Moore-Penrose pseudo-inversion.  LAPACK (via numpy.linalg)
does the factorizations; this module owns validation, ordering and the
numerical-kernel policy:

* eigenvalues are returned ascending, singular values descending;
* a singular value s is treated as zero when s <= rank_tol * s_max
  (rank_tol is relative to the largest singular value);
* singular PSD matrices are inverted on their numerical range and
  annihilated on the numerical kernel (pseudo-inverse convention), so
  conversion statements that only hold on a subspace stay representable.

All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NotHermitian


@dataclass(frozen=True)
class SpectralTolerance:
    """Thresholds for rank decisions and symmetry checks.

    rank_tol is relative to the largest singular value (or eigenvalue
    magnitude) of the matrix at hand; sym_tol is absolute, in max norm.
    Defaults suit double precision at ambient dimensions up to ~2000.
    """

    rank_tol: float = 1e-10
    sym_tol: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.rank_tol) and self.rank_tol > 0):
            raise ValueError("rank_tol must be a positive finite real")
        if not (np.isfinite(self.sym_tol) and self.sym_tol > 0):
            raise ValueError("sym_tol must be a positive finite real")


DEFAULT_TOL = SpectralTolerance()


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-d complex128 array with finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return a


def hermitian_defect(m) -> float:
    """Max-norm distance between m and its conjugate transpose."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def eig_hermitian(m, tol: SpectralTolerance = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues w ascending and unitary v such that
    m = v @ diag(w) @ v.conj().T.  The input is symmetrized before the
    LAPACK call; asymmetry beyond tol.sym_tol raises NotHermitian.
    """
    a = as_matrix(m)
    defect = hermitian_defect(a)
    if defect > tol.sym_tol:
        raise NotHermitian(f"asymmetry {defect:.3e} exceeds sym_tol {tol.sym_tol:.3e}")
    w, v = np.linalg.eigh((a + a.conj().T) / 2.0)
    return w, v


def svd(m):
    """Thin SVD with descending singular values.

    Returns (s, u, v) such that m = u @ diag(s) @ v.conj().T, with u and v
    having orthonormal columns.
    """
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return s, u, vh.conj().T


def numerical_rank(m, tol: SpectralTolerance = DEFAULT_TOL) -> int:
    """Number of singular values above rank_tol * s_max."""
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol * s[0]))


def psd_sqrt(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues inside the numerical kernel (below rank_tol relative to
    the top eigenvalue, including tiny negatives) are mapped to zero.
    """
    w, v = eig_hermitian(m, tol)
    _check_psd(w, tol)
    cut = tol.rank_tol * max(float(w[-1]) if w.size else 0.0, 0.0)
    root = np.where(w > cut, np.sqrt(np.maximum(w, 0.0)), 0.0)
    return (v * root) @ v.conj().T


def psd_inverse_sqrt(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Pseudo-inverse square root of a Hermitian PSD matrix.

    Returns sum over eigenpairs with w_i above the numerical kernel of
    w_i**-0.5 * v_i v_i*, and zero on the kernel.  W = psd_inverse_sqrt(m)
    satisfies W m W = orthogonal projector onto the numerical range of m.
    """
    w, v = eig_hermitian(m, tol)
    _check_psd(w, tol)
    cut = tol.rank_tol * max(float(w[-1]) if w.size else 0.0, 0.0)
    inv_root = np.where(w > cut, 1.0 / np.sqrt(np.where(w > cut, w, 1.0)), 0.0)
    return (v * inv_root) @ v.conj().T


def psd_pinv(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Pseudo-inverse of a Hermitian PSD matrix via eigendecomposition."""
    w, v = eig_hermitian(m, tol)
    _check_psd(w, tol)
    cut = tol.rank_tol * max(float(w[-1]) if w.size else 0.0, 0.0)
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return (v * inv) @ v.conj().T


def _check_psd(w: np.ndarray, tol: SpectralTolerance) -> None:
    if w.size == 0:
        return
    floor = tol.rank_tol * max(1.0, float(np.max(np.abs(w))))
    if w[0] < -floor:
        raise NegativeEigenvalue(
            f"eigenvalue {w[0]:.3e} below -{floor:.3e}; matrix is not PSD"
        )


def pinv(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values s_i <= rank_tol * s_max are treated as zero.  The
    result satisfies all four Penrose identities to ~1e-8 for reasonably
    conditioned inputs.
    """
    a = as_matrix(m)
    s, u, v = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    cut = tol.rank_tol * s[0]
    inv = np.where(s > cut, 1.0 / np.where(s > cut, s, 1.0), 0.0)
    return (v * inv) @ u.conj().T


def range_basis(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical column space of m."""
    a = as_matrix(m)
    s, u, _ = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    keep = s > tol.rank_tol * s[0]
    return u[:, keep]


def range_projector(m, tol: SpectralTolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the numerical column space of m."""
    q = range_basis(m, tol)
    if q.shape[1] == 0:
        return np.zeros((as_matrix(m).shape[0],) * 2, dtype=np.complex128)
    return q @ q.conj().T


def operator_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])
