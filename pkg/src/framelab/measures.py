"""Borel probability measures on [0,1) and their exponential systems.

A MeasureModel is an absolutely continuous density (affine, constant, or
piecewise-linear grid), plus point atoms, plus a self-similar Cantor-type
part, with total mass one.  Fourier coefficients mu_hat(k) = integral of
exp(-2 pi i k x) d mu are available in closed form for the density and
atom parts and through the self-similarity product for the Cantor part.

Singular parts are never discretized pointwise: exponential systems over
such measures live in coefficient space, where the Gram matrix
G[n, m] = mu_hat(n - m) is the exact inner-product kernel.

A caveat on scope: no finite truncation can exhibit the non-existence of
a closable converting operator over a singular measure; every finite
Gram section looks healthy.  The divergence probe below supplies the
circumstantial counter-evidence (one-sided coefficient energy growing
without bound), and that is all a desk-scale computation can offer.

The Cantor coefficient product is truncated once the rescaled frequency
|k| * ratio^L drops below CANTOR_TAIL_CUT; the remaining factor is
approximated by exp(-2 pi i xi * m1) with m1 the exact mean of the
normalized Cantor measure.  The truncation error is then bounded by
(2 pi |k| ratio^L)^2 * var / 2, below 2e-11 at the default cut.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QuadratureUnderflow, UnsupportedRealization
from .numerics import DEFAULT_TOL, SpectralTolerance, psd_sqrt
from .sequences import SequenceSpec, TruncatedSequence

MASS_TOL = 1e-8
CANTOR_TAIL_CUT = 1e-6
MAX_GRAM_WINDOW = 513


@dataclass(frozen=True)
class AffineDensity:
    """g(x) = a + b x on [0,1)."""

    a: float
    b: float

    def mass(self) -> float:
        return self.a + self.b / 2.0

    def bounds(self):
        return (min(self.a, self.a + self.b), max(self.a, self.a + self.b))

    def values(self, xs: np.ndarray) -> np.ndarray:
        return self.a + self.b * xs

    def to_json(self) -> dict:
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ConstantDensity:
    """g(x) = c on [0,1)."""

    c: float

    def mass(self) -> float:
        return self.c

    def bounds(self):
        return (self.c, self.c)

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.full_like(xs, self.c, dtype=float)

    def to_json(self) -> dict:
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class GridDensity:
    """Piecewise-linear density through the nodes (xs, gs), xs[0]=0, xs[-1]=1."""

    xs: tuple
    gs: tuple

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        gs = tuple(float(g) for g in self.gs)
        if len(xs) != len(gs) or len(xs) < 2:
            raise ConfigError("grid density needs matching xs/gs with >= 2 nodes")
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ConfigError("grid density nodes must start at 0 and end at 1")
        if any(x1 <= x0 for x0, x1 in zip(xs, xs[1:])):
            raise ConfigError("grid density nodes must be strictly increasing")
        if any((not math.isfinite(g)) or g < 0 for g in gs):
            raise ConfigError("grid density values must be finite and nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "gs", gs)

    def mass(self) -> float:
        xs, gs = np.asarray(self.xs), np.asarray(self.gs)
        return float(np.sum((gs[:-1] + gs[1:]) / 2.0 * np.diff(xs)))

    def bounds(self):
        return (min(self.gs), max(self.gs))

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.interp(xs, self.xs, self.gs)

    def to_json(self) -> dict:
        return {"kind": "grid", "xs": list(self.xs), "gs": list(self.gs)}


@dataclass(frozen=True)
class CantorPart:
    """Self-similar measure for the IFS x -> ratio * x + digit, equal branch
    weights, carrying total mass `mass`."""

    ratio: float
    digits: tuple
    mass: float

    def __post_init__(self):
        digits = tuple(float(t) for t in self.digits)
        if not (0.0 < self.ratio <= 0.5):
            raise ConfigError("cantor ratio must lie in (0, 1/2]")
        if len(digits) < 2:
            raise ConfigError("cantor part needs at least two digit offsets")
        if any(t < 0.0 or t > 1.0 - self.ratio + 1e-15 for t in digits):
            raise ConfigError("cantor digits must lie in [0, 1 - ratio]")
        if self.mass < 0:
            raise ConfigError("cantor mass must be nonnegative")
        object.__setattr__(self, "digits", digits)

    def mean(self) -> float:
        # E[x] = E[digit] / (1 - ratio) for the normalized measure
        return float(np.mean(self.digits)) / (1.0 - self.ratio)

    def to_json(self) -> dict:
        return {"ratio": self.ratio, "digits": list(self.digits), "mass": self.mass}


@dataclass(frozen=True)
class MeasureModel:
    """density + atoms + Cantor part; total mass must be 1 within 1e-8."""

    density: AffineDensity | ConstantDensity | GridDensity | None = None
    atoms: tuple = ()
    cantor: CantorPart | None = None

    def __post_init__(self):
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        for x, w in atoms:
            if not (0.0 <= x < 1.0):
                raise ConfigError(f"atom location {x} outside [0, 1)")
            if w <= 0:
                raise ConfigError("atom weights must be positive")
        object.__setattr__(self, "atoms", atoms)
        total = self.total_mass()
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigError(f"total mass {total!r} differs from 1 beyond {MASS_TOL}")

    def total_mass(self) -> float:
        total = self.density.mass() if self.density is not None else 0.0
        total += sum(w for _, w in self.atoms)
        if self.cantor is not None:
            total += self.cantor.mass
        return float(total)

    def singular_mass(self) -> float:
        mass = sum(w for _, w in self.atoms)
        if self.cantor is not None:
            mass += self.cantor.mass
        return float(mass)

    def is_purely_singular(self) -> bool:
        return self.density is None and self.cantor is not None and not self.atoms

    def density_bounds(self):
        """Essential inf/sup of the absolutely continuous part on [0,1)."""
        if self.density is None:
            return (0.0, 0.0)
        return self.density.bounds()

    def to_json(self) -> dict:
        return {
            "density": self.density.to_json() if self.density is not None else None,
            "atoms": [{"x": x, "w": w} for x, w in self.atoms],
            "cantor": self.cantor.to_json() if self.cantor is not None else None,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MeasureModel":
        if not isinstance(doc, dict):
            raise ConfigError("measure document must be a JSON object")
        density = None
        dd = doc.get("density")
        if dd is not None:
            kind = dd.get("kind")
            if kind == "affine":
                density = AffineDensity(float(dd["a"]), float(dd["b"]))
            elif kind == "constant":
                density = ConstantDensity(float(dd["c"]))
            elif kind == "grid":
                density = GridDensity(tuple(dd["xs"]), tuple(dd["gs"]))
            else:
                raise ConfigError(f"unknown density kind {kind!r}")
        atoms = tuple((a["x"], a["w"]) for a in doc.get("atoms", []) or [])
        cantor = None
        cd = doc.get("cantor")
        if cd is not None:
            cantor = CantorPart(float(cd["ratio"]), tuple(cd["digits"]), float(cd["mass"]))
        return cls(density, atoms, cantor)


# ---------------------------------------------------------------------------
# Fourier coefficients
# ---------------------------------------------------------------------------

_COEFF_CACHE: dict = {}
_COEFF_LOCK = threading.Lock()


def _density_coefficients(density, ks: np.ndarray) -> np.ndarray:
    out = np.zeros(ks.shape, dtype=np.complex128)
    if density is None:
        return out
    zero = ks == 0
    out[zero] = density.mass()
    nz = ~zero
    if not np.any(nz):
        return out
    k = ks[nz].astype(float)
    if isinstance(density, ConstantDensity):
        # integer frequencies integrate a full period to zero
        out[nz] = 0.0
    elif isinstance(density, AffineDensity):
        out[nz] = density.b * 1j / (2.0 * np.pi * k)
    elif isinstance(density, GridDensity):
        out[nz] = _grid_coefficients(density, k)
    else:
        raise ConfigError(f"unknown density type {type(density).__name__}")
    return out


def _grid_coefficients(density: GridDensity, k: np.ndarray) -> np.ndarray:
    """Segment-exact integral of the piecewise-linear density against
    exp(-2 pi i k x); no quadrature error enters the model."""
    xs = np.asarray(density.xs)
    gs = np.asarray(density.gs)
    c = -2j * np.pi * k[:, None]                      # (K, 1)
    x0, x1 = xs[:-1][None, :], xs[1:][None, :]        # (1, S)
    g0, g1 = gs[:-1][None, :], gs[1:][None, :]
    slope = (g1 - g0) / (x1 - x0)
    e1 = np.exp(c * x1)
    e0 = np.exp(c * x0)
    seg = e1 * (g1 / c - slope / c**2) - e0 * (g0 / c - slope / c**2)
    total = seg.sum(axis=1)
    if not np.all(np.isfinite(total)):
        raise QuadratureUnderflow("grid density integral produced non-finite values")
    return total


def _atom_coefficients(atoms, ks: np.ndarray) -> np.ndarray:
    out = np.zeros(ks.shape, dtype=np.complex128)
    for x, w in atoms:
        out += w * np.exp(-2j * np.pi * ks * x)
    return out


def cantor_depth(part: CantorPart, k_abs_max: float, cut: float = CANTOR_TAIL_CUT) -> int:
    """Smallest L with k_abs_max * ratio^L <= cut."""
    if k_abs_max <= cut:
        return 0
    return int(math.ceil(math.log(k_abs_max / cut) / math.log(1.0 / part.ratio)))


def _cantor_coefficients(part: CantorPart, ks: np.ndarray,
                         cut: float = CANTOR_TAIL_CUT) -> np.ndarray:
    """Normalized Cantor coefficients via the self-similarity product."""
    xi = ks.astype(float)
    out = np.ones(xi.shape, dtype=np.complex128)
    digits = np.asarray(part.digits)
    depth = cantor_depth(part, float(np.max(np.abs(xi))) if xi.size else 0.0, cut)
    for _ in range(depth):
        out *= np.exp(-2j * np.pi * np.multiply.outer(xi, digits)).mean(axis=-1)
        xi = xi * part.ratio
    out *= np.exp(-2j * np.pi * xi * part.mean())
    return out


def fourier_coefficients(model: MeasureModel, ks) -> np.ndarray:
    """Vectorized mu_hat over an array of integer frequencies."""
    ks = np.atleast_1d(np.asarray(ks))
    if not np.issubdtype(ks.dtype, np.integer):
        raise ConfigError("frequencies must be integers")
    out = np.empty(ks.shape, dtype=np.complex128)
    missing = []
    with _COEFF_LOCK:
        for idx, k in np.ndenumerate(ks):
            val = _COEFF_CACHE.get((model, int(k)))
            if val is None:
                missing.append((idx, int(k)))
            else:
                out[idx] = val
    if missing:
        kvals = np.asarray([k for _, k in missing])
        vals = _density_coefficients(model.density, kvals)
        vals += _atom_coefficients(model.atoms, kvals)
        if model.cantor is not None and model.cantor.mass > 0:
            vals += model.cantor.mass * _cantor_coefficients(model.cantor, kvals)
        with _COEFF_LOCK:
            for (idx, k), v in zip(missing, vals):
                _COEFF_CACHE[(model, k)] = complex(v)
                out[idx] = v
    return out


def fourier_coefficient(model: MeasureModel, k: int) -> complex:
    """mu_hat(k) = integral of exp(-2 pi i k x) d mu(x)."""
    return complex(fourier_coefficients(model, np.asarray([int(k)]))[0])


# ---------------------------------------------------------------------------
# exponential systems
# ---------------------------------------------------------------------------

def _check_window(window) -> tuple:
    try:
        n_min, n_max = int(window[0]), int(window[1])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"window must be an integer pair, got {window!r}") from None
    if n_min > n_max:
        raise ConfigError(f"window must satisfy n_min <= n_max, got {window!r}")
    return n_min, n_max


def gram_exponentials(model: MeasureModel, window,
                      max_size: int = MAX_GRAM_WINDOW) -> np.ndarray:
    """Gram matrix of {exp(2 pi i n x)} over the window in L2(mu).

    G[n, m] = <e_m, e_n> = mu_hat(n - m): Hermitian Toeplitz, PSD up to
    the Cantor tail truncation.  Negative frequencies are filled by
    conjugate symmetry so the matrix is exactly Hermitian.
    """
    n_min, n_max = _check_window(window)
    size = n_max - n_min + 1
    if size > max_size:
        raise ConfigError(f"window size {size} exceeds the configured max {max_size}")
    pos = fourier_coefficients(model, np.arange(size))
    full = np.concatenate([np.conj(pos[1:][::-1]), pos])  # index k + size - 1
    idx = np.subtract.outer(np.arange(size), np.arange(size)) + size - 1
    return full[idx]


def exp_system_as_sequence(model: MeasureModel, window,
                           realization: str = "coefficient_space",
                           grid_points: int | None = None,
                           tol: SpectralTolerance = DEFAULT_TOL) -> TruncatedSequence:
    """Realize the exponential system over a window as a vector sequence.

    coefficient_space: columns of G^(1/2); standard inner products then
    reproduce the L2(mu) pairings exactly (up to the Gram tail).  Works
    for any measure, singular included.

    grid(M): midpoint samples v_n[j] = exp(2 pi i n x_j) sqrt(g(x_j)/M),
    valid only for density-only measures; standard inner products
    approximate the L2(mu) pairings with O(1/M^2) error for smooth
    integrands.
    """
    n_min, n_max = _check_window(window)
    ns = np.arange(n_min, n_max + 1)
    if realization == "coefficient_space":
        gram = gram_exponentials(model, window)
        root = psd_sqrt(gram, tol)
        return TruncatedSequence(root)
    if realization == "grid":
        if model.atoms or (model.cantor is not None and model.cantor.mass > 0):
            raise UnsupportedRealization(
                "grid realization requires a density-only measure")
        if model.density is None:
            raise UnsupportedRealization("grid realization needs a density part")
        if not grid_points or grid_points < 2:
            raise ConfigError("grid realization needs grid_points >= 2")
        m = int(grid_points)
        xs = (np.arange(m) + 0.5) / m
        weights = np.sqrt(model.density.values(xs) / m)
        mat = np.exp(2j * np.pi * np.outer(xs, ns)) * weights[:, None]
        return TruncatedSequence(mat)
    raise UnsupportedRealization(f"unknown realization {realization!r}")


def embed_on_grid(model: MeasureModel, values: np.ndarray,
                  grid_points: int) -> np.ndarray:
    """Isometric embedding u[j] = f(x_j) sqrt(g(x_j)/M) matching the grid
    realization, for density-only measures."""
    if model.density is None:
        raise UnsupportedRealization("grid embedding needs a density part")
    m = int(grid_points)
    xs = (np.arange(m) + 0.5) / m
    return np.asarray(values, dtype=np.complex128) * np.sqrt(model.density.values(xs) / m)


# ---------------------------------------------------------------------------
# density criteria and the divergence probe
# ---------------------------------------------------------------------------

@dataclass
class DensityCriteria:
    """Verdicts tied to the declared measure parts, with numeric backup."""

    rf: str
    sco: str
    ico: str
    g_inf: float
    g_sup: float
    singular_mass: float
    spectrum_table: list   # rows (window_size, lambda_min, lambda_max)


def density_criteria(model: MeasureModel, window_sizes=(17, 33, 65)) -> DensityCriteria:
    """Classify the exponential system over symmetric windows.

    Analytically (from the declared parts): the system is Riesz-Fischer
    iff the density is bounded below; it is orthonormalizable through a
    surjection iff the density is bounded above and below; adding
    injectivity additionally requires a vanishing singular part.  Gram
    spectra over growing windows are attached as numeric certificates.
    """
    g_inf, g_sup = model.density_bounds()
    singular = model.singular_mass()
    rf = "holds" if g_inf > 0 else "fails"
    sco = "holds" if (g_inf > 0 and math.isfinite(g_sup)) else "fails"
    ico = "holds" if (g_inf > 0 and singular <= MASS_TOL) else "fails"
    table = []
    for size in window_sizes:
        half = (int(size) - 1) // 2
        gram = gram_exponentials(model, (-half, half))
        w = np.linalg.eigvalsh(gram)
        table.append((2 * half + 1, float(w[0]), float(w[-1])))
    return DensityCriteria(rf, sco, ico, float(g_inf), float(g_sup),
                           float(singular), table)


@dataclass
class DivergenceTable:
    """Partial sums T(M) = sum_{n<=M} |<f, e_n>|^2 and a divergence flag."""

    ms: np.ndarray
    partial_sums: np.ndarray
    divergent: bool

    def value_at(self, m: int) -> float:
        return float(self.partial_sums[int(m)])


def singular_divergence_probe(model: MeasureModel, coefficients, window,
                              n_max: int, allow_mixed: bool = False) -> DivergenceTable:
    """Track the one-sided coefficient energy of f against the exponentials.

    f is given by its coefficients over `window`; inner products are taken
    through the Fourier coefficients, so singular measures are handled
    exactly.  The table is flagged divergent when the relative increment
    over the last decade of M is at least 1e-3.
    """
    if not model.is_purely_singular() and not allow_mixed:
        raise UnsupportedRealization(
            "divergence probe expects a purely Cantor measure; "
            "pass allow_mixed=True to accept a mixed interpretation")
    n_min, n_hi = _check_window(window)
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if c.size != n_hi - n_min + 1:
        raise ConfigError(
            f"got {c.size} coefficients for a window of size {n_hi - n_min + 1}")
    n_max = int(n_max)
    # <f, e_n> = sum_m c_m mu_hat(n - m), n = 0..n_max
    ks = np.arange(-n_hi, n_max - n_min + 1)
    coeffs = fourier_coefficients(model, ks)
    offset = n_hi
    m_idx = np.arange(n_min, n_hi + 1)
    idx = offset + np.arange(n_max + 1)[:, None] - m_idx[None, :]
    pair = coeffs[idx] @ c
    sums = np.cumsum(np.abs(pair) ** 2)
    last_decade = max(n_max // 10, 1)
    base = sums[n_max - last_decade]
    divergent = bool(sums[n_max] - base >= 1e-3 * max(base, 1e-300))
    return DivergenceTable(np.arange(n_max + 1), sums, divergent)


def exponential_spec(model: MeasureModel, window=None,
                     realization: str = "coefficient_space",
                     grid_points: int | None = None,
                     n_min: int = 0) -> SequenceSpec:
    """SequenceSpec for an exponential system (window=None grows with the
    ladder level as [n_min, n_min + d - 1])."""
    params = {"measure": model, "realization": realization, "n_min": int(n_min)}
    if window is not None:
        params["window"] = [int(window[0]), int(window[1])]
    if grid_points is not None:
        params["grid_points"] = int(grid_points)
    return SequenceSpec("exponential", params)
