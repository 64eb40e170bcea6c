"""Kaczmarz iteration over exponential systems in L2(mu).

Everything runs in coefficient space over a one-sided window [0, W]: an
element f = sum c_n exp(2 pi i n x) is its coefficient vector c, and the
Gram matrix G[n, m] = mu_hat(n - m) is the inner-product kernel.  This is
the only faithful representation when mu is singular.

The auxiliary sequence g_0 = phi_0, g_n = phi_n - sum_{j<n} <phi_n,
phi_j> g_j satisfies x_n = sum_{i<=n} <f, g_i> phi_i for the Kaczmarz
iterates x_n, which also gives the exact defect identity
||f - x_n||^2 = ||f||^2 - sum_{i<=n} |<f, g_i>|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NotUnitVector
from .measures import MeasureModel, gram_exponentials


def window_gram(model: MeasureModel, dim: int) -> np.ndarray:
    """Gram of {exp(2 pi i n x)} over the one-sided window [0, dim-1]."""
    return gram_exponentials(model, (0, dim - 1), max_size=max(dim, 513))


def mu_inner(gram: np.ndarray, u: np.ndarray, v: np.ndarray) -> complex:
    """<u, v> in L2(mu) for coefficient vectors u, v."""
    return complex(v.conj() @ (gram @ u))


def mu_norm(gram: np.ndarray, u: np.ndarray) -> float:
    return float(np.sqrt(max((u.conj() @ (gram @ u)).real, 0.0)))


@dataclass
class KaczmarzState:
    """Iteration state: completed steps, current iterate, raw error history
    (per-step monotonicity is not asserted)."""

    step: int
    x: np.ndarray
    errors: list


def new_state(dim: int) -> KaczmarzState:
    return KaczmarzState(0, np.zeros(dim, dtype=np.complex128), [])


def kaczmarz_step(model: MeasureModel, state: KaczmarzState, f, phi,
                  gram: np.ndarray | None = None) -> KaczmarzState:
    """One projection update x <- x + <f - x, phi> phi in L2(mu).

    phi must be unit-norm in L2(mu) within 1e-10 (exponentials under a
    probability measure are automatically unit).
    """
    f = np.asarray(f, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128)
    if gram is None:
        gram = window_gram(model, f.size)
    nrm = mu_norm(gram, phi)
    if abs(nrm - 1.0) > 1e-10:
        raise NotUnitVector(f"||phi|| = {nrm!r} in L2(mu), expected 1")
    coef = mu_inner(gram, f - state.x, phi)
    x = state.x + coef * phi
    return KaczmarzState(state.step + 1, x, state.errors + [mu_norm(gram, f - x)])


def kaczmarz_run(model: MeasureModel, f, indices,
                 gram: np.ndarray | None = None) -> KaczmarzState:
    """Iterate steps with phi = exp(2 pi i n x) for n in `indices`."""
    f = np.asarray(f, dtype=np.complex128)
    if gram is None:
        gram = window_gram(model, f.size)
    state = new_state(f.size)
    for n in indices:
        n = int(n)
        if not 0 <= n < f.size:
            raise ConfigError(f"step index {n} outside window [0, {f.size - 1}]")
        phi = np.zeros(f.size, dtype=np.complex128)
        phi[n] = 1.0
        state = kaczmarz_step(model, state, f, phi, gram)
    return state


@dataclass
class AuxiliarySequence:
    """Auxiliary vectors g_0..g_{count-1} as columns, in coefficient space."""

    vectors: np.ndarray
    gram: np.ndarray
    identity_residual: float     # worst verification mismatch, see below

    @property
    def count(self) -> int:
        return self.vectors.shape[1]

    def pair_coefficients(self, f) -> np.ndarray:
        """<f, g_i> for i = 0..count-1; these are the reconstruction weights."""
        f = np.asarray(f, dtype=np.complex128)
        return self.vectors.conj().T @ (self.gram @ f)


def auxiliary_sequence(model: MeasureModel, count: int,
                       gram: np.ndarray | None = None,
                       verify: int = 10, seed: int = 0,
                       verify_rtol: float = 1e-8) -> AuxiliarySequence:
    """Build g_0 = phi_0, g_n = phi_n - sum_{j<n} <phi_n, phi_j> g_j.

    The construction is verified against `verify` seeded random f: the
    Kaczmarz iterate after steps 0..count-1 must match
    sum_i <f, g_i> phi_i within verify_rtol.
    """
    if count < 1:
        raise ConfigError("auxiliary sequence needs count >= 1")
    if gram is None:
        gram = window_gram(model, count)
    dim = gram.shape[0]
    if dim < count:
        raise ConfigError(f"gram of size {dim} cannot host {count} auxiliary vectors")
    g = np.zeros((dim, count), dtype=np.complex128)
    g[0, 0] = 1.0
    for n in range(1, count):
        g[n, n] = 1.0
        # <phi_n, phi_j> = G[j, n] for j < n
        g[:, n] -= g[:, :n] @ gram[:n, n]
    aux = AuxiliarySequence(g, gram, 0.0)

    worst = 0.0
    if verify > 0:
        rng = np.random.default_rng(seed)
        for _ in range(verify):
            f = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            state = kaczmarz_run(model, f, range(count), gram)
            recon = np.zeros(dim, dtype=np.complex128)
            recon[:count] = aux.pair_coefficients(f)
            mismatch = float(np.linalg.norm(state.x - recon))
            worst = max(worst, mismatch / max(float(np.linalg.norm(f)), 1e-300))
        if worst > verify_rtol:
            raise ArithmeticError(
                f"auxiliary sequence failed its defining identity: {worst:.3e}")
    aux.identity_residual = worst
    return aux


def herr_weber_reconstruct(model: MeasureModel, f, n: int,
                           aux: AuxiliarySequence | None = None,
                           gram: np.ndarray | None = None):
    """Reconstruct f from sum_{i<=n} <f, g_i> phi_i; returns (approximation,
    residual in L2(mu))."""
    f = np.asarray(f, dtype=np.complex128)
    if aux is None:
        aux = auxiliary_sequence(model, n + 1, gram=gram, verify=0)
    if n + 1 > aux.count:
        raise ConfigError(f"auxiliary sequence has {aux.count} terms, need {n + 1}")
    weights = aux.pair_coefficients(f)[:n + 1]
    approx = np.zeros_like(f)
    approx[:n + 1] = weights
    return approx, mu_norm(aux.gram, f - approx)


def parseval_defect(aux: AuxiliarySequence, f, n: int) -> float:
    """||f||^2 - sum_{i<=n} |<f, g_i>|^2 (nonnegative for these g)."""
    f = np.asarray(f, dtype=np.complex128)
    weights = aux.pair_coefficients(f)[:n + 1]
    return float(mu_norm(aux.gram, f) ** 2 - np.sum(np.abs(weights) ** 2))
