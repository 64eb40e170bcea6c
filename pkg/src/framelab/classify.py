"""Numeric classification of sequences over truncation ladders.

Asymptotic statements are probed at a ladder of finite levels.  The k-th
largest singular value of the analysis matrix is the best lower frame
bound achievable on any k-dimensional subspace, so uniform-in-k stability
of sigma_k above a threshold across the last ladder levels is the finite
surrogate for "contains an arbitrarily large subspace with a uniform
lower bound".  Every verdict produced here is EVIDENCE at truncation
scale, never a proof; inconclusive runs carry the fitted decay exponent
instead of a bare boolean.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionMismatch, HypothesisNotAsserted, NotOrthonormal
from .frame_core import build_converter, frame_operator, gram_matrix
from .numerics import DEFAULT_TOL, SpectralTolerance
from .sequences import SequenceSpec, TruncatedSequence, generate

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

#: defaults for rendering "infinite-dimensional" at desk scale
DEFAULT_K_MAX = 32
DEFAULT_WINDOW = 3
DEFAULT_TAU = 1e-3
DECAY_EXPONENT_THRESHOLD = 0.1
TIE_REL = 1e-9


def _ladder_workers(n_levels: int) -> int:
    try:
        cap = int(os.environ.get("FRAMELAB_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, min(cap, n_levels))


def _map_levels(fn, dims):
    """Evaluate fn over ladder levels, optionally in parallel; the result
    order follows the ladder, so reports stay deterministic."""
    dims = list(dims)
    workers = _ladder_workers(len(dims))
    if workers == 1:
        return [fn(d) for d in dims]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, dims))


@dataclass
class SigmaProfile:
    """sigma_k of the analysis matrix per ladder level, k = 1..k_max."""

    levels: list            # (d, N) pairs
    sigmas: list            # descending arrays, one per level
    k_max: int

    def rows(self):
        for (d, n), sig in zip(self.levels, self.sigmas):
            for k, val in enumerate(sig, start=1):
                yield d, n, k, float(val)

    def to_csv_text(self) -> str:
        lines = ["level_d,level_N,k,sigma_k"]
        for d, n, k, val in self.rows():
            lines.append(f"{d},{n},{k},{val!r}")
        return "\n".join(lines) + "\n"

    def last_level_sigmas(self) -> np.ndarray:
        return self.sigmas[-1]


def sigma_profile(spec: SequenceSpec, dims, k_max: int = DEFAULT_K_MAX) -> SigmaProfile:
    """Singular value profile of the analysis matrix along a ladder."""
    dims = list(dims)
    if not dims:
        raise ConfigError("ladder must contain at least one level")

    def level(d):
        seq = generate(spec, int(d))
        s = np.linalg.svd(seq.matrix, compute_uv=False)
        return seq.level, s[:k_max].copy()

    results = _map_levels(level, dims)
    return SigmaProfile([lv for lv, _ in results], [s for _, s in results], k_max)


@dataclass
class CfcVerdict:
    """Evidence verdict for frame convertibility, from a sigma profile."""

    verdict: str
    witness_k: tuple            # (1, k) range of stable subspace dimensions
    decay_exponent: float
    tau: float
    label: str = "evidence"
    detail: dict = field(default_factory=dict)


def _fit_decay_exponent(sig: np.ndarray, start: int = 0) -> float:
    """Least-squares slope of -log sigma_k against log k over k > start
    (positive = decay in k)."""
    ks = np.arange(1, sig.size + 1, dtype=float)[start:]
    vals = sig[start:]
    positive = vals > 0
    if np.count_nonzero(positive) < 2:
        return float("inf")  # all tail mass gone: maximal decay
    slope = np.polyfit(np.log(ks[positive]), np.log(vals[positive]), 1)[0]
    return float(-slope)


def cfc_verdict(profile: SigmaProfile, tau: float,
                stability_window: int = DEFAULT_WINDOW,
                decay_threshold: float = DECAY_EXPONENT_THRESHOLD) -> CfcVerdict:
    """Judge the sigma profile against a uniform lower-bound threshold.

    holds: every sigma_k (k <= k_max) stays above tau across the last
    stability_window levels, with no terminal decay in k.
    fails: the tail half of sigma_k at the last level decays in k (fitted
    exponent above decay_threshold) while the deepest tracked sigma_k has
    saturated across levels; the extrapolated infimum over k then drops
    below any positive tau.  A decaying head over a level-growing tail is
    not failure (larger subspaces keep improving as the ladder grows).
    Ties at the tau threshold resolve to inconclusive.
    """
    if len(profile.levels) < stability_window:
        raise ConfigError(
            f"profile has {len(profile.levels)} levels, need >= {stability_window}")
    if tau <= 0:
        raise ConfigError("tau must be positive")
    last = profile.last_level_sigmas()
    exponent_full = _fit_decay_exponent(last)
    exponent_tail = _fit_decay_exponent(last, start=last.size // 2)
    tie = TIE_REL * tau
    window = profile.sigmas[-stability_window:]
    k_avail = min(len(s) for s in window)
    stacked = np.vstack([s[:k_avail] for s in window])
    min_sigma = float(stacked.min()) if stacked.size else 0.0
    deepest = stacked[:, -1] if stacked.size else np.zeros(1)
    saturated = not (float(deepest[-1]) >= 1.2 * max(float(deepest[0]), 1e-300)
                     and deepest[-1] > 0)
    detail = {"min_sigma_window": min_sigma, "k_available": int(k_avail),
              "decay_exponent": exponent_full, "tail_decay_exponent": exponent_tail,
              "deepest_sigma_saturated": saturated}

    if exponent_tail > decay_threshold and saturated:
        verdict = FAILS
        witness = (0, 0)
    elif min_sigma > tau + tie and k_avail >= 1:
        verdict = HOLDS
        witness = (1, k_avail)
    else:
        verdict = INCONCLUSIVE
        stable = np.all(stacked > tau + tie, axis=0) if stacked.size else np.array([])
        k_stable = int(np.max(np.nonzero(stable)[0]) + 1) if np.any(stable) else 0
        witness = (1, k_stable) if k_stable else (0, 0)
    return CfcVerdict(verdict, witness, exponent_tail, float(tau), detail=detail)


def riesz_fischer_margin(seq: TruncatedSequence) -> float:
    """lambda_min of the Gram matrix: the optimal constant A in
    A sum|a_n|^2 <= ||sum a_n f_n||^2 at this truncation."""
    w = np.linalg.eigvalsh(gram_matrix(seq))
    return max(float(w[0]), 0.0) if w.size else 0.0


# ---------------------------------------------------------------------------
# trajectory heuristics
# ---------------------------------------------------------------------------

def _trend(values, window: int) -> str:
    """stable / growing / decaying / zero / mixed over the last `window` points."""
    tail = [float(v) for v in values[-window:]]
    if not tail:
        return "mixed"
    if max(tail) <= 0.0:
        return "zero"
    if min(tail) <= 0.0:
        return "decaying" if tail[-1] <= tail[0] else "mixed"
    ratio = max(tail) / min(tail)
    if ratio <= 1.0 + 1e-3:
        return "stable"
    nondecreasing = all(b >= a for a, b in zip(tail, tail[1:]))
    nonincreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    if nondecreasing and tail[-1] / tail[0] >= 1.2:
        return "growing"
    if nonincreasing and tail[0] / tail[-1] >= 1.2:
        return "decaying"
    return "mixed"


def _bounded_above_verdict(values, window: int) -> str:
    trend = _trend(values, window)
    if trend in ("stable", "decaying", "zero"):
        return HOLDS
    if trend == "growing":
        return FAILS
    return INCONCLUSIVE


def _bounded_below_verdict(values, window: int, tau: float) -> str:
    trend = _trend(values, window)
    tail = [float(v) for v in values[-window:]]
    tie = TIE_REL * tau
    if trend == "zero" or (tail and tail[-1] < tau - tie and trend in ("decaying", "zero")):
        return FAILS
    if tail and min(tail) > tau + tie and trend in ("stable", "growing"):
        return HOLDS
    if tail and tail[-1] <= 0.0:
        return FAILS
    return INCONCLUSIVE


def _combine(*verdicts) -> str:
    if any(v == FAILS for v in verdicts):
        return FAILS
    if all(v == HOLDS for v in verdicts):
        return HOLDS
    return INCONCLUSIVE


# ---------------------------------------------------------------------------
# the full report
# ---------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    """Flags plus the numeric certificates backing each of them."""

    flags: dict
    certificates: dict
    tolerances: dict
    profile: SigmaProfile

    def to_json(self) -> dict:
        return {
            "flags": dict(self.flags),
            "certificates": _jsonable(self.certificates),
            "tolerances": dict(self.tolerances),
            "evidence_note": ("verdicts are truncation-ladder evidence, "
                              "not proofs of asymptotic statements"),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def class_flags(spec: SequenceSpec, dims, *, tau: float = DEFAULT_TAU,
                k_max: int = DEFAULT_K_MAX, stability_window: int = DEFAULT_WINDOW,
                tol: SpectralTolerance = DEFAULT_TOL,
                parseval_tol: float = 1e-8,
                norm_hypothesis: str | None = None) -> ClassificationReport:
    """Evaluate the full flag set for a spec along a ladder."""
    dims = [int(d) for d in dims]
    if not dims:
        raise ConfigError("ladder must contain at least one level")
    window = min(stability_window, len(dims))

    def level(d):
        seq = generate(spec, d)
        s_op = frame_operator(seq)
        w_s = np.linalg.eigvalsh(s_op)
        w_g = np.linalg.eigvalsh(gram_matrix(seq))
        sig = np.linalg.svd(seq.matrix, compute_uv=False)
        rank = int(np.count_nonzero(sig > tol.rank_tol * sig[0])) if sig[0] > 0 else 0
        return {
            "level": seq.level,
            "sigma": sig,
            "s_min": max(float(w_s[0]), 0.0),
            "s_max": float(w_s[-1]),
            "gram_min": max(float(w_g[0]), 0.0),
            "gram_max": float(w_g[-1]),
            "rank": rank,
            "norms": seq.norms(),
        }

    data = _map_levels(level, dims)
    levels = [m["level"] for m in data]
    profile = SigmaProfile(levels, [m["sigma"][:k_max].copy() for m in data], k_max)

    s_min = [m["s_min"] for m in data]
    s_max = [m["s_max"] for m in data]
    gram_min = [m["gram_min"] for m in data]
    gram_max = [m["gram_max"] for m in data]
    deficiency = [lv[0] - m["rank"] for lv, m in zip(levels, data)]

    bessel = _bounded_above_verdict(s_max, window)
    lsf = _bounded_below_verdict(s_min, window, tau)
    frame = _combine(bessel, lsf)
    if frame == HOLDS:
        fb_last = (s_min[-1], s_max[-1])
        on_one = abs(fb_last[0] - 1.0) <= parseval_tol and abs(fb_last[1] - 1.0) <= parseval_tol
        parseval = HOLDS if on_one else FAILS
    else:
        parseval = frame
    rf = _bounded_below_verdict(gram_min, window, tau)
    complete = all(dfc == 0 for dfc in deficiency[-window:])
    riesz = _combine(rf, _bounded_above_verdict(gram_max, window),
                     HOLDS if complete else FAILS)
    cfc = cfc_verdict(profile, tau, window)

    certificates = {
        "lambda_max_frame_op": list(zip([lv[0] for lv in levels], s_max)),
        "lambda_min_frame_op": list(zip([lv[0] for lv in levels], s_min)),
        "gram_lambda_min": list(zip([lv[0] for lv in levels], gram_min)),
        "gram_lambda_max": list(zip([lv[0] for lv in levels], gram_max)),
        "rank_deficiency": list(zip([lv[0] for lv in levels], deficiency)),
        "cfc": {"witness_k": cfc.witness_k, "decay_exponent": cfc.decay_exponent,
                **cfc.detail},
    }

    # converter-backed evidence on the last level
    scfc, icfc = INCONCLUSIVE, INCONCLUSIVE
    if cfc.verdict == FAILS:
        scfc, icfc = FAILS, FAILS
    elif cfc.verdict == HOLDS:
        seq_last = generate(spec, dims[-1])
        sig_last = data[-1]["sigma"]
        stable = int(np.count_nonzero(sig_last > tau))
        # best k-dim witness subspaces are spanned by top eigenvectors of the
        # frame operator, i.e. left singular vectors of F
        u_last, _, _ = np.linalg.svd(seq_last.matrix, full_matrices=False)
        if stable >= 1:
            witness = u_last[:, :stable]
            try:
                conv = build_converter(seq_last, witness, tol)
                scfc = HOLDS if (conv.surjective_flag
                                 and conv.parseval_residual <= 1e-8) else INCONCLUSIVE
                certificates["scfc"] = {
                    "witness_dim": stable,
                    "parseval_residual": conv.parseval_residual,
                    "surjective_flag": conv.surjective_flag,
                }
            except Exception as exc:  # converter could not be built
                scfc = INCONCLUSIVE
                certificates["scfc"] = {"error": f"{type(exc).__name__}: {exc}"}
            ranks_tau = [int(np.count_nonzero(m["sigma"] > tau)) for m in data]
            fracs = [r / lv[0] for r, lv in zip(ranks_tau, levels)]
            dense = _dense_trend(fracs, [lv[0] - r for lv, r in
                                         zip(levels, ranks_tau)], window)
            if dense:
                try:
                    conv_i = build_converter(seq_last, u_last[:, :ranks_tau[-1]],
                                             tol, complete_to_injective=True)
                    icfc = HOLDS if (conv_i.injective_flag
                                     and conv_i.parseval_residual <= 1e-8) else INCONCLUSIVE
                    certificates["icfc"] = {
                        "witness_dim": ranks_tau[-1],
                        "dim_fraction": fracs[-1],
                        "parseval_residual": conv_i.parseval_residual,
                        "injective_flag": conv_i.injective_flag,
                        "rank": conv_i.rank,
                    }
                except Exception as exc:
                    icfc = INCONCLUSIVE
                    certificates["icfc"] = {"error": f"{type(exc).__name__}: {exc}"}
            else:
                icfc = INCONCLUSIVE
                certificates["icfc"] = {"dim_fractions": fracs}

    norm_flag = INCONCLUSIVE
    if norm_hypothesis:
        crit = schauder_norm_criterion(spec, dims, hypothesis=norm_hypothesis,
                                       stability_window=window, tau=tau, k_max=k_max)
        norm_flag = crit.cfc_prediction
        certificates["schauder_norm_criterion"] = {
            "norms_vanish": crit.norms_vanish,
            "norm_decay_exponent": crit.decay_exponent,
            "agrees_with_sigma_profile": crit.agrees,
        }

    flags = {
        "bessel": bessel,
        "lower_semi_frame": lsf,
        "frame": frame,
        "parseval": parseval,
        "riesz": riesz,
        "riesz_fischer": rf,
        "cfc": cfc.verdict,
        "scfc_evidence": scfc,
        "icfc_evidence": icfc,
        "schauder_norm_criterion": norm_flag,
    }
    tolerances = {"tau": tau, "rank_tol": tol.rank_tol, "parseval_tol": parseval_tol,
                  "k_max": k_max, "stability_window": window}
    return ClassificationReport(flags, certificates, tolerances, profile)


def _dense_trend(fractions, deficiencies, window: int) -> bool:
    """Witness dimension fraction heading to 1 with bounded deficiency."""
    fr = fractions[-window:]
    dfc = deficiencies[-window:]
    increasing = all(b >= a for a, b in zip(fr, fr[1:]))
    return increasing and fr[-1] >= 0.9 and dfc[-1] <= max(dfc[0], 1)


# ---------------------------------------------------------------------------
# norm criterion, perturbation test, biorthogonality, extension probe
# ---------------------------------------------------------------------------

@dataclass
class NormCriterionReport:
    """Tail behavior of ||f_n|| against the sigma-profile verdict."""

    norms_vanish: str           # holds = norms tend to zero
    cfc_prediction: str         # holds = criterion predicts convertibility
    co_prediction: str          # holds = criterion predicts inf ||f_n|| > 0
    decay_exponent: float
    tail_min: float
    tail_max: float
    sigma_verdict: str
    agrees: bool


def schauder_norm_criterion(spec: SequenceSpec, dims, *, hypothesis: str | None,
                            stability_window: int = DEFAULT_WINDOW,
                            tau: float = DEFAULT_TAU,
                            k_max: int = DEFAULT_K_MAX) -> NormCriterionReport:
    """Norm-based convertibility criterion for asserted hypothesis classes.

    The caller must assert the hypothesis (unconditional Schauder basis,
    or Bessel with a finite normalized Bessel bound); unconditionality is
    not checkable at truncation.  Under the hypothesis, convertibility
    fails exactly when the norms tend to zero, and a positive infimum of
    the norms upgrades the prediction to orthonormalizability.
    """
    if not hypothesis:
        raise HypothesisNotAsserted(
            "assert the hypothesis class (e.g. 'unconditional_schauder_basis' "
            "or 'bounded_bessel_normalizable') to apply the norm criterion")
    dims = [int(d) for d in dims]
    seq = generate(spec, dims[-1])
    norms = seq.norms()
    tail = norms[len(norms) // 2:]
    nz = tail[tail > 0]
    # fitted exponent of ||f_n|| ~ n^(-p) over the tail
    idx = np.arange(len(norms) // 2, len(norms), dtype=float) + 1.0
    keep = norms[len(norms) // 2:] > 0
    if np.count_nonzero(keep) >= 2:
        slope = np.polyfit(np.log(idx[keep]), np.log(tail[keep]), 1)[0]
        p = float(-slope)
    else:
        p = float("inf")
    vanish = HOLDS if p > DECAY_EXPONENT_THRESHOLD else (
        FAILS if nz.size and float(nz.min()) > 0 and p < DECAY_EXPONENT_THRESHOLD / 2
        else INCONCLUSIVE)
    cfc_pred = {HOLDS: FAILS, FAILS: HOLDS}.get(vanish, INCONCLUSIVE)
    co_pred = HOLDS if (vanish == FAILS and nz.size and float(nz.min()) > tau) else (
        FAILS if vanish == HOLDS else INCONCLUSIVE)
    sigma = cfc_verdict(sigma_profile(spec, dims, k_max), tau,
                        min(stability_window, len(dims)))
    agrees = (cfc_pred == sigma.verdict) or INCONCLUSIVE in (cfc_pred, sigma.verdict)
    return NormCriterionReport(vanish, cfc_pred, co_pred, p,
                               float(tail.min()) if tail.size else 0.0,
                               float(tail.max()) if tail.size else 0.0,
                               sigma.verdict, agrees)


@dataclass
class PerturbationReport:
    """Bessel bound of the difference sequence against 1/||B||^2."""

    verdict: str
    bessel_bound_sup: float
    threshold: float
    per_level: list
    target_cfc: str


def perturbation_cfc(f_spec: SequenceSpec, g_spec: SequenceSpec,
                     converter_norm: float, dims, *, margin: float = 1e-9,
                     tau: float = DEFAULT_TAU,
                     stability_window: int = DEFAULT_WINDOW) -> PerturbationReport:
    """Stability test: if the difference sequence {f_n - g_n} is Bessel
    with bound below 1 / converter_norm^2, convertibility transfers from
    f to g.  The criterion is sufficient, not necessary; the sigma-profile
    verdict of g is attached as a cross-check."""
    if converter_norm <= 0:
        raise ConfigError("converter_norm must be positive")
    dims = [int(d) for d in dims]

    def level(d):
        f = generate(f_spec, d)
        g = generate(g_spec, d)
        if f.matrix.shape != g.matrix.shape:
            raise DimensionMismatch("perturbation test needs matching truncations")
        diff = TruncatedSequence(f.matrix - g.matrix)
        w = np.linalg.eigvalsh(frame_operator(diff))
        return d, float(w[-1])

    per_level = _map_levels(level, dims)
    b_sup = max(v for _, v in per_level)
    threshold = 1.0 / converter_norm**2
    verdict = HOLDS if b_sup < threshold - margin else INCONCLUSIVE
    target = cfc_verdict(sigma_profile(g_spec, dims), tau,
                         min(stability_window, len(dims)))
    return PerturbationReport(verdict, b_sup, threshold, per_level, target.verdict)


def biorthogonality_check(f: TruncatedSequence, g: TruncatedSequence) -> float:
    """max_{n,k} |<f_n, g_k> - delta_{nk}|."""
    if f.matrix.shape != g.matrix.shape:
        raise DimensionMismatch("biorthogonality check needs matching truncations")
    pair = (g.matrix.conj().T @ f.matrix).T  # entry (n, k) = <f_n, g_k>
    return float(np.max(np.abs(pair - np.eye(f.count))))


@dataclass
class ExtensionProbe:
    """Coefficient-energy trajectories of candidate domain vectors."""

    dims: list
    trajectories: np.ndarray    # (candidates, levels)
    flags: list                 # per candidate: summable-evidence / divergent / undetermined


def extension_domain_probe(spec: SequenceSpec, dims, candidates,
                           *, stability_window: int = DEFAULT_WINDOW) -> ExtensionProbe:
    """Track sum_n |<b_i, f_n>|^2 for candidate vectors b_i along the ladder.

    Candidates are orthonormal columns at the first ladder level and are
    zero-padded upward (padding preserves orthonormality).  Stabilizing
    trajectories are summability evidence for the candidate lying in the
    domain of the analysis operator; unbounded growth flags divergence.
    """
    dims = [int(d) for d in dims]
    base = np.asarray(candidates, dtype=np.complex128)
    if base.ndim != 2:
        raise DimensionMismatch("candidates must be a (dim x count) matrix")
    gram = base.conj().T @ base
    if np.max(np.abs(gram - np.eye(base.shape[1]))) > 1e-10:
        raise NotOrthonormal("candidate columns must be orthonormal")

    def level(d):
        seq = generate(spec, d)
        dim = seq.ambient_dim
        if dim < base.shape[0]:
            raise DimensionMismatch(
                f"level dim {dim} smaller than candidate dim {base.shape[0]}")
        padded = np.zeros((dim, base.shape[1]), dtype=np.complex128)
        padded[:base.shape[0], :] = base
        pair = seq.matrix.conj().T @ padded   # (N, candidates): row n = <b_i, f_n>
        return np.sum(np.abs(pair) ** 2, axis=0)

    table = np.column_stack(_map_levels(level, dims))
    window = min(stability_window, len(dims))
    flags = []
    for traj in table:
        tail = traj[-window:]
        increments = np.diff(tail) / np.maximum(tail[1:], 1e-300)
        if np.all(np.abs(increments) < 1e-6):
            flags.append("summable-evidence")
        else:
            logs = np.log(np.maximum(traj, 1e-300))
            rate = np.polyfit(np.log(dims), logs, 1)[0] if len(dims) >= 2 else 0.0
            if rate > 0.1 and np.any(increments >= 1e-3):
                flags.append("divergent")
            else:
                flags.append("undetermined")
    return ExtensionProbe(dims, table, flags)
