import numpy as np
import pytest

from framelab.classify import (FAILS, HOLDS, INCONCLUSIVE, biorthogonality_check,
                               cfc_verdict, class_flags, extension_domain_probe,
                               perturbation_cfc, riesz_fischer_margin,
                               schauder_norm_criterion, sigma_profile)
from framelab.errors import ConfigError, HypothesisNotAsserted
from framelab.gallery import measure_model, sequence_spec
from framelab.measures import exponential_spec
from framelab.sequences import (SequenceSpec, gen_union, gen_weighted_basis,
                                gen_weighted_parseval_blocks,
                                gen_zero_sum_subspace_basis, generate)

LADDER = [16, 32, 64, 128, 256]


def test_sigma_profile_growing_weights():
    prof = sigma_profile(sequence_spec("weighted-basis-n1"), [16, 32])
    # diagonal weights sorted descending: sigma_k = d + 1 - k
    assert np.allclose(prof.sigmas[0], np.arange(16, 0, -1))
    assert np.allclose(prof.sigmas[1], np.arange(32, 0, -1))


def test_sigma_profile_vanishing_weights():
    prof = sigma_profile(sequence_spec("weighted-basis-inv"), [64])
    assert np.allclose(prof.sigmas[0], 1.0 / np.arange(1, 33))


def test_sigma_profile_orthonormal():
    prof = sigma_profile(sequence_spec("orthonormal"), [16])
    assert np.allclose(prof.sigmas[0], 1.0)


def test_sigma_profile_interlacing_under_nesting():
    # appending vectors (and zero-padded coordinates) never decreases sigma_k
    rng = np.random.default_rng(0)
    for _ in range(50):
        d, n = rng.integers(3, 8), rng.integers(3, 8)
        m = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
        dd, nn = d + rng.integers(1, 4), n + rng.integers(1, 4)
        big = np.zeros((dd, nn), dtype=complex)
        big[:d, :n] = m
        big[:, n:] = rng.standard_normal((dd, nn - n)) + 1j * rng.standard_normal((dd, nn - n))
        s_small = np.linalg.svd(m, compute_uv=False)
        s_big = np.linalg.svd(big, compute_uv=False)
        k = min(len(s_small), len(s_big))
        assert np.all(s_big[:k] >= s_small[:k] - 1e-10)


@pytest.mark.parametrize("name,expected", [
    ("weighted-basis-n1", HOLDS),
    ("weighted-basis-inv", FAILS),
    ("union-weights", HOLDS),
])
def test_cfc_verdict_triple(name, expected):
    prof = sigma_profile(sequence_spec(name), LADDER)
    assert cfc_verdict(prof, 0.5).verdict == expected


def test_cfc_verdict_scale_equivariance():
    spec = sequence_spec("weighted-basis-inv")
    prof = sigma_profile(spec, LADDER)
    scaled = SequenceSpec("perturbed", {"base": spec, "delta": spec, "scale": 2.0})
    prof3 = sigma_profile(scaled, LADDER)  # vectors scaled by 3
    for k in range(len(prof.sigmas[-1])):
        assert abs(prof3.sigmas[-1][k] - 3.0 * prof.sigmas[-1][k]) <= 1e-12
    assert cfc_verdict(prof, 0.5).verdict == cfc_verdict(prof3, 1.5).verdict


def test_cfc_verdict_needs_enough_levels():
    prof = sigma_profile(sequence_spec("orthonormal"), [16, 32])
    with pytest.raises(ConfigError):
        cfc_verdict(prof, 0.5, stability_window=3)


def test_cfc_tie_resolves_to_inconclusive():
    prof = sigma_profile(sequence_spec("orthonormal"), [16, 32, 64])
    assert cfc_verdict(prof, 1.0).verdict == INCONCLUSIVE


def test_riesz_fischer_margins():
    assert riesz_fischer_margin(gen_weighted_basis(("constant", 1.0), 8)) == 1.0
    for d in (8, 16):
        assert abs(riesz_fischer_margin(gen_weighted_basis("n+1", d)) - 1.0) <= 1e-12
    # repeated directions make the Gram singular
    assert riesz_fischer_margin(gen_weighted_parseval_blocks(8)) <= 1e-12


def test_riesz_fischer_margin_nonincreasing_in_count():
    rng = np.random.default_rng(1)
    from framelab.sequences import TruncatedSequence

    m = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    extra = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    small = riesz_fischer_margin(TruncatedSequence(m))
    big = riesz_fischer_margin(TruncatedSequence(np.hstack([m, extra])))
    assert big <= small + 1e-12


def test_class_flags_parseval_blocks():
    rep = class_flags(sequence_spec("parseval-blocks"), [4, 8, 16, 24])
    assert rep.flags["parseval"] == HOLDS
    assert rep.flags["riesz"] == FAILS
    assert rep.flags["riesz_fischer"] == FAILS
    assert rep.flags["frame"] == HOLDS


def test_class_flags_incomplete_injective_witness():
    rep = class_flags(sequence_spec("weighted-basis-n"), LADDER)
    assert rep.flags["lower_semi_frame"] == FAILS
    assert rep.flags["bessel"] == FAILS
    assert rep.flags["cfc"] == HOLDS
    assert rep.flags["icfc_evidence"] == HOLDS
    # the zero-start basis misses exactly one direction at every level
    deficiency = dict(rep.certificates["rank_deficiency"])
    assert all(v == 1 for v in deficiency.values())


def test_class_flags_orthonormal_all_hold():
    rep = class_flags(sequence_spec("orthonormal"), [16, 32, 64])
    for flag in ("bessel", "lower_semi_frame", "frame", "parseval", "riesz",
                 "riesz_fischer", "cfc", "scfc_evidence", "icfc_evidence"):
        assert rep.flags[flag] == HOLDS, flag


def test_class_flags_implications():
    # frame holds only with both half-bounds; parseval only with frame;
    # riesz only with riesz_fischer and bessel
    for name in ("orthonormal", "parseval-blocks", "weighted-basis-n",
                 "weighted-basis-n1", "weighted-basis-inv", "union-weights"):
        rep = class_flags(sequence_spec(name), [16, 32, 64])
        f = rep.flags
        if f["frame"] == HOLDS:
            assert f["bessel"] == HOLDS and f["lower_semi_frame"] == HOLDS
        if f["parseval"] == HOLDS:
            assert f["frame"] == HOLDS
        if f["riesz"] == HOLDS:
            assert f["riesz_fischer"] == HOLDS and f["bessel"] == HOLDS


def test_norm_criterion_requires_hypothesis():
    with pytest.raises(HypothesisNotAsserted):
        schauder_norm_criterion(sequence_spec("orthonormal"), LADDER, hypothesis=None)


@pytest.mark.parametrize("name,cfc_pred,co_pred", [
    ("weighted-basis-n1", HOLDS, HOLDS),
    ("weighted-basis-inv", FAILS, FAILS),
    ("orthonormal", HOLDS, HOLDS),
])
def test_norm_criterion_predictions(name, cfc_pred, co_pred):
    rep = schauder_norm_criterion(sequence_spec(name), LADDER,
                                  hypothesis="unconditional_schauder_basis")
    assert rep.cfc_prediction == cfc_pred
    assert rep.co_prediction == co_pred
    assert rep.agrees


def test_perturbation_trivial_and_half_scale():
    ortho = sequence_spec("orthonormal")
    same = perturbation_cfc(ortho, ortho, 1.0, LADDER[:3])
    assert same.verdict == HOLDS and same.bessel_bound_sup == 0.0
    half = SequenceSpec("perturbed", {"base": ortho, "delta": ortho, "scale": 0.5})
    rep = perturbation_cfc(ortho, half, 1.0, LADDER[:3])
    assert rep.verdict == HOLDS
    assert abs(rep.bessel_bound_sup - 0.25) <= 1e-10
    assert rep.target_cfc == HOLDS


def test_perturbation_criterion_is_only_sufficient():
    ortho = sequence_spec("orthonormal")
    doubled = SequenceSpec("perturbed", {"base": ortho, "delta": ortho, "scale": 1.0})
    rep = perturbation_cfc(ortho, doubled, 1.0, LADDER[:3])
    assert rep.verdict == INCONCLUSIVE  # bound 1 is not below 1
    assert rep.target_cfc == HOLDS      # yet the target remains convertible


def test_biorthogonality_examples():
    ortho = generate(sequence_spec("orthonormal"), 6)
    assert biorthogonality_check(ortho, ortho) == 0.0
    f = generate(sequence_spec("weighted-basis-n1"), 6)
    g = generate(sequence_spec("weighted-basis-inv"), 6)
    assert biorthogonality_check(f, g) <= 1e-14
    pb = generate(sequence_spec("parseval-blocks"), 4)
    assert biorthogonality_check(pb, pb) >= 0.5


def test_extension_probe_zero_sum_candidates():
    cands = gen_zero_sum_subspace_basis(8)
    probe = extension_domain_probe(sequence_spec("weighted-basis-n"),
                                   [16, 32, 64, 128, 256], cands)
    assert all(flag == "summable-evidence" for flag in probe.flags)
    bound = np.pi**2 / 6.0 + 1.0
    ks = np.arange(8, dtype=float)
    for i in range(cands.shape[1]):
        rhs = bound * float(np.sum(ks**2 * np.abs(cands[:, i]) ** 2))
        assert probe.trajectories[i, -1] <= rhs + 1e-9


def test_extension_probe_orthonormal_self():
    probe = extension_domain_probe(sequence_spec("orthonormal"), [16, 32, 64],
                                   np.eye(8, dtype=complex))
    assert np.allclose(probe.trajectories, 1.0)
    assert all(flag == "summable-evidence" for flag in probe.flags)


def test_extension_probe_divergent_grid_spike():
    # point-evaluation candidates against a growing exponential window pick
    # up constant energy per frequency: the trajectory grows linearly
    spec = exponential_spec(measure_model("lebesgue"), realization="grid",
                            grid_points=64)
    e0 = np.zeros((64, 1), dtype=complex)
    e0[0, 0] = 1.0
    probe = extension_domain_probe(spec, [8, 16, 32, 64], e0)
    assert probe.flags == ["divergent"]
    assert probe.trajectories[0, -1] > 3.9 * probe.trajectories[0, -3]


def test_union_margin_vs_sigma_separation():
    # stacked weights keep every sigma_k at least 1 while the Gram margin
    # collapses once the count exceeds the dimension
    spec = sequence_spec("union-weights")
    prof = sigma_profile(spec, [64])
    assert np.all(prof.sigmas[0] >= 1.0 - 1e-12)
    assert riesz_fischer_margin(generate(spec, 64)) <= 1e-10


def test_riesz_subsequences_stay_riesz():
    # principal submatrices of the Gram only tighten the spectrum
    rng = np.random.default_rng(2)
    d = 12
    base = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    base += 5.0 * np.eye(d)  # well-conditioned, hence a Riesz system
    from framelab.sequences import TruncatedSequence

    seq = TruncatedSequence(base)
    w = np.linalg.eigvalsh(base.conj().T @ base)
    lo, hi = w[0], w[-1]
    assert lo > 1e-3
    for _ in range(20):
        size = rng.integers(2, d)
        pick = np.sort(rng.choice(d, size=size, replace=False))
        sub = TruncatedSequence(base[:, pick])
        ws = np.linalg.eigvalsh(sub.matrix.conj().T @ sub.matrix)
        assert ws[0] >= lo * (1 - 1e-9)
        assert ws[-1] <= hi * (1 + 1e-9)


def test_exponential_ladder_lebesgue_is_orthonormal():
    spec = exponential_spec(measure_model("lebesgue"))
    rep = class_flags(spec, [8, 16, 32, 64])
    for flag in ("bessel", "frame", "parseval", "riesz", "cfc"):
        assert rep.flags[flag] == HOLDS


def test_exponential_ladder_mixed_measure_keeps_projection_witness():
    # the density part floors every sigma_k, so the projection-onto-a-
    # closed-subspace evidence holds even with half the mass singular
    spec = exponential_spec(measure_model("mix-cantor3"))
    rep = class_flags(spec, [8, 16, 32, 64])
    assert rep.flags["cfc"] == HOLDS
    assert rep.flags["scfc_evidence"] == HOLDS


def test_ladder_thread_cap_is_deterministic(monkeypatch):
    spec = sequence_spec("union-weights")
    base = sigma_profile(spec, LADDER[:4])
    monkeypatch.setenv("FRAMELAB_THREADS", "4")
    threaded = sigma_profile(spec, LADDER[:4])
    for a, b in zip(base.sigmas, threaded.sigmas):
        assert np.array_equal(a, b)


def test_complete_rf_is_lower_semi_frame():
    # at full rank with a real Gram margin, the frame operator is bounded below
    rng = np.random.default_rng(3)
    for _ in range(10):
        d = int(rng.integers(3, 9))
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        m += 4.0 * np.eye(d)
        from framelab.sequences import TruncatedSequence

        seq = TruncatedSequence(m)
        margin = riesz_fischer_margin(seq)
        rank = np.linalg.matrix_rank(m)
        if rank == d and margin >= 1e-3:
            from framelab.frame_core import frame_bounds

            assert frame_bounds(seq).lower > 0.0
