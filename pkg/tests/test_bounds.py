import math

import mpmath
import numpy as np
import pytest

from tlbounds import bounds
from tlbounds.bounds import (BoundReport, complexity_terms, lemma1_rhs, thm1_rhs, thm2_alpha_grid, thm2_rhs,
                             thm3_rhs, thm4_rhs, thm5_rhs, thm7_concentration_coef, thm7_rhs)
from tlbounds.divergence import SQUARED, ZERO_ONE
from tlbounds.domains import DiscreteDomain, expected_risk, mixture_domain, sample_labeled, sample_unlabeled
from tlbounds.erm import WeightedRiskSpec, erm, lambda_alpha, lambda_alpha_mu, lambda_joint
from tlbounds.errors import PreconditionError
from tlbounds.hypothesis import Hypothesis, make_finite_class, make_threshold_class

from conftest import random_domain, random_ground


def test_vc_term_a_high_precision():
    mpmath.mp.dps = 50
    d, m, delta = 1, 100, mpmath.mpf("0.1")
    exact = mpmath.sqrt(4 * (d * mpmath.log(2 * mpmath.e * m / d) + mpmath.log(4 / delta)) / m)
    assert complexity_terms("A", 100, 1, 0.1) == pytest.approx(float(exact), rel=1e-12)


def test_vc_term_b_and_c_high_precision():
    mpmath.mp.dps = 50
    m, d, delta = 250, 3, mpmath.mpf("0.05")
    b = mpmath.sqrt((d * mpmath.log(2 * m) - mpmath.log(delta)) / (2 * m))
    c = 4 * mpmath.sqrt((2 * d * mpmath.log(2 * m) + mpmath.log(4 / delta)) / m)
    assert complexity_terms("B", m, d, 0.05) == pytest.approx(float(b), rel=1e-12)
    assert complexity_terms("C", m, d, 0.05) == pytest.approx(float(c), rel=1e-12)


def test_term_b_delta_to_one():
    v = complexity_terms("B", 100, 2, 1 - 1e-12)
    assert v == pytest.approx(math.sqrt(2 * math.log(200) / 200), rel=1e-9) and v > 0


@pytest.mark.parametrize("kind", "ABC")
def test_terms_decrease_in_m(kind):
    vals = [complexity_terms(kind, m, 2, 0.1) for m in (50, 100, 200, 400, 800, 1600)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("args", [(100, 1, 0.0), (100, 1, 1.0), (0, 1, 0.1), (100, 0, 0.1)])
def test_term_errors(args):
    with pytest.raises(PreconditionError):
        complexity_terms("B", *args)


def test_term_a_domain_error():
    with pytest.raises(PreconditionError):
        complexity_terms("A", 1, 10, 0.1)


def test_report_recomposes_and_serializes():
    r = BoundReport("1", {"a": 0.1, "b": 0.2}, 0.25, {"m": 3})
    assert r.rhs_total == pytest.approx(0.3) and r.holds
    assert BoundReport("1", {"a": 0.1}, 0.2).holds is False
    assert BoundReport("1", {"a": 0.1}).holds is None
    lines = r.to_csv_row(header=True).splitlines()
    assert lines[0].split(",")[:5] == ["theorem_id", "a", "b", "rhs_total", "lhs_realized"]


def _setup(rng, n=8):
    g = random_ground(rng, n)
    return g, make_threshold_class(g)


def test_lemma1_equal_domains(rng):
    g, H = _setup(rng)
    D = random_domain(rng, g)
    r = lemma1_rhs(H, H[2], D, D)
    assert r.terms["half_divergence"] == 0.0 and r.terms["lambda"] >= 0 and r.holds


def test_lemma1_random_and_argmin(rng):
    for _ in range(100):
        g, H = _setup(rng, int(rng.integers(2, 12)))
        D_S, D_T = random_domain(rng, g, bool(rng.integers(2))), random_domain(rng, g, bool(rng.integers(2)))
        for i in rng.integers(0, H.size, 3):
            assert lemma1_rhs(H, H[int(i)], D_S, D_T).holds
        lam, h_star = lambda_joint(H, D_S, D_T)
        r = lemma1_rhs(H, h_star, D_S, D_T)
        assert r.lhs_realized <= expected_risk(D_S, h_star) + r.terms["half_divergence"] + lam + 1e-12


def test_lemma1_rejects_nonmember(rng):
    g, H = _setup(rng, 4)
    D = random_domain(rng, g)
    with pytest.raises(PreconditionError):
        lemma1_rhs(H, Hypothesis(g, [1, 0, 1, 0]), D, D)


def test_thm1_terms_and_delta_monotone(rng):
    g, H = _setup(rng)
    D_S, D_T = random_domain(rng, g), random_domain(rng, g)
    S = sample_labeled(D_S, 100, 1)
    U_S, U_T = sample_unlabeled(D_S, 200, 2), sample_unlabeled(D_T, 200, 3)
    h = erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis
    lam = lambda_joint(H, D_S, D_T)[0]
    r1 = thm1_rhs(H, h, S, U_S, U_T, 0.1, lam, D_T)
    r2 = thm1_rhs(H, h, S, U_S, U_T, 0.01, lam, D_T)
    assert list(r1.terms) == ["emp_source_risk", "vc_term_A", "half_emp_divergence", "unlabeled_term_C", "lambda"]
    assert r2.rhs_total > r1.rhs_total
    with pytest.raises(PreconditionError):
        thm1_rhs(H, h, S, U_S, sample_unlabeled(D_T, 100, 3), 0.1, lam)


def test_thm1_identical_domains_large_samples(rng):
    g, H = _setup(rng, 6)
    D = DiscreteDomain(g, rng.dirichlet(np.ones(6)), H[3])
    S = sample_labeled(D, 20_000, 1)
    U_S, U_T = sample_unlabeled(D, 20_000, 2), sample_unlabeled(D, 20_000, 3)
    h = erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis
    r = thm1_rhs(H, h, S, U_S, U_T, 0.1, 0.0, D)
    assert r.holds and r.terms["half_emp_divergence"] < 0.01
    assert r.rhs_total == pytest.approx(r.terms["vc_term_A"] + r.terms["unlabeled_term_C"], abs=0.01)


def _alpha_samples(rng, g, m=100, beta=0.2):
    D_S, D_T = random_domain(rng, g), random_domain(rng, g)
    mt = bounds.split_count(beta, m)
    return (D_S, D_T, sample_labeled(D_T, mt, 1), sample_labeled(D_S, m - mt, 2),
            sample_unlabeled(D_S, 300, 3), sample_unlabeled(D_T, 300, 4))


def test_thm2_alpha_endpoints(rng):
    g, H = _setup(rng)
    D_S, D_T, S_T, S_S, U_S, U_T = _alpha_samples(rng, g)
    lam = lambda_joint(H, D_S, D_T)[0]
    r1 = thm2_rhs(H, S_T, S_S, U_S, U_T, 1.0, 0.1, D_T, lam)
    assert r1.terms["adaptation_term"] == 0.0
    r0 = thm2_rhs(H, S_T, S_S, U_S, U_T, 0.0, 0.1, D_T, lam)
    beta = S_T.size / (S_T.size + S_S.size)
    assert r0.terms["alpha_beta_term"] == pytest.approx(
        2 * math.sqrt(1 / (1 - beta)) * complexity_terms("B", 100, 2, 0.1), rel=1e-14)


def test_thm2_grid_optimum(rng):
    g, H = _setup(rng)
    D_S, D_T, S_T, S_S, U_S, U_T = _alpha_samples(rng, g)
    lam = lambda_joint(H, D_S, D_T)[0]
    grid = thm2_alpha_grid(H, S_T, S_S, U_S, U_T, 0.1, D_T, lam)
    best = min(v for _, v in grid)
    assert best <= min(dict(grid)[0.0], dict(grid)[1.0])
    assert dict(grid)[0.3] == pytest.approx(thm2_rhs(H, S_T, S_S, U_S, U_T, 0.3, 0.1, D_T, lam).rhs_total)


def test_thm2_beta_guard():
    with pytest.raises(PreconditionError):
        bounds.thm2_terms(0.5, 0.0, 100, 100, 1, 0.1, 0, 0, 0)
    with pytest.raises(PreconditionError):
        bounds.thm2_terms(0.5, 1.0, 100, 100, 1, 0.1, 0, 0, 0)
    assert bounds.split_count(0.25, 10) == 2 and bounds.split_count(0.35, 10) == 4


def _sources(rng, g, K, sizes=None, same=False):
    base = random_domain(rng, g)
    doms = [base if same else random_domain(rng, g) for _ in range(K)]
    sizes = sizes or [int(rng.integers(20, 60)) for _ in range(K)]
    return doms, [sample_labeled(D, s, 100 + i) for i, (D, s) in enumerate(zip(doms, sizes))]


def test_thm3_single_source_reduces(rng):
    g, H = _setup(rng)
    D_T = random_domain(rng, g)
    doms, samples = _sources(rng, g, 1, [80])
    lam = lambda_alpha(H, doms, [1.0], D_T)[0]
    r = thm3_rhs(H, samples, [1.0], 0.1, doms[0], D_T, lam)
    # K=1 is the alpha=0 single-source shape: coefficient sqrt(1/1) = 1
    assert r.terms["concentration"] == pytest.approx(2 * complexity_terms("B", 80, 2, 0.1), rel=1e-14)


def test_thm3_alpha_equals_beta_minimizes(rng):
    for _ in range(50):
        K = int(rng.integers(2, 6))
        beta = rng.dirichlet(np.ones(K))
        f = lambda a: float(np.sum(a ** 2 / beta))
        assert f(beta) == pytest.approx(1.0, rel=1e-12)
        assert f(np.full(K, 1 / K)) >= 1.0 - 1e-12
        assert f(rng.dirichlet(np.ones(K))) >= 1.0 - 1e-12


def test_thm3_duplicate_sources(rng):
    g, H = _setup(rng)
    D_T = random_domain(rng, g)
    doms, samples = _sources(rng, g, 3, [40, 40, 40], same=True)
    alpha = [0.2, 0.3, 0.5]
    mix = mixture_domain(doms, alpha)
    assert np.allclose(mix.probs, doms[0].probs, atol=1e-15)
    r = thm3_rhs(H, samples, alpha, 0.1, mix, D_T, lambda_alpha(H, doms, alpha, D_T)[0])
    single = thm3_rhs(H, samples, alpha, 0.1, doms[0], D_T, lambda_alpha(H, doms, alpha, D_T)[0])
    assert r.terms["divergence_plus_lambda"] == pytest.approx(single.terms["divergence_plus_lambda"], abs=1e-15)


def test_thm3_zero_beta_rejected(rng):
    g, H = _setup(rng)
    D = random_domain(rng, g)
    from tlbounds.domains import LabeledSample
    with pytest.raises(PreconditionError):
        thm3_rhs(H, [sample_labeled(D, 5, 1), LabeledSample(g, [], [])], [0.5, 0.5], 0.1, D, D, 0.0)


def test_thm4_holds_and_examples(rng):
    for _ in range(100):
        g, H = _setup(rng, int(rng.integers(2, 10)))
        D_S, D_T = random_domain(rng, g, bool(rng.integers(2))), random_domain(rng, g)
        r = thm4_rhs(H, ZERO_ONE, H[int(rng.integers(H.size))], D_S, D_T)
        assert r.holds
    D = random_domain(rng, g)
    r = thm4_rhs(H, ZERO_ONE, H[0], D, D)
    assert r.terms["discrepancy"] == 0.0
    h_t = H[r.inputs["h_T_star"]]
    r = thm4_rhs(H, ZERO_ONE, h_t, D_S, D_T)
    assert r.lhs_realized == r.terms["target_opt"]
    with pytest.raises(PreconditionError, match="triangle"):
        thm4_rhs(H, SQUARED, H[0], D_S, D_T)


def test_thm5_singleton_and_identical(rng):
    g, H = _setup(rng, 6)
    D_S, D_T = random_domain(rng, g), random_domain(rng, g)
    single = make_finite_class([H.matrix[2]], 1, g)
    S, T = sample_unlabeled(D_S, 10, 1), sample_unlabeled(D_T, 10, 2)
    r = thm5_rhs(single, single[0], S, T, D_S, D_T, 0.1, "exact")
    assert r.terms["emp_discrepancy"] == 0.0 and r.terms["target_rademacher"] == 4.0 * \
        __import__("tlbounds").rademacher(single, T)
    zero = make_finite_class([np.zeros(6)], 1, g)
    r = thm5_rhs(zero, zero[0], S, T, D_S, D_T, 0.1, "exact")
    assert r.terms["source_rademacher"] == 0.0 and r.terms["target_rademacher"] == 0.0
    r = thm5_rhs(H, H[1], S, S, D_S, D_T, 0.1, "exact")
    assert r.terms["emp_discrepancy"] == 0.0
    with pytest.raises(PreconditionError):
        thm5_rhs(H, H[1], S, S, D_S, D_T, 1.5)


def test_thm5_decreases_with_sample_size(rng):
    g, H = _setup(rng, 6)
    D = random_domain(rng, g)
    vals = []
    for m in (50, 100, 200):
        # identical samples: only Rademacher and confidence terms vary with m
        S = sample_unlabeled(D, m, 7)
        r = thm5_rhs(H, H[0], S, S, D, D, 0.1, "monte_carlo", draws=4000, seed=1)
        vals.append(r.rhs_total - r.terms["emp_source_dist_to_sopt"])
    assert vals[0] > vals[1] > vals[2]


def _thm7_setup(rng, K=3, same=False, sizes=None, mp=200):
    g, H = _setup(rng)
    D_T = random_domain(rng, g)
    doms, samples = _sources(rng, g, K, sizes, same)
    unl = [sample_unlabeled(D, mp, 50 + i) for i, D in enumerate(doms)]
    U_T = sample_unlabeled(D_T, mp, 99)
    hyps = [erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis for S in samples]
    return g, H, D_T, doms, samples, unl, U_T, hyps


def test_thm7_duplicate_sources_symmetric(rng):
    g, H, D_T, doms, _, _, U_T, _ = _thm7_setup(rng, same=True)
    S = sample_labeled(doms[0], 40, 1)
    U = sample_unlabeled(doms[0], 200, 2)
    samples, unl = [S, S, S], [U, U, U]
    hyps = [erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis] * 3
    alpha = [1 / 3, 1 / 3, 1 / 3]
    lam = lambda_alpha_mu(H, doms, alpha, 0.4, D_T)[0]
    r = thm7_rhs(H, samples, unl, U_T, alpha, 0.4, 0.1, hyps, lam, D_T)
    # self and peer risks coincide, so the blocks split as mu : (1 - mu)
    assert r.terms["self_risk_block"] / 0.4 == pytest.approx(r.terms["peer_risk_block"] / 0.6, rel=1e-12)
    assert r.holds


def test_thm7_mu_to_one(rng):
    beta = np.array([0.2, 0.3, 0.5])
    alpha = np.array([0.5, 0.25, 0.25])
    lim = thm7_concentration_coef(alpha, beta, 1 - 1e-12)
    assert lim == pytest.approx(float(np.sum(alpha * np.sqrt(1 / beta))), rel=1e-9)


def test_thm7_coefficient_by_hand():
    # K=2, alpha=(1,0), beta=(0.5,0.5), mu=0.5: sqrt(0.25/0.5 + 0.25*2) = 1
    assert thm7_concentration_coef([1.0, 0.0], [0.5, 0.5], 0.5) == pytest.approx(1.0, rel=1e-15)


def test_thm7_guards(rng):
    g, H, D_T, doms, samples, unl, U_T, hyps = _thm7_setup(rng)
    alpha = [0.2, 0.3, 0.5]
    with pytest.raises(PreconditionError):
        thm7_rhs(H, samples[:1], unl[:1], U_T, [1.0], 0.5, 0.1, hyps[:1], 0.0)
    for mu in (0.0, 1.0):
        with pytest.raises(PreconditionError):
            thm7_rhs(H, samples, unl, U_T, alpha, mu, 0.1, hyps, 0.0)
    with pytest.raises(PreconditionError):
        thm7_rhs(H, samples, unl, U_T, [0.5, 0.5, 0.5], 0.5, 0.1, hyps, 0.0)


def test_rhs_always_finite(rng):
    g, H, D_T, doms, samples, unl, U_T, hyps = _thm7_setup(rng)
    alpha = [0.2, 0.3, 0.5]
    for delta in (1e-9, 0.5, 0.999):
        r = thm7_rhs(H, samples, unl, U_T, alpha, 0.5, delta, hyps, 0.0, D_T)
        assert all(math.isfinite(v) for v in r.terms.values())
