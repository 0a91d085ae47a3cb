import numpy as np
import pytest

from tlbounds.domains import DiscreteDomain, LabeledSample, empirical_risk, expected_risk, sample_labeled
from tlbounds.erm import (ErmResult, WeightedRiskSpec, alpha_mu_weights, erm, ideal_risk, lambda_alpha_mu,
                          lambda_joint, multisource_ensemble, objective_vector, weighted_objective)
from tlbounds.errors import PreconditionError
from tlbounds.hypothesis import GroundSet, Hypothesis, HypothesisClass, make_finite_class, make_threshold_class

import oracles
from conftest import random_class, random_domain, random_ground


def test_weighted_objective_reductions(ground2):
    S_T = LabeledSample(ground2, [0, 1, 0, 1, 0], [1, 1, 1, 1, 0])   # h=[1,1]: 0.2
    S_S = LabeledSample(ground2, [0, 1, 0, 1, 0], [0, 1, 0, 1, 1])   # h=[1,1]: 0.4
    h = Hypothesis(ground2, [1, 1])
    assert empirical_risk(S_T, h) == 0.2 and empirical_risk(S_S, h) == 0.4
    spec = lambda a: WeightedRiskSpec([(a, S_T), (1 - a, S_S)])
    assert weighted_objective(spec(0.0), h) == empirical_risk(S_S, h)
    assert weighted_objective(spec(1.0), h) == empirical_risk(S_T, h)
    assert weighted_objective(spec(0.5), h) == pytest.approx(0.3, abs=1e-15)


def test_multi_source_weighted_sum(ground2):
    S1 = LabeledSample(ground2, list(range(2)) * 5, [1] * 9 + [0])        # 0.1
    S2 = LabeledSample(ground2, list(range(2)) * 5, [1] * 8 + [0, 0])     # 0.2
    h = Hypothesis(ground2, [1, 1])
    assert weighted_objective(WeightedRiskSpec([(0.3, S1), (0.7, S2)]), h) == pytest.approx(0.17, abs=1e-15)


def test_erm_example(ground2):
    H = make_finite_class([[0, 0], [1, 1]], 1, ground2)
    S = LabeledSample(ground2, [0, 1, 0, 1], [1, 1, 1, 0])
    res = erm(WeightedRiskSpec([(1.0, S)]), H)
    assert res.index == 1 and res.value == 0.25 and res.tie_count == 1
    assert res.hypothesis == H[1]


def test_erm_perfect_member(rng):
    g = random_ground(rng, 6)
    H = make_threshold_class(g)
    D = DiscreteDomain(g, np.full(6, 1 / 6), H[3])
    res = erm(WeightedRiskSpec([(1.0, sample_labeled(D, 50, 1))]), H)
    assert res.value == 0.0
    assert expected_risk(D, res.hypothesis) == 0.0 or res.tie_count > 1


def test_erm_ties_take_lowest_index(ground2):
    H = make_finite_class([[1, 0], [0, 1], [1, 1]], 1, ground2)
    S = LabeledSample(ground2, [0, 1], [1, 1])
    res = erm(WeightedRiskSpec([(1.0, S)]), H)
    assert res.index == 2 and res.tie_count == 1
    S = LabeledSample(ground2, [0, 1], [0.5, 0.5])
    res = erm(WeightedRiskSpec([(1.0, S)]), H)
    assert res.index == 0 and res.tie_count == 3


def test_erm_matches_oracle(rng):
    for _ in range(50):
        g = random_ground(rng, int(rng.integers(2, 16)))
        H = random_class(rng, g, 32, binary=bool(rng.integers(0, 2)))
        D1, D2 = random_domain(rng, g), random_domain(rng, g, binary_labels=False)
        S = sample_labeled(D1, int(rng.integers(1, 40)), int(rng.integers(1 << 30)))
        w = rng.uniform(0, 2, 2)
        res = erm(WeightedRiskSpec([(w[0], S), (w[1], D2)]), H)
        entries = list(zip(S.indices.tolist(), S.labels.tolist()))
        terms = [(w[0], lambda h: oracles.emp_risk(entries, h)),
                 (w[1], lambda h: oracles.risk(D2.probs, h, D2.label_fn.outputs))]
        idx, val, ties = oracles.erm_weighted(H.matrix.tolist(), terms)
        assert res.value == pytest.approx(val, abs=1e-12)
        vals = objective_vector(WeightedRiskSpec([(w[0], S), (w[1], D2)]), H)
        assert np.all(res.value <= vals)
        assert res.value == pytest.approx(vals[idx], abs=1e-12)


def test_erm_scaling_invariance(rng):
    g = random_ground(rng, 8)
    H = make_threshold_class(g)
    spec = WeightedRiskSpec([(1.0, sample_labeled(random_domain(rng, g), 30, 9))])
    base = erm(spec, H)
    for c in (0.5, 2.0, 8.0):
        res = erm(spec.scaled(c), H)
        assert res.index == base.index
        assert res.value == pytest.approx(c * base.value, rel=1e-12, abs=1e-15)


def test_ideal_risk_examples(rng):
    g = random_ground(rng, 6)
    H = make_threshold_class(g)
    f = H[4]
    D_S = DiscreteDomain(g, rng.dirichlet(np.ones(6)), f)
    D_T = DiscreteDomain(g, rng.dirichlet(np.ones(6)), f)
    assert lambda_joint(H, D_S, D_T)[0] == 0.0
    D_T = random_domain(rng, g)
    lam = ideal_risk([(1, D_S), (1, D_T)], H)[0]
    assert lam >= ideal_risk([(1, D_S)], H)[0] and lam >= ideal_risk([(1, D_T)], H)[0]
    assert ideal_risk([(1, D_S), (2, D_T)], H)[0] >= lam


def test_ideal_risk_oracle(rng):
    for _ in range(20):
        g = random_ground(rng, 10)
        H = random_class(rng, g, 40)
        doms = [random_domain(rng, g) for _ in range(3)]
        w = rng.uniform(0, 1, 3)
        val, h = ideal_risk(list(zip(w, doms)), H)
        exp, _ = oracles.ideal(H.matrix.tolist(), [(wj, D.probs, D.label_fn.outputs) for wj, D in zip(w, doms)])
        assert val == pytest.approx(exp, abs=1e-12)


def test_lambda_alpha_mu_chain(rng):
    for _ in range(100):
        g = random_ground(rng, 8)
        H = random_class(rng, g, 16)
        K = int(rng.integers(2, 5))
        D_T = random_domain(rng, g)
        sources = [random_domain(rng, g) for _ in range(K)]
        alpha = rng.dirichlet(np.ones(K))
        alpha /= alpha.sum()
        mu = float(rng.uniform(0.01, 0.99))
        lam_am = lambda_alpha_mu(H, sources, alpha, mu, D_T)[0]
        lam_i = [lambda_joint(H, S, D_T)[0] for S in sources]
        rhs = sum(alpha[i] * (mu * lam_i[i] + (1 - mu) / (K - 1) * sum(lam_i[j] for j in range(K) if j != i))
                  for i in range(K))
        assert lam_am >= rhs - 1e-12
        # weights sum to one (target weight aside)
        assert alpha_mu_weights(alpha, mu).sum() == pytest.approx(1.0, abs=1e-12)


def test_ensemble(ground2):
    h1, h2 = Hypothesis(ground2, [1, 0]), Hypothesis(ground2, [0, 0])
    assert multisource_ensemble([h1], [1.0]) is h1
    assert multisource_ensemble([h1, h2], [0.5, 0.5]).outputs.tolist() == [0.5, 0.0]
    with pytest.raises(PreconditionError):
        multisource_ensemble([h1, h2], [0.5, 0.6])


def test_ensemble_target_risk_linear(rng):
    g = random_ground(rng, 8)
    H = make_threshold_class(g)
    D_T = random_domain(rng, g)
    for _ in range(30):
        K = int(rng.integers(1, 5))
        hyps = [H[int(i)] for i in rng.integers(0, H.size, K)]
        alpha = rng.dirichlet(np.ones(K))
        alpha /= alpha.sum()
        ens = multisource_ensemble(hyps, alpha)
        assert expected_risk(D_T, ens) == pytest.approx(sum(a * expected_risk(D_T, h) for a, h in zip(alpha, hyps)),
                                                        abs=1e-12)


def test_weighted_spec_validation(ground2):
    with pytest.raises(PreconditionError):
        WeightedRiskSpec([])
    with pytest.raises(PreconditionError):
        WeightedRiskSpec([(-1.0, LabeledSample(ground2, [0], [0]))])
