"""Right-hand-side calculators for the domain-adaptation bounds.

Each calculator returns a :class:`BoundReport` whose ``terms`` already carry
their multipliers, so ``rhs_total`` is the plain sum of ``terms`` in order.
Natural logarithms throughout. A single ``delta`` is used as printed in each
bound (no union-bound splitting).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergence import ZERO_ONE, LossSpec, discrepancy, hdh_divergence, rademacher
from .domains import DiscreteDomain, LabeledSample, UnlabeledSample, empirical_risk, expected_risk
from .erm import WeightedRiskSpec, erm, ideal_risk, multisource_ensemble
from .errors import PreconditionError
from .hypothesis import Hypothesis, HypothesisClass, check_same_ground

HOLDS_TOL = 1e-12


@dataclass
class BoundReport:
    theorem_id: str
    terms: dict
    lhs_realized: float | None = None
    inputs: dict = field(default_factory=dict)

    @property
    def rhs_total(self) -> float:
        return float(sum(self.terms.values()))

    @property
    def holds(self) -> bool | None:
        if self.lhs_realized is None:
            return None
        return bool(self.lhs_realized <= self.rhs_total + HOLDS_TOL)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "terms": dict(self.terms),
            "rhs_total": self.rhs_total,
            "lhs_realized": self.lhs_realized,
            "holds": self.holds,
            "inputs": self.inputs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def csv_header(self) -> list[str]:
        return ["theorem_id", *self.terms, "rhs_total", "lhs_realized", "holds", "inputs"]

    def to_csv_row(self, header: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.csv_header())
        w.writerow([
            self.theorem_id,
            *(repr(float(v)) for v in self.terms.values()),
            repr(self.rhs_total),
            "" if self.lhs_realized is None else repr(float(self.lhs_realized)),
            "" if self.holds is None else str(self.holds).lower(),
            json.dumps(self.inputs, sort_keys=True),
        ])
        return buf.getvalue()


def _check_common(m, d, delta):
    if int(m) != m or m < 1:
        raise PreconditionError("sample size must be a positive integer")
    if int(d) != d or d < 1:
        raise PreconditionError("VC dimension must be a positive integer")
    if not 0.0 < delta < 1.0:
        raise PreconditionError("delta must lie in (0, 1)")


def vc_term_a(m: int, d: int, delta: float) -> float:
    """``sqrt(4 (d log(2 e m / d) + log(4/delta)) / m)``."""
    _check_common(m, d, delta)
    if 2.0 * math.e * m < d:
        raise PreconditionError("2em/d < 1: the VC term is undefined")
    return math.sqrt(4.0 * (d * math.log(2.0 * math.e * m / d) + math.log(4.0 / delta)) / m)


def vc_term_b(m: int, d: int, delta: float) -> float:
    """``sqrt((d log(2m) - log delta) / (2m))``."""
    _check_common(m, d, delta)
    return math.sqrt((d * math.log(2.0 * m) - math.log(delta)) / (2.0 * m))


def unlabeled_term(m_prime: int, d: int, delta: float) -> float:
    """``4 sqrt((2 d log(2m') + log(4/delta)) / m')``."""
    _check_common(m_prime, d, delta)
    return 4.0 * math.sqrt((2.0 * d * math.log(2.0 * m_prime) + math.log(4.0 / delta)) / m_prime)


_KINDS = {"A": vc_term_a, "B": vc_term_b, "C": unlabeled_term}


def complexity_terms(kind: str, m: int, d: int, delta: float) -> float:
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise PreconditionError(f"unknown complexity term kind {kind!r}") from None
    return fn(m, d, delta)


def _require_member(H: HypothesisClass, h: Hypothesis):
    if h not in H:
        raise PreconditionError("h must be a member of the hypothesis class")


def target_optimum(H: HypothesisClass, D_T: DiscreteDomain) -> float:
    return ideal_risk([(1.0, D_T)], H)[0]


def lemma1_rhs(H: HypothesisClass, h: Hypothesis, D_S: DiscreteDomain, D_T: DiscreteDomain) -> BoundReport:
    """``eps_T(h) <= eps_S(h) + d(D_S, D_T)/2 + lambda``, all exact."""
    _require_member(H, h)
    lam, _ = ideal_risk([(1.0, D_S), (1.0, D_T)], H)
    terms = {
        "source_risk": expected_risk(D_S, h),
        "half_divergence": 0.5 * hdh_divergence(H, D_S, D_T),
        "lambda": lam,
    }
    return BoundReport("lemma1", terms, expected_risk(D_T, h), {"d": H.vc_dim})


def thm1_rhs(H: HypothesisClass, h: Hypothesis, S: LabeledSample, U_S: UnlabeledSample,
             U_T: UnlabeledSample, delta: float, lambda_value: float,
             D_T: DiscreteDomain | None = None) -> BoundReport:
    """Source empirical risk plus VC, empirical divergence, unlabeled and lambda terms."""
    if U_S.size != U_T.size:
        raise PreconditionError("unlabeled samples must have equal size m'")
    check_same_ground(H, h, S, U_S, U_T)
    m, mp, d = S.size, U_S.size, H.vc_dim
    terms = {
        "emp_source_risk": empirical_risk(S, h),
        "vc_term_A": vc_term_a(m, d, delta),
        "half_emp_divergence": 0.5 * hdh_divergence(H, U_S, U_T),
        "unlabeled_term_C": unlabeled_term(mp, d, delta),
        "lambda": float(lambda_value),
    }
    lhs = expected_risk(D_T, h) if D_T is not None else None
    return BoundReport("1", terms, lhs, {"m": m, "m_prime": mp, "d": d, "delta": delta,
                                         "labeled_sample_from": "source"})


def split_count(beta: float, m: int) -> int:
    """Target share of a mixed sample: ``round(beta * m)``, half to even."""
    return int(round(beta * m))


def thm2_terms(alpha: float, beta: float, m: int, m_prime: int, d: int, delta: float,
               target_opt: float, half_emp_div: float, lambda_value: float) -> dict:
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError("alpha must lie in [0, 1]")
    if not 0.0 < beta < 1.0:
        raise PreconditionError("beta must lie strictly inside (0, 1)")
    coef = math.sqrt(alpha ** 2 / beta + (1.0 - alpha) ** 2 / (1.0 - beta))
    adapt = 2.0 * (1.0 - alpha) * (half_emp_div + unlabeled_term(m_prime, d, delta) + lambda_value)
    return {
        "target_opt_risk": target_opt,
        "alpha_beta_term": 2.0 * coef * vc_term_b(m, d, delta),
        "adaptation_term": adapt,
    }


def alpha_weighted_spec(S_T: LabeledSample, S_S: LabeledSample, alpha: float) -> WeightedRiskSpec:
    """``alpha * emp_T(h) + (1 - alpha) * emp_S(h)``; empty parts must carry zero weight."""
    terms = []
    for w, S in ((alpha, S_T), (1.0 - alpha, S_S)):
        if S.size == 0:
            if w > 0:
                raise PreconditionError("a sample part with positive weight is empty")
            continue
        terms.append((w, S))
    return WeightedRiskSpec(terms)


def thm2_rhs(H: HypothesisClass, S_T: LabeledSample, S_S: LabeledSample, U_S: UnlabeledSample,
             U_T: UnlabeledSample, alpha: float, delta: float, D_T: DiscreteDomain,
             lambda_value: float) -> BoundReport:
    """Alpha-weighted ERM bound; ``S_T``/``S_S`` are the target and source parts of the mixed sample."""
    if U_S.size != U_T.size:
        raise PreconditionError("unlabeled samples must have equal size m'")
    m = S_T.size + S_S.size
    beta = S_T.size / m
    terms = thm2_terms(alpha, beta, m, U_S.size, H.vc_dim, delta, target_optimum(H, D_T),
                       0.5 * hdh_divergence(H, U_S, U_T), float(lambda_value))
    h_hat = erm(alpha_weighted_spec(S_T, S_S, alpha), H).hypothesis
    return BoundReport("2", terms, expected_risk(D_T, h_hat), {
        "m": m, "m_target": S_T.size, "m_source": S_S.size, "beta": beta, "alpha": alpha,
        "m_prime": U_S.size, "d": H.vc_dim, "delta": delta, "rounding": "half_even",
    })


def thm2_alpha_grid(H: HypothesisClass, S_T, S_S, U_S, U_T, delta, D_T, lambda_value,
                    alphas: Sequence[float] | None = None) -> list[tuple[float, float]]:
    """``(alpha, rhs_total)`` over a grid; the samples are held fixed."""
    if alphas is None:
        alphas = [i / 100 for i in range(101)]
    m = S_T.size + S_S.size
    beta = S_T.size / m
    t_opt = target_optimum(H, D_T)
    half_div = 0.5 * hdh_divergence(H, U_S, U_T)
    out = []
    for a in alphas:
        t = thm2_terms(a, beta, m, U_S.size, H.vc_dim, delta, t_opt, half_div, float(lambda_value))
        out.append((float(a), float(sum(t.values()))))
    return out


def _source_sizes(sources: Sequence[LabeledSample]) -> tuple[int, np.ndarray]:
    sizes = np.array([S.size for S in sources], dtype=np.float64)
    if np.any(sizes == 0):
        raise PreconditionError("every source needs labeled data (beta_j > 0)")
    m = int(sizes.sum())
    return m, sizes / m


def _check_alpha(alpha, K):
    a = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if a.shape[0] != K:
        raise PreconditionError("need one alpha per source")
    if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-12:
        raise PreconditionError("alpha must be non-negative and sum to 1")
    return a


def thm3_rhs(H: HypothesisClass, sources: Sequence[LabeledSample], alpha, delta: float,
             D_alpha: DiscreteDomain, D_T: DiscreteDomain, lambda_alpha: float) -> BoundReport:
    """Multi-source bound for ERM on the alpha-weighted empirical error."""
    a = _check_alpha(alpha, len(sources))
    m, beta = _source_sizes(sources)
    d = H.vc_dim
    conc = 2.0 * math.sqrt(float(np.sum(a ** 2 / beta))) * vc_term_b(m, d, delta)
    terms = {
        "target_opt_risk": target_optimum(H, D_T),
        "concentration": conc,
        "divergence_plus_lambda": 2.0 * (0.5 * hdh_divergence(H, D_alpha, D_T) + float(lambda_alpha)),
    }
    h_hat = erm(WeightedRiskSpec([(float(aj), S) for aj, S in zip(a, sources) if aj > 0]), H).hypothesis
    return BoundReport("3", terms, expected_risk(D_T, h_hat), {
        "m": m, "K": len(sources), "alpha": a.tolist(), "beta": beta.tolist(), "d": d, "delta": delta,
    })


def thm4_rhs(H: HypothesisClass, loss: LossSpec, h: Hypothesis, D_S: DiscreteDomain,
             D_T: DiscreteDomain) -> BoundReport:
    """Deterministic discrepancy bound; needs a symmetric, triangle-obeying loss."""
    if not loss.triangle:
        raise PreconditionError(
            f"loss {loss.kind!r} does not satisfy the triangle inequality, which the bound requires"
        )
    _require_member(H, h)
    check_same_ground(H, D_S, D_T)
    M = H.matrix

    def L(D, u, v):
        return float(loss.pointwise(u, v) @ D.probs)

    s_idx = int(np.argmin([L(D_S, r, D_S.label_fn.outputs) for r in M]))
    t_idx = int(np.argmin([L(D_T, r, D_T.label_fn.outputs) for r in M]))
    hs, ht = M[s_idx], M[t_idx]
    terms = {
        "target_opt": L(D_T, ht, D_T.label_fn.outputs),
        "source_dist_to_sopt": L(D_S, h.outputs, hs),
        "discrepancy": discrepancy(H, loss, D_S, D_T),
        "opt_gap": L(D_S, hs, ht),
    }
    return BoundReport("4", terms, L(D_T, h.outputs, D_T.label_fn.outputs),
                       {"loss": loss.kind, "h_S_star": s_idx, "h_T_star": t_idx})


def thm5_rhs(H: HypothesisClass, h: Hypothesis, S_sample, T_sample, D_S: DiscreteDomain,
             D_T: DiscreteDomain, delta: float, rademacher_mode: str = "auto",
             draws: int = 10_000, seed=0) -> BoundReport:
    """Rademacher bound for the 0-1 loss; lhs is ``L_T(h) - L_T(h*_T)``."""
    if not H.binary:
        raise PreconditionError("the Rademacher discrepancy bound is stated for binary classes")
    if not 0.0 < delta < 1.0:
        raise PreconditionError("delta must lie in (0, 1)")
    _require_member(H, h)
    check_same_ground(H, S_sample, T_sample, D_S, D_T)
    m, n = S_sample.size, T_sample.size
    M = H.matrix
    s_idx = int(np.argmin(np.abs(M - D_S.label_fn.outputs) @ D_S.probs))
    t_idx = int(np.argmin(np.abs(M - D_T.label_fn.outputs) @ D_T.probs))
    hs, ht = M[s_idx], M[t_idx]
    r_s = rademacher(H, S_sample, rademacher_mode, draws, seed)
    r_t = rademacher(H, T_sample, rademacher_mode, draws, seed + 1 if isinstance(seed, int) else seed)
    log8 = math.log(8.0 / delta)
    terms = {
        "emp_source_dist_to_sopt": float(np.mean(np.abs(h.outputs[S_sample.indices] - hs[S_sample.indices]))),
        "emp_discrepancy": discrepancy(H, ZERO_ONE, S_sample, T_sample),
        "source_rademacher": 4.5 * r_s,
        "target_rademacher": 4.0 * r_t,
        "source_confidence": 4.0 * math.sqrt(log8 / (2.0 * m)),
        "target_confidence": 3.0 * math.sqrt(log8 / (2.0 * n)),
        "opt_gap": float(np.abs(hs - ht) @ D_S.probs),
    }
    lhs = expected_risk(D_T, h) - float(np.abs(ht - D_T.label_fn.outputs) @ D_T.probs)
    return BoundReport("5", terms, lhs, {"m": m, "n": n, "delta": delta, "rademacher_mode": rademacher_mode,
                                         "h_S_star": s_idx, "h_T_star": t_idx})


def thm7_concentration_coef(alpha, beta, mu: float) -> float:
    """``sum_i alpha_i sqrt(mu^2/beta_i + ((1-mu)/(K-1))^2 sum_{j!=i} 1/beta_j)``."""
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    K = a.shape[0]
    inv = 1.0 / b
    peer = (1.0 - mu) / (K - 1)
    return float(np.sum(a * np.sqrt(mu ** 2 * inv + peer ** 2 * (inv.sum() - inv))))


def thm7_rhs(H: HypothesisClass, sources: Sequence[LabeledSample], source_unlabeled: Sequence[UnlabeledSample],
             U_T: UnlabeledSample, alpha, mu: float, delta: float,
             per_source_hyps: Sequence[Hypothesis], lambda_alpha_mu: float,
             D_T: DiscreteDomain | None = None) -> BoundReport:
    """Peer-evaluated multi-source bound for ``h = sum_i alpha_i h_i``."""
    K = len(sources)
    if K < 2:
        raise PreconditionError("the peer-evaluated bound needs K >= 2 sources")
    if not 0.0 < mu < 1.0:
        raise PreconditionError("mu must lie strictly inside (0, 1)")
    if len(source_unlabeled) != K or len(per_source_hyps) != K:
        raise PreconditionError("need one unlabeled sample and one hypothesis per source")
    mp = U_T.size
    if any(U.size != mp for U in source_unlabeled):
        raise PreconditionError("all unlabeled samples must have size m'")
    a = _check_alpha(alpha, K)
    m, beta = _source_sizes(sources)
    d = H.vc_dim
    half_div = np.array([0.5 * hdh_divergence(H, U, U_T) for U in source_unlabeled])
    # emp[i, j]: empirical risk of source-i hypothesis on source-j labeled sample
    emp = np.array([[empirical_risk(Sj, hi) for Sj in sources] for hi in per_source_hyps])
    peer = (1.0 - mu) / (K - 1)
    self_block = float(np.sum(a * mu * (np.diag(emp) + half_div)))
    peer_block = 0.0
    for i in range(K):
        peer_block += a[i] * peer * sum(emp[i, j] + half_div[j] for j in range(K) if j != i)
    terms = {
        "self_risk_block": self_block,
        "peer_risk_block": float(peer_block),
        "concentration_block": thm7_concentration_coef(a, beta, mu) * vc_term_b(m, d, delta),
        "unlabeled_term": unlabeled_term(mp, d, delta),
        "lambda_alpha_mu": float(lambda_alpha_mu),
    }
    lhs = None
    if D_T is not None:
        lhs = expected_risk(D_T, multisource_ensemble(per_source_hyps, a))
    return BoundReport("7", terms, lhs, {
        "m": m, "m_prime": mp, "K": K, "alpha": a.tolist(), "beta": beta.tolist(), "mu": mu,
        "d": d, "delta": delta, "target_unlabeled": "shared",
    })
