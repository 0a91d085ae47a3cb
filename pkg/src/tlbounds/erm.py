"""Exact empirical risk minimization by enumeration, and ideal-hypothesis risks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .domains import DiscreteDomain, LabeledSample, risk_vector
from .errors import PreconditionError
from .hypothesis import Hypothesis, HypothesisClass, check_same_ground

RiskSource = Union[LabeledSample, DiscreteDomain]


@dataclass(frozen=True)
class WeightedRiskSpec:
    """``sum_j w_j * risk_j(h)`` with empirical or expected risk terms.

    Weights need not sum to one.
    """

    terms: tuple

    def __init__(self, terms: Sequence[tuple[float, RiskSource]]):
        terms = tuple((float(w), src) for w, src in terms)
        if not terms:
            raise PreconditionError("a weighted risk needs at least one term")
        for w, src in terms:
            if not np.isfinite(w) or w < 0:
                raise PreconditionError("risk weights must be finite and non-negative")
            if not isinstance(src, (LabeledSample, DiscreteDomain)):
                raise TypeError(f"unsupported risk source {type(src).__name__}")
        check_same_ground(*(src for _, src in terms))
        object.__setattr__(self, "terms", terms)

    @property
    def ground(self):
        return self.terms[0][1].ground

    def scaled(self, c: float) -> "WeightedRiskSpec":
        return WeightedRiskSpec([(c * w, s) for w, s in self.terms])


@dataclass(frozen=True)
class ErmResult:
    index: int
    hypothesis: Hypothesis
    value: float
    tie_count: int


def objective_vector(spec: WeightedRiskSpec, H: HypothesisClass) -> np.ndarray:
    """Objective value of every member, in member order."""
    check_same_ground(H, spec)
    total = np.zeros(H.size)
    for w, src in spec.terms:
        if w:
            total += w * risk_vector(src, H.matrix)
    return total


def weighted_objective(spec: WeightedRiskSpec, h: Hypothesis) -> float:
    check_same_ground(h, spec)
    return float(objective_vector(spec, HypothesisClass(h.ground, [h.outputs], 1))[0])


def _argmin(values: np.ndarray) -> tuple[int, int]:
    best = values.min()
    ties = np.flatnonzero(values == best)
    return int(ties[0]), int(ties.size)


def erm(spec: WeightedRiskSpec, H: HypothesisClass) -> ErmResult:
    """Exact minimizer over the class; ties go to the lowest member index."""
    values = objective_vector(spec, H)
    i, ties = _argmin(values)
    return ErmResult(i, H[i], float(values[i]), ties)


def ideal_risk(terms: Sequence[tuple[float, DiscreteDomain]], H: HypothesisClass) -> tuple[float, Hypothesis]:
    """``min_h sum_j w_j eps_{D_j}(h)`` over the class, with its minimizer."""
    for _, D in terms:
        if not isinstance(D, DiscreteDomain):
            raise TypeError("ideal risks are defined on domains, not samples")
    res = erm(WeightedRiskSpec(terms), H)
    return res.value, res.hypothesis


def alpha_mu_weights(alpha, mu: float) -> np.ndarray:
    """Source weights ``alpha_i mu + (1 - alpha_i)(1 - mu)/(K - 1)``."""
    a = np.asarray(alpha, dtype=np.float64)
    K = a.shape[0]
    if K < 2:
        raise PreconditionError("alpha-mu weights need at least two sources")
    return a * mu + (1.0 - a) * (1.0 - mu) / (K - 1)


def lambda_joint(H: HypothesisClass, D_S: DiscreteDomain, D_T: DiscreteDomain) -> tuple[float, Hypothesis]:
    """Combined source+target risk of the ideal joint hypothesis."""
    return ideal_risk([(1.0, D_S), (1.0, D_T)], H)


def lambda_alpha(H: HypothesisClass, sources, alpha, D_T: DiscreteDomain) -> tuple[float, Hypothesis]:
    return ideal_risk([(1.0, D_T)] + [(float(a), D) for a, D in zip(alpha, sources)], H)


def lambda_alpha_mu(H: HypothesisClass, sources, alpha, mu: float, D_T: DiscreteDomain) -> tuple[float, Hypothesis]:
    w = alpha_mu_weights(alpha, mu)
    return ideal_risk([(1.0, D_T)] + [(float(c), D) for c, D in zip(w, sources)], H)


def multisource_ensemble(per_source: Sequence[ErmResult | Hypothesis], alpha) -> Hypothesis:
    """Pointwise convex combination ``sum_i alpha_i h_i``."""
    hyps = [r.hypothesis if isinstance(r, ErmResult) else r for r in per_source]
    a = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if a.shape[0] != len(hyps) or not hyps:
        raise PreconditionError("need one weight per source hypothesis")
    if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-12:
        raise PreconditionError("ensemble weights must be non-negative and sum to 1")
    check_same_ground(*hyps)
    if len(hyps) == 1:
        return hyps[0]
    out = np.zeros(hyps[0].ground.size)
    for ai, h in zip(a, hyps):
        out += ai * h.outputs
    return Hypothesis(hyps[0].ground, np.clip(out, 0.0, 1.0))
