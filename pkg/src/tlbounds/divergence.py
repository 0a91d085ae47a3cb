"""Distribution distances induced by a finite hypothesis class.

All suprema are exhaustive over member pairs in canonical order; there is no
trained discriminator anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .domains import DiscreteDomain, LabeledSample, UnlabeledSample, make_rng
from .errors import GroundSetMismatchError, PreconditionError, ResourceGuardError
from .hypothesis import HypothesisClass, check_same_ground

EXACT_RADEMACHER_MAX_M = 20


@dataclass(frozen=True)
class LossSpec:
    """Pointwise loss between two hypothesis outputs, bounded by ``bound``."""

    kind: str = "zero_one_abs"
    bound: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero_one_abs", "squared"):
            raise PreconditionError(f"unknown loss kind {self.kind!r}")
        if self.bound < 0:
            raise PreconditionError("loss bound must be non-negative")

    @property
    def squared(self) -> bool:
        return self.kind == "squared"

    @property
    def triangle(self) -> bool:
        """Whether the loss obeys the triangle inequality."""
        return self.kind == "zero_one_abs"

    def pointwise(self, a, b):
        d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
        return d * d if self.squared else np.abs(d)


ZERO_ONE = LossSpec("zero_one_abs")
SQUARED = LossSpec("squared")


def as_measure(P, ground=None) -> np.ndarray:
    """Resolve a domain, a sample, or a raw vector to a probability vector."""
    if isinstance(P, DiscreteDomain):
        vec, g = P.probs, P.ground
    elif isinstance(P, (UnlabeledSample, LabeledSample)):
        vec, g = P.measure(), P.ground
    else:
        vec, g = np.asarray(P, dtype=np.float64), None
        if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-12:
            raise PreconditionError("raw measure must be a probability vector")
    if ground is not None:
        if g is not None:
            check_same_ground(ground, g)
        elif vec.shape[0] != ground.size:
            raise GroundSetMismatchError("measure length does not match the ground set")
    return np.asarray(vec, dtype=np.float64)


def _require_binary(H: HypothesisClass):
    if not H.binary:
        raise PreconditionError("H-delta-H divergence needs a binary hypothesis class")


def hdh_divergence_argmax(H: HypothesisClass, P, Q):
    """Divergence plus the first member pair ``(a, b)`` whose XOR attains it."""
    _require_binary(H)
    p, q = as_measure(P, H.ground), as_measure(Q, H.ground)
    gap, a, b = _accel.pair_gap_max(H.matrix, p - q)
    return 2.0 * gap, (a, b)


def hdh_divergence(H: HypothesisClass, P, Q) -> float:
    """``2 sup_A |P(A) - Q(A)|`` over the disagreement regions of member pairs."""
    return hdh_divergence_argmax(H, P, Q)[0]


def key_inequality_check(H: HypothesisClass, D_S: DiscreteDomain, D_T: DiscreteDomain) -> float:
    """``max_{h,h'} |eps_S(h,h') - eps_T(h,h')| - d/2``; non-positive when the inequality holds.

    The left side is built from the two domains' pairwise risk matrices
    separately, not through the divergence kernel.
    """
    _require_binary(H)
    check_same_ground(H, D_S, D_T)
    M = H.matrix
    lhs = 0.0
    for a in range(M.shape[0]):
        dis = np.abs(M[a][None, :] - M)
        gap = np.abs(dis @ D_S.probs - dis @ D_T.probs)
        lhs = max(lhs, float(gap.max()))
    return lhs - 0.5 * hdh_divergence(H, D_S, D_T)


def discrepancy(H: HypothesisClass, loss: LossSpec, P, Q) -> float:
    """``max_{h,h'} |L_P(h,h') - L_Q(h,h')|`` over member pairs."""
    p, q = as_measure(P, H.ground), as_measure(Q, H.ground)
    return _accel.pair_gap_max(H.matrix, p - q, loss.squared)[0]


def _sample_values(H: HypothesisClass, S) -> np.ndarray:
    if not isinstance(S, (UnlabeledSample, LabeledSample)):
        raise TypeError("Rademacher complexity needs a sample")
    check_same_ground(H, S)
    if S.size == 0:
        raise PreconditionError("empty sample")
    return H.matrix[:, S.indices]


def rademacher_exact(H: HypothesisClass, S) -> float:
    """Empirical Rademacher complexity by enumerating all ``2^m`` sign vectors."""
    V = _sample_values(H, S)
    m = V.shape[1]
    if m > EXACT_RADEMACHER_MAX_M:
        raise ResourceGuardError(
            f"exact Rademacher enumeration refused for m={m} > {EXACT_RADEMACHER_MAX_M}; use monte_carlo"
        )
    return 2.0 / m * _accel.rademacher_exact_total(V) / float(1 << m)


def rademacher_monte_carlo(H: HypothesisClass, S, draws: int = 10_000, seed=0) -> tuple[float, float]:
    """Monte Carlo estimate and its standard error from seeded sign draws."""
    if int(draws) != draws or draws < 1:
        raise PreconditionError("draws must be a positive integer")
    V = _sample_values(H, S)
    m = V.shape[1]
    signs = make_rng(seed).choice(np.array([-1.0, 1.0]), size=(int(draws), m))
    vals = (2.0 / m) * _accel.rademacher_sup_values(V, signs)
    stderr = float(vals.std(ddof=1) / np.sqrt(draws)) if draws > 1 else float("inf")
    return float(vals.mean()), stderr


def rademacher(H: HypothesisClass, S, mode: str = "exact", draws: int = 10_000, seed=0) -> float:
    """Empirical Rademacher complexity, absolute value kept inside the sup.

    ``mode`` is ``"exact"`` (m <= 20), ``"monte_carlo"``, or ``"auto"``
    (exact when allowed, Monte Carlo otherwise).
    """
    if mode == "auto":
        mode = "exact" if S.size <= EXACT_RADEMACHER_MAX_M else "monte_carlo"
    if mode == "exact":
        return rademacher_exact(H, S)
    if mode == "monte_carlo":
        return rademacher_monte_carlo(H, S, draws, seed)[0]
    raise PreconditionError(f"unknown Rademacher mode {mode!r}")
