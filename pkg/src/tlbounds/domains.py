"""Finite-support domains, labeled/unlabeled samples and seeded samplers.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``; :data:`RNG_ALGORITHM` names it and is echoed in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import member_abs_risks
from .errors import PreconditionError
from .hypothesis import GroundSet, Hypothesis, _frozen, check_same_ground

PROB_TOL = 1e-12
RNG_ALGORITHM = "numpy.random.PCG64/SeedSequence-v1"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_seed(master: int, *keys: int) -> int:
    """Mix ``master`` with integer ``keys`` into a 63-bit child seed.

    Uses ``SeedSequence([master, *keys])`` entropy mixing, so children of
    distinct key tuples are statistically independent.
    """
    state = np.random.SeedSequence([int(master), *map(int, keys)]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def _check_probs(probs, n):
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    if p.shape[0] != n:
        raise PreconditionError(f"probs has length {p.shape[0]}, ground set has {n} points")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise PreconditionError("probabilities must be finite and non-negative")
    total = p.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise PreconditionError(f"probabilities sum to {total!r}, not 1 (tolerance {PROB_TOL})")
    return p / total


@dataclass(frozen=True, eq=False)
class DiscreteDomain:
    """Distribution over a ground set plus a [0,1]-valued labeling function.

    ``mixed_labels`` is set on mixtures whose components disagree on labels;
    such a domain's ``label_fn`` is the first component's and only its
    marginal should be trusted.
    """

    ground: GroundSet
    probs: np.ndarray
    label_fn: Hypothesis
    mixed_labels: bool = False

    def __post_init__(self):
        check_same_ground(self.ground, self.label_fn)
        object.__setattr__(self, "probs", _frozen(_check_probs(self.probs, self.ground.size)))

    @classmethod
    def from_arrays(cls, points, probs, labels) -> "DiscreteDomain":
        ground, probs, labels = GroundSet.canonical(points, np.asarray(probs, float), np.asarray(labels, float))
        return cls(ground, probs, Hypothesis(ground, labels))

    def to_dict(self) -> dict:
        return {
            "points": self.ground.points.tolist(),
            "probs": self.probs.tolist(),
            "labels": self.label_fn.outputs.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteDomain":
        return cls.from_arrays(data["points"], data["probs"], data["labels"])


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Multiset of (ground index, label) pairs."""

    ground: GroundSet
    indices: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        lab = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if idx.shape != lab.shape:
            raise PreconditionError("indices and labels must have equal length")
        if idx.size and (idx.min() < 0 or idx.max() >= self.ground.size):
            raise PreconditionError("sample index out of range for the ground set")
        object.__setattr__(self, "indices", _frozen(idx, np.int64))
        object.__setattr__(self, "labels", _frozen(lab))

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def __len__(self):
        return self.size

    def measure(self) -> np.ndarray:
        """Empirical marginal over the ground set."""
        return np.bincount(self.indices, minlength=self.ground.size) / self.size

    def unlabeled(self) -> "UnlabeledSample":
        return UnlabeledSample(self.ground, self.indices)


@dataclass(frozen=True, eq=False)
class UnlabeledSample:
    """Multiset of ground-point indices."""

    ground: GroundSet
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.ground.size):
            raise PreconditionError("sample index out of range for the ground set")
        object.__setattr__(self, "indices", _frozen(idx, np.int64))

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def __len__(self):
        return self.size

    def measure(self) -> np.ndarray:
        if self.size == 0:
            raise PreconditionError("empty sample has no empirical measure")
        return np.bincount(self.indices, minlength=self.ground.size) / self.size


def expected_risk(D: DiscreteDomain, h: Hypothesis, g: Hypothesis | None = None) -> float:
    """``E_{x~D} |h(x) - g(x)|``; ``g`` defaults to the domain's labeling function."""
    g = D.label_fn if g is None else g
    check_same_ground(D, h, g)
    return float(np.abs(h.outputs - g.outputs) @ D.probs)


def empirical_risk(S: LabeledSample, h: Hypothesis) -> float:
    """Mean of ``|h(x_i) - y_i|`` over the sample entries."""
    check_same_ground(S, h)
    if S.size == 0:
        raise PreconditionError("empirical risk of an empty sample is undefined")
    return float(np.mean(np.abs(h.outputs[S.indices] - S.labels)))


def risk_vector(source, M: np.ndarray) -> np.ndarray:
    """Risks of every row of ``M`` against a sample or domain, in one kernel call."""
    if isinstance(source, LabeledSample):
        if source.size == 0:
            raise PreconditionError("empirical risk of an empty sample is undefined")
        w = np.full(source.size, 1.0 / source.size)
        return member_abs_risks(M, source.indices, source.labels, w)
    if isinstance(source, DiscreteDomain):
        idx = np.arange(source.ground.size)
        return member_abs_risks(M, idx, source.label_fn.outputs, source.probs)
    raise TypeError(f"cannot compute risks against {type(source).__name__}")


def mixture_domain(domains, weights) -> DiscreteDomain:
    """Convex combination of domain marginals.

    The label function of the first component is kept; ``mixed_labels`` flags
    components that disagree on labels.
    """
    domains = list(domains)
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if not domains or w.shape[0] != len(domains):
        raise PreconditionError("need one weight per domain")
    if np.any(w < 0) or abs(w.sum() - 1.0) > PROB_TOL:
        raise PreconditionError("mixture weights must be non-negative and sum to 1")
    check_same_ground(*domains)
    probs = sum(wj * D.probs for wj, D in zip(w, domains))
    first = domains[0].label_fn
    mixed = any(not np.array_equal(D.label_fn.outputs, first.outputs) for D in domains[1:])
    return DiscreteDomain(domains[0].ground, probs / probs.sum(), first, mixed_labels=mixed)


def _draw_indices(D: DiscreteDomain, m: int, seed) -> np.ndarray:
    if int(m) != m or m < 1:
        raise PreconditionError("sample size must be a positive integer")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return rng.choice(D.ground.size, size=int(m), p=D.probs)


def sample_labeled(D: DiscreteDomain, m: int, seed) -> LabeledSample:
    """``m`` i.i.d. draws from ``D``, labeled by ``D.label_fn`` (noise-free)."""
    idx = _draw_indices(D, m, seed)
    return LabeledSample(D.ground, idx, D.label_fn.outputs[idx])


def sample_unlabeled(D: DiscreteDomain, m: int, seed) -> UnlabeledSample:
    return UnlabeledSample(D.ground, _draw_indices(D, m, seed))
