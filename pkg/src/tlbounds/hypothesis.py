"""Hypotheses materialized as output vectors over a finite ground set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import GroundSetMismatchError, PreconditionError, UnsupportedClassError


def _frozen(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GroundSet:
    """Finite input space: distinct points in strict lexicographic order.

    ``points`` has shape ``(n, d)``; 1-d input may be given as a flat list.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise PreconditionError("ground set needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise PreconditionError("ground points must be finite")
        order = np.lexsort(pts.T[::-1])
        if not np.array_equal(order, np.arange(len(pts))):
            raise PreconditionError("ground points must be given in lexicographic order")
        if len(pts) > 1 and np.any(np.all(pts[1:] == pts[:-1], axis=1)):
            raise PreconditionError("ground points must be pairwise distinct")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def canonical(cls, points, *aligned):
        """Sort ``points`` lexicographically, permuting ``aligned`` arrays alike.

        Returns ``(ground, *aligned_sorted)``.
        """
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        order = np.lexsort(pts.T[::-1])
        out = [np.asarray(a)[order] for a in aligned]
        return (cls(pts[order]), *out)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GroundSet):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __hash__(self):
        return hash((self.points.shape, self.points.tobytes()))


def check_same_ground(*objs):
    """Raise unless every object (anything with ``.ground``) shares one ground set."""
    grounds = [o.ground if not isinstance(o, GroundSet) else o for o in objs]
    first = grounds[0]
    for g in grounds[1:]:
        if g != first:
            raise GroundSetMismatchError("objects are defined over different ground sets")
    return first


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """A [0,1]-valued function on a ground set, stored as its output vector."""

    ground: GroundSet
    outputs: np.ndarray

    def __post_init__(self):
        out = np.asarray(self.outputs, dtype=np.float64).reshape(-1)
        if out.shape[0] != self.ground.size:
            raise GroundSetMismatchError(
                f"hypothesis has {out.shape[0]} outputs for a ground set of size {self.ground.size}"
            )
        if not np.all((out >= 0.0) & (out <= 1.0)):
            raise PreconditionError("hypothesis outputs must lie in [0, 1]")
        object.__setattr__(self, "outputs", _frozen(out))

    @property
    def binary(self) -> bool:
        return bool(np.all((self.outputs == 0.0) | (self.outputs == 1.0)))

    def __eq__(self, other):
        if not isinstance(other, Hypothesis):
            return NotImplemented
        return self.ground == other.ground and bool(np.array_equal(self.outputs, other.outputs))

    def __hash__(self):
        return hash(self.outputs.tobytes())

    def __repr__(self):
        return f"Hypothesis({self.outputs.tolist()})"


class HypothesisClass:
    """Finite, ordered, duplicate-free set of hypotheses with a declared VC dimension.

    Members are stored row-wise in ``matrix`` (shape ``(k, n)``); the row
    order is the canonical member order used for every tie-break.
    """

    def __init__(self, ground: GroundSet, vectors, vc_dim: int):
        if int(vc_dim) != vc_dim or vc_dim < 1:
            raise PreconditionError("vc_dim must be a positive integer")
        rows = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]
        if not rows:
            raise PreconditionError("hypothesis class must have at least one member")
        seen = set()
        kept = []
        for r in rows:
            if r.shape[0] != ground.size:
                raise GroundSetMismatchError("member length does not match the ground set")
            if not np.all((r >= 0.0) & (r <= 1.0)):
                raise PreconditionError("member outputs must lie in [0, 1]")
            key = r.tobytes()
            if key not in seen:
                seen.add(key)
                kept.append(r)
        self.ground = ground
        self.vc_dim = int(vc_dim)
        self.matrix = _frozen(np.vstack(kept))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def __len__(self):
        return self.size

    def __getitem__(self, i) -> Hypothesis:
        return Hypothesis(self.ground, self.matrix[i])

    def __iter__(self):
        return (self[i] for i in range(self.size))

    @property
    def members(self) -> list[Hypothesis]:
        return list(self)

    @property
    def binary(self) -> bool:
        return bool(np.all((self.matrix == 0.0) | (self.matrix == 1.0)))

    def index_of(self, h: Hypothesis) -> int | None:
        check_same_ground(self, h)
        hits = np.flatnonzero(np.all(self.matrix == h.outputs[None, :], axis=1))
        return int(hits[0]) if hits.size else None

    def __contains__(self, h) -> bool:
        return isinstance(h, Hypothesis) and h.ground == self.ground and self.index_of(h) is not None

    def with_member(self, vector) -> "HypothesisClass":
        """A new class with ``vector`` appended (no-op if already present)."""
        return HypothesisClass(self.ground, list(self.matrix) + [np.asarray(vector, dtype=np.float64)], self.vc_dim)

    def __repr__(self):
        return f"HypothesisClass(size={self.size}, vc_dim={self.vc_dim}, n={self.ground.size})"


def zero_one_risk_terms(h: Hypothesis, f: Hypothesis) -> np.ndarray:
    """Per-point loss ``|h(x) - f(x)|``."""
    check_same_ground(h, f)
    return np.abs(h.outputs - f.outputs)


def sym_diff(h: Hypothesis, h2: Hypothesis) -> Hypothesis:
    """Pointwise XOR of two binary hypotheses."""
    check_same_ground(h, h2)
    if not (h.binary and h2.binary):
        raise PreconditionError("XOR is only defined for binary hypotheses")
    return Hypothesis(h.ground, np.logical_xor(h.outputs > 0.5, h2.outputs > 0.5).astype(np.float64))


def threshold_cut_points(ground: GroundSet) -> np.ndarray:
    x = ground.points[:, 0]
    mids = (x[1:] + x[:-1]) / 2.0
    return np.concatenate(([x[0] - 1.0], mids, [x[-1] + 1.0]))


def make_threshold_class(ground: GroundSet) -> HypothesisClass:
    """All threshold classifiers ``1[s (x - t) >= 0]`` on a 1-d ground set.

    Cut points ``t`` are the midpoints between consecutive ground points plus
    one point outside each end; ``s`` ranges over both orientations.
    """
    if ground.dim != 1:
        raise UnsupportedClassError("threshold classes are only defined on 1-d ground sets")
    x = ground.points[:, 0]
    vectors = []
    for t in threshold_cut_points(ground):
        for s in (1.0, -1.0):
            vectors.append((s * (x - t) >= 0.0).astype(np.float64))
    return HypothesisClass(ground, vectors, vc_dim=2)


def make_finite_class(output_vectors: Sequence[Iterable[float]], vc_dim: int,
                      ground: GroundSet | None = None) -> HypothesisClass:
    """Explicit class from output vectors; defaults to ground points ``0..n-1``."""
    vectors = [np.asarray(v, dtype=np.float64).reshape(-1) for v in output_vectors]
    if not vectors:
        raise PreconditionError("output_vectors must be non-empty")
    n = vectors[0].shape[0]
    if any(v.shape[0] != n for v in vectors):
        raise PreconditionError("all output vectors must share one length")
    if ground is None:
        ground = GroundSet(np.arange(n, dtype=np.float64))
    return HypothesisClass(ground, vectors, vc_dim)
