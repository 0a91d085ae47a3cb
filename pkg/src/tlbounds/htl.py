"""Hypothesis transfer via ridge regression on source-predictor residuals.

The target predictor is ``f(x) = T_C(x . w) + f'(x)`` where ``w`` minimizes
``(1/m) sum_i (u . x_i - y_i + f'(x_i))^2 + lambda_reg |u|^2`` and ``T_C``
clamps to ``[-C, C]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import derive_seed, make_rng
from .errors import PreconditionError


@dataclass(frozen=True, eq=False)
class RegressionSample:
    xs: np.ndarray
    ys: np.ndarray
    B: float = math.inf

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(self.ys, dtype=np.float64).reshape(-1)
        if xs.shape[0] != ys.shape[0] or ys.shape[0] < 1:
            raise PreconditionError("xs and ys must be non-empty and of equal length")
        if np.any(np.abs(ys) > self.B):
            raise PreconditionError(f"labels exceed the declared bound B={self.B}")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def size(self) -> int:
        return self.ys.shape[0]

    def __len__(self):
        return self.size

    def drop(self, i: int) -> "RegressionSample":
        keep = np.arange(self.size) != i
        return RegressionSample(self.xs[keep], self.ys[keep], self.B)

    def take(self, order) -> "RegressionSample":
        return RegressionSample(self.xs[order], self.ys[order], self.B)


@dataclass(frozen=True, eq=False)
class SourcePredictor:
    """Source hypothesis ``f'`` evaluated row-wise on an ``(n, d)`` array."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    sup_norm: float

    def __call__(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs[None, :]
        out = np.asarray(self.evaluate(xs), dtype=np.float64).reshape(-1)
        if np.any(np.abs(out) > self.sup_norm + 1e-12):
            raise PreconditionError("source predictor exceeds its declared sup norm")
        return out

    @classmethod
    def linear(cls, weights, bias: float = 0.0, sup_norm: float | None = None, clip: float | None = None):
        """``f'(x) = w . x + b``, optionally clipped to ``[-clip, clip]``."""
        w = np.asarray(weights, dtype=np.float64).reshape(-1)

        def evaluate(xs):
            out = xs @ w + bias
            return np.clip(out, -clip, clip) if clip is not None else out

        bound = sup_norm if sup_norm is not None else (clip if clip is not None else math.inf)
        return cls(evaluate, bound)

    @classmethod
    def zero(cls):
        return cls(lambda xs: np.zeros(xs.shape[0]), 0.0)


@dataclass(frozen=True, eq=False)
class HTLModel:
    w: np.ndarray
    C: float
    source: SourcePredictor
    lambda_reg: float

    def predict(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs[None, :]
        if xs.shape[1] != self.w.shape[0]:
            raise PreconditionError(f"expected inputs of dimension {self.w.shape[0]}, got {xs.shape[1]}")
        return truncate(xs @ self.w, self.C) + self.source(xs)

    __call__ = predict


def truncate(y, C: float):
    """Clamp to ``[-C, C]``; ``C = inf`` is the identity."""
    if not C > 0:
        raise PreconditionError("truncation level C must be positive")
    if math.isinf(C):
        return y
    out = np.clip(y, -C, C)
    return float(out) if np.ndim(out) == 0 else out


def residuals(S: RegressionSample, source: SourcePredictor) -> np.ndarray:
    return S.ys - source(S.xs)


def htl_objective(u, S: RegressionSample, source: SourcePredictor, lambda_reg: float) -> float:
    r = residuals(S, source)
    u = np.asarray(u, dtype=np.float64)
    return float(np.mean((S.xs @ u - r) ** 2) + lambda_reg * u @ u)


def htl_gradient(u, S: RegressionSample, source: SourcePredictor, lambda_reg: float) -> np.ndarray:
    r = residuals(S, source)
    u = np.asarray(u, dtype=np.float64)
    return 2.0 / S.size * S.xs.T @ (S.xs @ u - r) + 2.0 * lambda_reg * u


def _check_lambda(lambda_reg):
    if not lambda_reg > 0:
        raise PreconditionError("lambda_reg must be positive")


def train_htl(S: RegressionSample, source: SourcePredictor, lambda_reg: float, C: float = math.inf) -> HTLModel:
    """Solve the ridge normal equations directly (LU; exact on 1-D instances)."""
    _check_lambda(lambda_reg)
    if not C > 0:
        raise PreconditionError("truncation level C must be positive")
    m, d = S.xs.shape
    r = residuals(S, source)
    A = S.xs.T @ S.xs / m + lambda_reg * np.eye(d)
    w = np.linalg.solve(A, S.xs.T @ r / m)
    return HTLModel(w, float(C), source, float(lambda_reg))


def htl_predict(model: HTLModel, x) -> float | np.ndarray:
    out = model.predict(x)
    return float(out[0]) if np.ndim(x) == 1 else out


def htl_trainer(source: SourcePredictor, lambda_reg: float, C: float = math.inf):
    """Bind hyperparameters so the result maps a sample to a fitted model."""
    return lambda S: train_htl(S, source, lambda_reg, C)


def loo_risk(S: RegressionSample, trainer: Callable[[RegressionSample], Callable]) -> float:
    """Mean held-out squared loss over ``m`` refits, each without one point."""
    if S.size < 2:
        raise PreconditionError("leave-one-out needs at least two points")
    losses = np.empty(S.size)
    for i in range(S.size):
        f = trainer(S.drop(i))
        losses[i] = (float(np.asarray(f(S.xs[i:i + 1])).reshape(-1)[0]) - S.ys[i]) ** 2
    return float(losses.mean())


def htl_loo_risk(S: RegressionSample, source: SourcePredictor, lambda_reg: float, C: float = math.inf) -> float:
    """Closed-form leave-one-out risk of :func:`train_htl` via the hat matrix.

    Each refit on ``m - 1`` points uses the penalty ``(m - 1) lambda_reg`` in
    unnormalized form, so the hat matrix is built with that penalty.
    """
    _check_lambda(lambda_reg)
    m, d = S.xs.shape
    if m < 2:
        raise PreconditionError("leave-one-out needs at least two points")
    X = S.xs
    f_src = source(X)
    r = S.ys - f_src
    K = np.linalg.solve(X.T @ X + (m - 1) * lambda_reg * np.eye(d), X.T)
    hat_diag = np.einsum("ij,ji->i", X, K)
    fitted = X @ (K @ r)
    loo_fit = r - (r - fitted) / (1.0 - hat_diag)
    pred = truncate(loo_fit, C) + f_src
    return float(np.mean((pred - S.ys) ** 2))


@dataclass(frozen=True, eq=False)
class RegressionDomain:
    """Finite-support regression target: points, probabilities, noiseless labels."""

    points: np.ndarray
    probs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        p = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        ys = np.asarray(self.ys, dtype=np.float64).reshape(-1)
        if not (pts.shape[0] == p.shape[0] == ys.shape[0]):
            raise PreconditionError("points, probs and ys must align")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise PreconditionError("probs must be a probability vector")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", p / p.sum())
        object.__setattr__(self, "ys", ys)

    @property
    def B(self) -> float:
        return float(np.max(np.abs(self.ys)))

    def risk(self, f) -> float:
        """Exact squared-loss risk of a predictor."""
        return float(self.probs @ (np.asarray(f(self.points)).reshape(-1) - self.ys) ** 2)

    def sample(self, m: int, seed) -> RegressionSample:
        if int(m) != m or m < 1:
            raise PreconditionError("sample size must be a positive integer")
        rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
        idx = rng.choice(self.points.shape[0], size=int(m), p=self.probs)
        return RegressionSample(self.points[idx], self.ys[idx], self.B)

    @classmethod
    def synthetic(cls, n: int, dim: int, source_shift: float, noise: float, seed: int):
        """Random support; labels ``w . x + g(x)`` with ``g`` the pair's source predictor.

        Returns ``(domain, source_predictor)``. ``source_shift`` scales the gap
        between the target's and the source's weights; ``noise`` adds a fixed
        per-point offset.
        """
        rng = make_rng(seed)
        pts = rng.uniform(-1.0, 1.0, size=(n, dim))
        w_src = rng.normal(size=dim) / math.sqrt(dim)
        delta_w = source_shift * rng.normal(size=dim) / math.sqrt(dim)
        probs = rng.dirichlet(np.full(n, 5.0))
        ys = pts @ (w_src + delta_w) + noise * rng.normal(size=n)
        src_vals = pts @ w_src
        sup = float(np.max(np.abs(src_vals)))
        return cls(pts, probs, ys), SourcePredictor.linear(w_src, 0.0, sup_norm=sup + 1e-9)


@dataclass
class StabilityResult:
    m: int
    lambda_reg: float
    C: float
    trials: int
    mean_sq_gap: float
    stderr: float
    seed: int
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"m": self.m, "lambda_reg": self.lambda_reg, "C": "inf" if math.isinf(self.C) else self.C,
                "trials": self.trials, "mean_sq_gap": self.mean_sq_gap, "stderr": self.stderr,
                "seed": self.seed, "warnings": list(self.warnings)}

    def csv_row(self) -> list:
        return [self.m, repr(self.lambda_reg), repr(self.C), self.trials,
                repr(self.mean_sq_gap), repr(self.stderr), self.seed]


STABILITY_COLUMNS = ["m", "lambda_reg", "C", "trials", "mean_sq_gap", "stderr", "seed"]


def stability_trial_gap(target: RegressionDomain, source: SourcePredictor, m: int, lambda_reg: float,
                        C: float, seed) -> float:
    """One draw of ``L_T(f) - L_loo(f)`` for a freshly sampled training set."""
    S = target.sample(m, seed)
    model = train_htl(S, source, lambda_reg, C)
    return target.risk(model.predict) - htl_loo_risk(S, source, lambda_reg, C)


def estimate_stability_gap(target: RegressionDomain, source: SourcePredictor, m: int, lambda_reg: float,
                           C: float = math.inf, trials: int = 200, seed: int = 0,
                           B: float | None = None) -> StabilityResult:
    """Monte Carlo mean of the squared true-vs-LOO risk gap, with its standard error.

    Branch preconditions (``C >= B + |f'|_inf`` or ``C = inf``; ``lambda_reg >= 1/m``)
    produce recorded warnings, not errors.
    """
    if trials < 30:
        raise PreconditionError("use at least 30 trials")
    B = target.B if B is None else B
    notes = []
    if not math.isinf(C) and C < B + source.sup_norm:
        notes.append(f"C={C} < B + |f'|_inf = {B + source.sup_norm}; first-branch precondition violated")
    if lambda_reg < 1.0 / m:
        notes.append(f"lambda_reg={lambda_reg} < 1/m={1.0 / m}")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    gaps = np.array([stability_trial_gap(target, source, m, lambda_reg, C, derive_seed(seed, t))
                     for t in range(trials)])
    sq = gaps ** 2
    return StabilityResult(int(m), float(lambda_reg), float(C), int(trials), float(sq.mean()),
                           float(sq.std(ddof=1) / math.sqrt(trials)), int(seed), notes)
