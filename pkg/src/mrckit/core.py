"""Shared domain types: losses, datasets, feature maps, moment boxes, models.

Labels are 1-based everywhere a user can see them ({1..K}), matching the
usual convention for class identifiers.  Array indexing is 0-based purely
internally and never leaks into files or CLI output.

All types here are immutable after construction (frozen dataclasses with
read-only numpy buffers) and therefore safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Loss",
    "ZeroOneLoss",
    "LogLoss",
    "AlphaLoss",
    "LogRelativeLoss",
    "ZERO_ONE",
    "LOG",
    "beta_of_alpha",
    "Dataset",
    "FeatureMap",
    "ExpectationBox",
    "ConstraintAtoms",
    "MrcModel",
    "BoundReport",
]

MAX_CLASSES_EXACT_LP = 12  # subset constraints grow as 2^K - 1


def _frozen(a, dtype=np.float64):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


def beta_of_alpha(alpha: float) -> float:
    """Exponent conjugate alpha/(alpha-1) used by the alpha-loss family.

    Finite and nonzero for every valid alpha; >1 when alpha>1, <0 when
    alpha<1.
    """
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    if alpha <= 0.0 or alpha == 1.0:
        raise ValueError(f"alpha must be positive and != 1, got {alpha!r}")
    return alpha / (alpha - 1.0)


class Loss:
    """Base marker for the supported loss families."""

    name = "abstract"

    def __repr__(self):
        return f"{type(self).__name__}()"


@dataclass(frozen=True, repr=False)
class ZeroOneLoss(Loss):
    name = "zero-one"


@dataclass(frozen=True, repr=False)
class LogLoss(Loss):
    name = "log"


@dataclass(frozen=True)
class AlphaLoss(Loss):
    """alpha-loss with exponent beta = alpha/(alpha-1).

    Interpolates between log loss (alpha -> 1) and 0-1 loss (alpha -> inf).
    """

    alpha: float
    name = "alpha"

    def __post_init__(self):
        beta_of_alpha(self.alpha)  # validates

    @property
    def beta(self) -> float:
        return beta_of_alpha(self.alpha)


@dataclass(frozen=True)
class LogRelativeLoss(Loss):
    """Log loss measured relative to a fixed reference label distribution."""

    reference: np.ndarray
    name = "log-relative"

    def __post_init__(self):
        ref = _frozen(self.reference)
        if ref.ndim != 1 or ref.size < 2:
            raise ValueError("reference must be a 1-D distribution over >=2 labels")
        if np.any(ref <= 0.0):
            raise ValueError("reference must be strictly positive")
        if abs(ref.sum() - 1.0) > 1e-12:
            raise ValueError("reference must sum to 1 within 1e-12")
        object.__setattr__(self, "reference", ref)


ZERO_ONE = ZeroOneLoss()
LOG = LogLoss()


@dataclass(frozen=True)
class Dataset:
    """Training or evaluation sample: n instances of D real features, labels in {1..K}."""

    instances: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.instances, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} instances but {y.shape[0]} labels")
        if X.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if not np.all(np.isfinite(X)):
            raise ValueError("instances contain non-finite values")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if y.min() < 1 or y.max() > self.num_classes:
            raise ValueError(f"labels must lie in 1..{self.num_classes}")
        X = _frozen(X)
        y = _frozen(y, dtype=np.int64)
        object.__setattr__(self, "instances", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.instances.shape[0]

    @property
    def dim(self) -> int:
        return self.instances.shape[1]


@dataclass(frozen=True)
class FeatureMap:
    """One-hot label blocks times threshold indicators.

    The per-instance part is [1, 1{x[d_1] <= t_1}, ..., 1{x[d_k] <= t_k}]
    and the full vector for (x, y) places that block at label y, zeros
    elsewhere, so the total dimension is num_classes * (k + 1).
    Threshold dims are 1-based.
    """

    num_classes: int
    thresholds: tuple  # ((dim, value), ...) with dim in 1..D

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        th = tuple((int(d), float(t)) for d, t in self.thresholds)
        for d, t in th:
            if d < 1:
                raise ValueError(f"threshold dimension must be >= 1, got {d}")
            if not math.isfinite(t):
                raise ValueError("threshold values must be finite")
        object.__setattr__(self, "thresholds", th)

    @property
    def num_thresholds(self) -> int:
        return len(self.thresholds)

    @property
    def block_size(self) -> int:
        return len(self.thresholds) + 1

    @property
    def dim(self) -> int:
        """Total feature dimension num_classes * (k + 1)."""
        return self.num_classes * self.block_size

    def indicator_matrix(self, X) -> np.ndarray:
        """Per-instance block [1, indicators] for each row of X, shape (n, k+1)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n = X.shape[0]
        out = np.ones((n, self.block_size))
        for j, (d, t) in enumerate(self.thresholds, start=1):
            if d > X.shape[1]:
                raise ValueError(
                    f"instance has {X.shape[1]} dims but threshold {j} needs dim {d}"
                )
            out[:, j] = X[:, d - 1] <= t
        return out

    def vector(self, x, y: int) -> np.ndarray:
        """Feature vector for a single (instance, label) pair."""
        if not 1 <= y <= self.num_classes:
            raise ValueError(f"label {y} outside 1..{self.num_classes}")
        block = self.indicator_matrix(np.atleast_2d(x))[0]
        out = np.zeros(self.dim)
        s = (y - 1) * self.block_size
        out[s : s + self.block_size] = block
        return out

    def instance_matrix(self, x) -> np.ndarray:
        """All label rows for one instance: shape (K, m) with row y-1 = vector(x, y)."""
        block = self.indicator_matrix(np.atleast_2d(x))[0]
        out = np.zeros((self.num_classes, self.dim))
        for y in range(self.num_classes):
            out[y, y * self.block_size : (y + 1) * self.block_size] = block
        return out

    def score_matrix(self, X, weights) -> np.ndarray:
        """Linear scores vector(x, y) . weights for all rows and labels, shape (n, K)."""
        W = np.asarray(weights, dtype=np.float64).reshape(
            self.num_classes, self.block_size
        )
        return self.indicator_matrix(X) @ W.T

    def structural_range(self):
        """Componentwise (min, max) of the feature vector over all (x, y).

        Indicator blocks move between occupied and unoccupied label slots, so
        with >=2 classes every coordinate attains both 0 and 1.
        """
        lo = np.zeros(self.dim)
        hi = np.ones(self.dim)
        if self.num_classes == 1:  # degenerate, kept for generality
            lo[:: self.block_size] = 1.0
        return lo, hi


@dataclass(frozen=True)
class ExpectationBox:
    """Empirical feature expectations with the interval box around them.

    lower = mean - widths/sqrt(n) and upper = mean + widths/sqrt(n)
    componentwise; widths >= 0.
    """

    mean: np.ndarray
    widths: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n: int

    def __post_init__(self):
        mean = _frozen(self.mean)
        widths = _frozen(self.widths)
        lo = _frozen(self.lower)
        hi = _frozen(self.upper)
        if not (mean.shape == widths.shape == lo.shape == hi.shape):
            raise ValueError("mean, widths, lower, upper must share a shape")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if np.any(widths < 0.0):
            raise ValueError("widths must be componentwise >= 0")
        r = self.n ** -0.5
        if np.max(np.abs(lo - (mean - widths * r)), initial=0.0) > 1e-12:
            raise ValueError("lower endpoint inconsistent with mean - widths/sqrt(n)")
        if np.max(np.abs(hi - (mean + widths * r)), initial=0.0) > 1e-12:
            raise ValueError("upper endpoint inconsistent with mean + widths/sqrt(n)")
        for name, arr in (("mean", mean), ("widths", widths), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, arr)

    @classmethod
    def from_mean(cls, mean, widths, n: int) -> "ExpectationBox":
        mean = np.asarray(mean, dtype=np.float64)
        widths = np.asarray(widths, dtype=np.float64)
        r = n ** -0.5
        return cls(mean, widths, mean - widths * r, mean + widths * r, n)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def half_width(self) -> np.ndarray:
        """(upper - lower) / 2, identical to widths/sqrt(n)."""
        return (self.upper - self.lower) / 2.0

    @property
    def midpoint(self) -> np.ndarray:
        """(upper + lower) / 2."""
        return (self.upper + self.lower) / 2.0


@dataclass(frozen=True)
class ConstraintAtoms:
    """Deduplicated indicator patterns spanning the feature map's observed range.

    Pattern j induces one m-vector per label: the pattern written into that
    label's block.  ``scores(weights)`` is the (r, K) matrix of those
    vectors dotted with a weight vector.
    """

    patterns: np.ndarray  # (r, k+1) 0/1 entries, first column all ones
    num_classes: int

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.patterns, dtype=np.float64))
        if P.shape[0] < 1:
            raise ValueError("need at least one pattern")
        if not np.all((P == 0.0) | (P == 1.0)):
            raise ValueError("patterns must be 0/1 indicator vectors")
        if not np.all(P[:, 0] == 1.0):
            raise ValueError("first pattern slot is the constant-1 feature")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        object.__setattr__(self, "patterns", _frozen(P))

    @property
    def count(self) -> int:
        return self.patterns.shape[0]

    @property
    def block_size(self) -> int:
        return self.patterns.shape[1]

    @property
    def dim(self) -> int:
        return self.num_classes * self.block_size

    def scores(self, weights) -> np.ndarray:
        """(r, K) matrix of per-pattern, per-label linear scores."""
        W = np.asarray(weights, dtype=np.float64).reshape(
            self.num_classes, self.block_size
        )
        return self.patterns @ W.T

    def group(self, j: int) -> np.ndarray:
        """Dense (K, m) matrix of the j-th pattern's per-label vectors."""
        out = np.zeros((self.num_classes, self.dim))
        for y in range(self.num_classes):
            out[y, y * self.block_size : (y + 1) * self.block_size] = self.patterns[j]
        return out


@dataclass(frozen=True)
class MrcModel:
    """A trained minimax risk classifier.

    ``variant`` is "expectation" for box-constrained models carrying a scalar
    offset, or "instance_marginal" for fixed instances'-marginal models whose
    offset is recomputed per instance at prediction time.  The feature map is
    optional so solvers can emit models straight from constraint patterns;
    predicting on raw instances requires one (see ``with_feature_map``).
    """

    loss: Loss
    weights: np.ndarray
    offset: float | None
    objective_value: float
    num_classes: int
    feature_map: FeatureMap | None = None
    variant: str = "expectation"
    converged: bool = True

    def __post_init__(self):
        w = _frozen(self.weights)
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if w.ndim != 1 or w.shape[0] % self.num_classes != 0:
            raise ValueError(
                f"weights of shape {w.shape} do not split into {self.num_classes} label blocks"
            )
        if self.feature_map is not None:
            if self.feature_map.num_classes != self.num_classes:
                raise ValueError("feature map and model disagree on the class count")
            if w.shape != (self.feature_map.dim,):
                raise ValueError(
                    f"weights have shape {w.shape}, feature map needs ({self.feature_map.dim},)"
                )
        if self.variant not in ("expectation", "instance_marginal"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "expectation" and self.offset is None:
            raise ValueError("expectation-constrained models carry a scalar offset")
        if self.variant == "instance_marginal" and self.offset is not None:
            raise ValueError("instance-marginal models recompute the offset per instance")
        object.__setattr__(self, "weights", w)

    @property
    def block_size(self) -> int:
        return self.weights.shape[0] // self.num_classes

    def with_feature_map(self, fm: FeatureMap) -> "MrcModel":
        return MrcModel(
            loss=self.loss,
            weights=self.weights,
            offset=self.offset,
            objective_value=self.objective_value,
            num_classes=self.num_classes,
            feature_map=fm,
            variant=self.variant,
            converged=self.converged,
        )

    def score_matrix(self, X) -> np.ndarray:
        if self.feature_map is None:
            raise ValueError("model carries no feature map; attach one first")
        return self.feature_map.score_matrix(X, self.weights)


@dataclass(frozen=True)
class BoundReport:
    """Risk guarantee certificate: upper/lower bounds plus additive slack terms."""

    upper: float
    lower: float
    delta: float | None = None
    slack_terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper + 1e-8:
            raise ValueError(
                f"lower bound {self.lower} exceeds upper bound {self.upper}"
            )
