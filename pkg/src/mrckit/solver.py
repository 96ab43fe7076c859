"""Learning minimax risk classifiers from the reduced dual objective.

The full dual over (weights, eta, offset) collapses to an unconstrained
convex problem in the weights alone: eta is optimal at |weights| because the
box has nonnegative width, and the offset is optimal at the smallest of the
per-pattern maxima

    offset_j(w) = max { o : per-loss constraint holds at pattern j }.

These maxima have closed forms for 0-1 and log losses and a monotone
bisection for alpha losses.  Training minimizes

    F(w) = half_width . |w| - midpoint . w - min_j offset_j(w)

by subgradient descent (all losses) or, for 0-1 loss, exactly via the
subset-constraint LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    MAX_CLASSES_EXACT_LP,
    AlphaLoss,
    ConstraintAtoms,
    ExpectationBox,
    LogLoss,
    Loss,
    MrcModel,
    ZeroOneLoss,
    beta_of_alpha,
)
from .simplex import OPTIMAL, solve_lp

__all__ = [
    "SolverConfig",
    "ReducedObjective",
    "max_offset_zero_one",
    "max_offset_log",
    "max_offset_alpha",
    "subgradient_minimize",
    "train_mrc",
    "train_zero_one_exact",
    "dual_feasibility_residual",
]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the subgradient path and the alpha-offset bisection."""

    max_iters: int = 20000
    tol: float = 1e-6
    step_rule: str = "diminishing"  # c/sqrt(t), or "constant" for c
    c: float = 0.3
    seed: int = 0
    bisection_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.step_rule not in ("diminishing", "constant"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


def max_offset_zero_one(values, return_support=False):
    """Largest offset o with sum_y (v_y + o + 1)_+ <= 1, rows of ``values``.

    Equals min over nonempty label subsets C of (1 - sum_C (v_y + 1)) / |C|;
    the minimizing C of size k collects the k largest scores, so a sorted
    prefix scan suffices.  With ``return_support`` also returns, per row, the
    sorted label order and the minimizing prefix size (deterministic
    tie-breaks: stable sort, smallest k).
    """
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    order = np.argsort(-v, axis=1, kind="stable")
    sv = np.take_along_axis(v, order, axis=1)
    k = np.arange(1, v.shape[1] + 1, dtype=np.float64)
    cand = (1.0 - np.cumsum(sv, axis=1) - k) / k
    kstar = np.argmin(cand, axis=1)
    offsets = cand[np.arange(v.shape[0]), kstar]
    if np.asarray(values).ndim == 1:
        if return_support:
            return float(offsets[0]), order[0], int(kstar[0]) + 1
        return float(offsets[0])
    if return_support:
        return offsets, order, kstar + 1
    return offsets


def max_offset_log(values):
    """Largest offset with sum_y exp(v_y + o) <= 1, i.e. -logsumexp(values)."""
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    vmax = v.max(axis=1)
    out = -(vmax + np.log(np.exp(v - vmax[:, None]).sum(axis=1)))
    return out if np.asarray(values).ndim > 1 else float(out[0])


def _alpha_constraint(values, offsets, beta):
    """sum_y ((v_y + o)/beta + 1)_+^beta per row; +inf marks infeasibility
    for beta < 0 (a clamped base makes the constraint unattainable)."""
    t = (values + offsets[:, None]) / beta + 1.0
    if beta > 0:
        return (np.clip(t, 0.0, None) ** beta).sum(axis=1)
    out = np.where((t > 0.0).all(axis=1), 0.0, np.inf)
    safe = np.clip(t, 1e-300, None)
    finite = np.isfinite(out)
    out[finite] = (safe[finite] ** beta).sum(axis=1)
    return out


def max_offset_alpha(values, alpha, tol=1e-10):
    """Largest offset keeping the alpha-loss dual constraint feasible, by bisection.

    The constraint value is nondecreasing in the offset for both beta > 1 and
    beta < 0, which the bracket check verifies before bisecting.  Returns the
    feasible (lower) end of the final bracket.
    """
    beta = beta_of_alpha(alpha)
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    k = v.shape[1]
    vmax = v.max(axis=1)
    if beta > 0:
        lo = -beta - vmax
        hi = -vmax
    else:
        lo = -vmax - abs(beta) * (k ** (1.0 / abs(beta)) - 1.0) - 1.0
        hi = -v.min(axis=1)
    width = hi - lo
    for _ in range(200):  # monotonicity makes the initial bracket valid; belt and braces
        bad_lo = _alpha_constraint(v, lo, beta) > 1.0
        bad_hi = _alpha_constraint(v, hi, beta) < 1.0
        if not (bad_lo.any() or bad_hi.any()):
            break
        lo = np.where(bad_lo, lo - width, lo)
        hi = np.where(bad_hi, hi + width, hi)
        width = hi - lo
    else:
        raise RuntimeError("alpha offset bracket failed to enclose a root")
    while (hi - lo).max() > tol:
        mid = 0.5 * (lo + hi)
        feasible = _alpha_constraint(v, mid, beta) <= 1.0
        lo = np.where(feasible, mid, lo)
        hi = np.where(feasible, hi, mid)
    out = lo
    return out if np.asarray(values).ndim > 1 else float(out[0])


def atom_offsets(loss: Loss, scores, bisection_tol=1e-10):
    """Per-pattern largest feasible offsets for an (r, K) score matrix."""
    if isinstance(loss, ZeroOneLoss):
        return max_offset_zero_one(scores)
    if isinstance(loss, LogLoss):
        return max_offset_log(scores)
    if isinstance(loss, AlphaLoss):
        return max_offset_alpha(scores, loss.alpha, tol=bisection_tol)
    raise TypeError(f"no dual offset for loss {loss!r}")


@dataclass(frozen=True)
class ReducedObjective:
    """The eliminated dual objective F(w) and one of its subgradients."""

    loss: Loss
    box: ExpectationBox
    atoms: ConstraintAtoms
    bisection_tol: float = 1e-10

    def __post_init__(self):
        if self.box.dim != self.atoms.dim:
            raise ValueError(
                f"box dimension {self.box.dim} != atoms dimension {self.atoms.dim}"
            )

    def offsets(self, weights) -> np.ndarray:
        return atom_offsets(self.loss, self.atoms.scores(weights), self.bisection_tol)

    def best_offset(self, weights) -> float:
        return float(self.offsets(weights).min())

    def value(self, weights) -> float:
        w = np.asarray(weights, dtype=np.float64)
        return float(
            self.box.half_width @ np.abs(w)
            - self.box.midpoint @ w
            - self.offsets(w).min()
        )

    def value_and_subgradient(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        scores = self.atoms.scores(w)
        K = self.atoms.num_classes
        blk = self.atoms.block_size

        if isinstance(self.loss, ZeroOneLoss):
            offs, order, ksz = max_offset_zero_one(scores, return_support=True)
            j = int(np.argmin(offs))
            weights_y = np.zeros(K)
            weights_y[order[j, : ksz[j]]] = 1.0 / ksz[j]
        elif isinstance(self.loss, LogLoss):
            offs = max_offset_log(scores)
            j = int(np.argmin(offs))
            s = scores[j] - scores[j].max()
            weights_y = np.exp(s)
            weights_y /= weights_y.sum()
        elif isinstance(self.loss, AlphaLoss):
            offs = max_offset_alpha(scores, self.loss.alpha, self.bisection_tol)
            j = int(np.argmin(offs))
            beta = self.loss.beta
            t = np.clip((scores[j] + offs[j]) / beta + 1.0, 0.0, None)
            weights_y = np.where(t > 0.0, t ** (beta - 1.0), 0.0)
            weights_y /= weights_y.sum()
        else:
            raise TypeError(f"no dual offset for loss {self.loss!r}")

        # d(-min_j offset_j)/dw: the chosen pattern scattered into each label
        # block with the per-label weights above.
        grad_offset = np.outer(weights_y, self.atoms.patterns[j]).ravel()
        value = float(
            self.box.half_width @ np.abs(w) - self.box.midpoint @ w - offs[j]
        )
        grad = self.box.half_width * np.sign(w) - self.box.midpoint + grad_offset
        return value, grad


def subgradient_minimize(value_and_grad, dim: int, cfg: SolverConfig):
    """Generic best-iterate subgradient loop from the zero start.

    Subgradient steps are not descent steps, so the running best is tracked
    and returned along with a convergence flag (no significant improvement of
    the best value over the trailing window).
    """
    w = np.zeros(dim)
    best_w = w.copy()
    best_value = math.inf
    window = max(100, cfg.max_iters // 20)
    snapshot = math.inf
    for t in range(1, cfg.max_iters + 1):
        value, grad = value_and_grad(w)
        if value < best_value:
            best_value = value
            best_w = w.copy()
        if t == cfg.max_iters - window:
            snapshot = best_value
        step = cfg.c / math.sqrt(t) if cfg.step_rule == "diminishing" else cfg.c
        w = w - step * grad
    converged = snapshot - best_value <= cfg.tol * (1.0 + abs(best_value))
    return best_w, best_value, bool(converged)


def train_mrc(
    loss: Loss,
    box: ExpectationBox,
    atoms: ConstraintAtoms,
    cfg: SolverConfig = SolverConfig(),
    feature_map=None,
) -> MrcModel:
    """Minimize the reduced dual by subgradient descent, keeping the best iterate.

    Non-convergence within the budget is reported on the model, not raised.
    """
    objective = ReducedObjective(loss, box, atoms, cfg.bisection_tol)
    best_w, _, converged = subgradient_minimize(
        objective.value_and_subgradient, box.dim, cfg
    )
    offset = objective.best_offset(best_w)
    value = float(
        box.half_width @ np.abs(best_w) - box.midpoint @ best_w - offset
    )
    return MrcModel(
        loss=loss,
        weights=best_w,
        offset=offset,
        objective_value=value,
        num_classes=atoms.num_classes,
        feature_map=feature_map,
        converged=bool(converged),
    )


def train_zero_one_exact(
    box: ExpectationBox,
    atoms: ConstraintAtoms,
    cfg: SolverConfig = SolverConfig(),
    feature_map=None,
) -> MrcModel:
    """Exact 0-1 training via the LP with one row per (pattern, label subset).

    The subset constraints linearize the positive parts; the row count is
    r * (2^K - 1), so the class count is capped.
    """
    K = atoms.num_classes
    if K > MAX_CLASSES_EXACT_LP:
        raise ValueError(
            f"exact LP path supports at most {MAX_CLASSES_EXACT_LP} classes, got {K}"
        )
    m = atoms.dim
    r = atoms.count
    masks = np.array(
        [[(s >> y) & 1 for y in range(K)] for s in range(1, 2**K)], dtype=np.float64
    )
    sizes = masks.sum(axis=1)

    rows = []
    rhs = []
    for j in range(r):
        G = atoms.group(j)  # (K, m)
        AwC = masks @ G  # (S, m)
        block = np.hstack([AwC, -AwC, sizes[:, None], -sizes[:, None]])
        rows.append(block)
        rhs.append(1.0 - sizes)
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    c = np.concatenate(
        [
            box.half_width - box.midpoint,
            box.half_width + box.midpoint,
            [-1.0, 1.0],
        ]
    )
    res = solve_lp(c, A, b, ["<="] * A.shape[0], [True] * (2 * m + 2))
    if res.status != OPTIMAL:
        # this minimization is always feasible (zero weights, small offset),
        # so a non-optimal status means an unbounded descent: the box admits
        # no distribution on the atom patterns.  Boxes built from data always
        # contain the empirical distribution, so this cannot occur for them.
        raise RuntimeError(
            f"0-1 training LP {res.status}: the box excludes every distribution "
            "supported on the constraint patterns"
        )
    w = res.x[:m] - res.x[m : 2 * m]
    objective = ReducedObjective(ZeroOneLoss(), box, atoms)
    offset = objective.best_offset(w)
    value = float(box.half_width @ np.abs(w) - box.midpoint @ w - offset)
    return MrcModel(
        loss=ZeroOneLoss(),
        weights=w,
        offset=offset,
        objective_value=value,
        num_classes=atoms.num_classes,
        feature_map=feature_map,
        converged=True,
    )


def dual_feasibility_residual(model: MrcModel, atoms: ConstraintAtoms) -> float:
    """Worst violation of the dual constraint over all patterns (<= 0 is feasible)."""
    raw = atoms.scores(model.weights)
    shifted = raw + model.offset
    if isinstance(model.loss, ZeroOneLoss):
        lhs = np.clip(shifted + 1.0, 0.0, None).sum(axis=1)
        return float((lhs - 1.0).max())
    if isinstance(model.loss, LogLoss):
        vmax = shifted.max(axis=1)
        lhs = vmax + np.log(np.exp(shifted - vmax[:, None]).sum(axis=1))
        return float(lhs.max())
    if isinstance(model.loss, AlphaLoss):
        beta = model.loss.beta
        lhs = _alpha_constraint(raw, np.full(atoms.count, model.offset), beta)
        return float((lhs - 1.0).max())
    raise TypeError(f"no dual constraint for loss {model.loss!r}")
