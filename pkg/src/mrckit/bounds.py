"""Training-time risk guarantees: upper bound, lower-bound LP, worst-case LP.

The upper bound is the achieved dual objective.  The lower bound solves a
linear program whose constraints cap the linear scores by the model's own
per-pattern losses; the worst-case program bounds any rule's expected loss
from above over the box.  Both programs restrict attention to the observed
constraint patterns, matching how the models were trained.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AlphaLoss,
    BoundReport,
    ConstraintAtoms,
    ExpectationBox,
    LogLoss,
    Loss,
    MrcModel,
    ZeroOneLoss,
)
from .predictors import alpha_probs
from .simplex import OPTIMAL, solve_lp

__all__ = [
    "upper_bound",
    "atom_loss_table",
    "loss_table_for_rule",
    "model_loss_table",
    "lower_bound",
    "lower_bound_over_distributions",
    "worst_case_risk",
    "generalization_slack",
    "bound_report",
]


def upper_bound(model: MrcModel, box: ExpectationBox) -> float:
    """Achieved dual objective: half_width.|w| - midpoint.w - offset."""
    w = model.weights
    return float(box.half_width @ np.abs(w) - box.midpoint @ w - model.offset)


def atom_loss_table(model: MrcModel, atoms: ConstraintAtoms) -> np.ndarray:
    """Per-pattern, per-label loss of the model's own rule, in closed form.

    0-1: 1 - (score + offset + 1)_+ / c_j, falling back to 1 - 1/K when the
    normalizer c_j vanishes.  Log: logsumexp(scores) - score (offset-free).
    Alpha models go through the generic rule-loss route instead.
    """
    scores = atoms.scores(model.weights)
    if isinstance(model.loss, ZeroOneLoss):
        pos = np.clip(scores + model.offset + 1.0, 0.0, None)
        c = pos.sum(axis=1, keepdims=True)
        k = atoms.num_classes
        return np.where(c > 0.0, 1.0 - pos / np.where(c > 0.0, c, 1.0), 1.0 - 1.0 / k)
    if isinstance(model.loss, LogLoss):
        vmax = scores.max(axis=1, keepdims=True)
        lse = vmax + np.log(np.exp(scores - vmax).sum(axis=1, keepdims=True))
        return lse - scores
    raise ValueError(
        "closed-form loss tables exist for 0-1 and log losses only; "
        "use loss_table_for_rule for alpha rules"
    )


def loss_table_for_rule(loss: Loss, rule_rows) -> np.ndarray:
    """Loss of arbitrary conditional rows at every label: table[j, y-1] = L(h_j, y)."""
    H = np.atleast_2d(np.asarray(rule_rows, dtype=np.float64))
    if isinstance(loss, ZeroOneLoss):
        return 1.0 - H
    if isinstance(loss, LogLoss):
        with np.errstate(divide="ignore"):
            return -np.log(H)
    if isinstance(loss, AlphaLoss):
        b = loss.beta
        with np.errstate(divide="ignore"):
            return b * (1.0 - H ** (1.0 / b))
    raise TypeError(f"unsupported loss {loss!r}")


def model_loss_table(model: MrcModel, atoms: ConstraintAtoms) -> np.ndarray:
    """Per-pattern losses of the model's own rule, any loss (alpha included)."""
    if isinstance(model.loss, AlphaLoss):
        rows = alpha_probs(
            atoms.scores(model.weights), model.offset, model.loss.alpha
        )
        return loss_table_for_rule(model.loss, rows)
    return atom_loss_table(model, atoms)


def _score_constraint_rows(atoms: ConstraintAtoms):
    """Rows of f_j(y) over split weights plus the offset pair, one per (j, y)."""
    r, k = atoms.count, atoms.num_classes
    m = atoms.dim
    blk = atoms.block_size
    n_rows = r * k
    A = np.zeros((n_rows, 2 * m + 2))
    for j in range(r):
        for y in range(k):
            i = j * k + y
            s = y * blk
            A[i, s : s + blk] = atoms.patterns[j]
            A[i, m + s : m + s + blk] = -atoms.patterns[j]
            A[i, 2 * m] = 1.0
            A[i, 2 * m + 1] = -1.0
    return A


def lower_bound(
    model: MrcModel, box: ExpectationBox, atoms: ConstraintAtoms
) -> float:
    """Risk lower bound: the largest box-feasible value of the model's own loss.

    Maximizes midpoint.w - half_width.eta + offset subject to the per-pattern
    score caps given by the model's loss table.  Bounded by construction (the
    offset never exceeds the smallest cap).
    """
    eps = model_loss_table(model, atoms)
    m = atoms.dim
    A = _score_constraint_rows(atoms)
    b = eps.ravel()
    c = np.concatenate(
        [
            box.half_width - box.midpoint,
            box.half_width + box.midpoint,
            [-1.0, 1.0],
        ]
    )
    res = solve_lp(c, A, b, ["<="] * A.shape[0], [True] * (2 * m + 2))
    if res.status != OPTIMAL:
        raise RuntimeError(f"lower-bound LP ended with status {res.status}")
    return float(-res.value)


def lower_bound_over_distributions(
    model: MrcModel, box: ExpectationBox, atoms: ConstraintAtoms
) -> float:
    """Same bound from the other side: cheapest box-feasible distribution on atoms.

    Kept as the duality self-check for ``lower_bound``; the two optima must
    agree to solver precision.
    """
    eps = model_loss_table(model, atoms)
    return _distribution_lp(eps, box, atoms, maximize=False)


def _distribution_lp(eps, box, atoms, maximize):
    r, k = atoms.count, atoms.num_classes
    m = atoms.dim
    blk = atoms.block_size
    E = np.zeros((m, r * k))
    for j in range(r):
        for y in range(k):
            E[y * blk : (y + 1) * blk, j * k + y] = atoms.patterns[j]
    A = np.vstack([E, E, np.ones((1, r * k))])
    b = np.concatenate([box.upper, box.lower, [1.0]])
    senses = ["<="] * m + [">="] * m + ["="]
    c = eps.ravel().copy()
    if maximize:
        c = -c
    res = solve_lp(c, A, b, senses, [True] * (r * k))
    if res.status != OPTIMAL:
        raise RuntimeError(f"distribution-form LP ended with status {res.status}")
    return float(-res.value if maximize else res.value)


def worst_case_risk(
    loss_table, box: ExpectationBox, atoms: ConstraintAtoms
) -> float:
    """Largest box-feasible expected loss of an arbitrary rule.

    ``loss_table`` holds the rule's loss at every (pattern, label).  Solves
    the program whose constraints force the score plus offset below the
    negated losses; its optimum dominates the rule's expected loss under every
    distribution the box admits.
    """
    eps = np.atleast_2d(np.asarray(loss_table, dtype=np.float64))
    if eps.shape != (atoms.count, atoms.num_classes):
        raise ValueError(
            f"loss table has shape {eps.shape}, need ({atoms.count}, {atoms.num_classes})"
        )
    m = atoms.dim
    A = _score_constraint_rows(atoms)
    b = -eps.ravel()
    c = np.concatenate([-box.lower, box.upper, [-1.0, 1.0]])
    res = solve_lp(c, A, b, ["<="] * A.shape[0], [True] * (2 * m + 2))
    if res.status != OPTIMAL:
        raise RuntimeError(f"worst-case LP ended with status {res.status}")
    return float(res.value)


def generalization_slack(widths, weights, n: int) -> dict:
    """Additive finite-sample terms reported with the upper bound.

    ``interval_slack`` caps the interval-trained model's regret against the
    infinite-sample entropy; ``point_slack`` the point-trained one's against
    its own objective.  Both shrink as O(1/sqrt(n)); both vanish for zero
    widths or zero weights.
    """
    widths = np.asarray(widths, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    lead = float(np.max(np.abs(widths), initial=0.0))
    l1 = float(np.abs(weights).sum())
    base = lead * l1 / float(np.sqrt(n))
    return {"interval_slack": 2.0 * base, "point_slack": base}


def bound_report(
    model: MrcModel,
    box: ExpectationBox,
    atoms: ConstraintAtoms,
    delta: float | None = None,
) -> BoundReport:
    """Upper/lower bounds plus slack terms for a trained model."""
    return BoundReport(
        upper=upper_bound(model, box),
        lower=lower_bound(model, box, atoms),
        delta=delta,
        slack_terms=generalization_slack(box.widths, model.weights, box.n),
    )
