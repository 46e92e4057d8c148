"""
Numerical kernels of the graph decoder: focal loss, node matching cost,
Hungarian assignment, Hungarian and adjacency losses, and the dynamic link
predictor forward pass. Weights and query features are inputs; nothing here
is trained.
"""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel
from scipy.optimize import linear_sum_assignment
from scipy.special import expit

from .config import PROB_EPS
from .errors import ShapeMismatchError
from .logger import logger
from .schema import Assignment, GtNodes, Layer, MatchConfig, PredNodes, QueryFeatures


def focal_matrix(
    s: np.ndarray | float, c: int, alpha: float, gamma: float
) -> np.ndarray:
    """Elementwise focal loss of scores `s` against class `c` (1 or 0); `s` is clamped first."""
    s = np.clip(np.asarray(s, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
    if c == 1:
        return -alpha * (1.0 - s) ** gamma * np.log(s)
    return -(1.0 - alpha) * s**gamma * np.log(1.0 - s)


def focal(s: float, c: int, alpha: float, gamma: float) -> float:
    return float(focal_matrix(s, c, alpha, gamma))


def match_cost(gt: GtNodes, pred: PredNodes, cfg: MatchConfig | None = None) -> np.ndarray:
    """
    K x K matching cost; row i is gt slot i, column k is prediction k.

    Real gt rows: lambda_class * (focal(s_k, 1) - focal(s_k, 0)) + lambda_coord * L1.
    Padding rows (i >= P) are zero.
    """
    cfg = cfg or MatchConfig()
    k, p = pred.k, gt.p
    if p > k:
        raise ShapeMismatchError(f"{p} ground-truth nodes but only {k} predictions")
    cost = np.zeros((k, k), dtype=np.float64)
    if p == 0:
        return cost
    class_term = focal_matrix(pred.scores, 1, cfg.alpha, cfg.gamma) - focal_matrix(
        pred.scores, 0, cfg.alpha, cfg.gamma
    )
    l1 = np.abs(gt.coords[:, None, :] - pred.coords[None, :, :]).sum(axis=2)
    cost[:p] = cfg.lambda_class * class_term[None, :] + cfg.lambda_coord * l1
    return cost


def _optimum(cost: np.ndarray) -> float:
    if cost.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def hungarian(cost: np.ndarray) -> Assignment:
    """
    Minimum-cost assignment of rows to columns.

    Among optimal assignments the lexicographically smallest is returned:
    row by row, the smallest column that still allows the optimum is taken.
    Totals within 1e-9 * max(1, |optimum|) count as optimal.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ShapeMismatchError(f"cost matrix must be square, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")

    best = _optimum(cost)
    tolerance = 1e-9 * max(1.0, abs(best))
    size = cost.shape[0]
    free = list(range(size))
    sigma: list[int] = []
    spent = 0.0
    for row in range(size):
        block = cost[row:, free]
        if np.all(block == block[:, :1]):
            # every remaining row is indifferent between the free columns
            sigma.extend(free)
            break
        for col in free:
            others = [c for c in free if c != col]
            total = spent + cost[row, col] + _optimum(cost[row + 1 :][:, others])
            if total <= best + tolerance:
                break
        sigma.append(col)
        spent += cost[row, col]
        free.remove(col)
    return Assignment(sigma=tuple(sigma))


def _as_samples(value, kind: type) -> list:
    return [value] if isinstance(value, kind) else list(value)


def hungarian_loss(
    gt: GtNodes | Sequence[GtNodes],
    pred: PredNodes | Sequence[PredNodes],
    sigma: Assignment | Sequence[Assignment],
    cfg: MatchConfig | None = None,
) -> float:
    """
    Sum over samples and slots of lambda_class * focal(s_sigma(i), c_i) + lambda_coord * L1.

    Padding slots use the negative-class focal term and no coordinate term.
    """
    cfg = cfg or MatchConfig()
    gts = _as_samples(gt, GtNodes)
    preds = _as_samples(pred, PredNodes)
    sigmas = _as_samples(sigma, Assignment)
    if not (len(gts) == len(preds) == len(sigmas)):
        raise ShapeMismatchError(
            f"{len(gts)} ground truths, {len(preds)} predictions and {len(sigmas)} assignments"
        )

    total = 0.0
    for g, p, a in zip(gts, preds, sigmas, strict=True):
        if len(a.sigma) != p.k or max(a.sigma, default=-1) >= p.k:
            raise ShapeMismatchError(f"assignment of length {len(a.sigma)} for {p.k} predictions")
        order = np.asarray(a.sigma)
        scores = p.scores[order]
        positive = focal_matrix(scores[: g.p], 1, cfg.alpha, cfg.gamma).sum()
        negative = focal_matrix(scores[g.p :], 0, cfg.alpha, cfg.gamma).sum()
        total += cfg.lambda_class * float(positive + negative)
        total += cfg.lambda_coord * float(np.abs(g.coords - p.coords[order[: g.p]]).sum())
    return total


def adjacency_loss(
    a_gt: np.ndarray | Sequence[np.ndarray],
    a_pred: np.ndarray | Sequence[np.ndarray],
) -> float:
    """
    Class-balanced binary cross-entropy over off-diagonal adjacency entries.

    Positives and negatives each carry weight 0.5, normalised by their totals
    over all samples. A class absent from every sample is dropped with a warning.
    """
    gts = [np.asarray(a_gt)] if np.ndim(a_gt) == 2 else [np.asarray(m) for m in a_gt]
    preds = [np.asarray(a_pred)] if np.ndim(a_pred) == 2 else [np.asarray(m) for m in a_pred]
    if len(gts) != len(preds):
        raise ShapeMismatchError(f"{len(gts)} target and {len(preds)} predicted adjacencies")

    pos_sum = neg_sum = 0.0
    n_pos = n_neg = 0
    for target, prob in zip(gts, preds, strict=True):
        if target.shape != prob.shape or target.ndim != 2 or target.shape[0] != target.shape[1]:
            raise ShapeMismatchError(
                f"adjacency shapes {target.shape} and {prob.shape} are not matching squares"
            )
        off = ~np.eye(target.shape[0], dtype=bool)
        positive = (target > 0) & off
        negative = (target == 0) & off
        prob = np.clip(prob.astype(np.float64), PROB_EPS, 1.0 - PROB_EPS)
        pos_sum += float(np.log(prob[positive]).sum())
        neg_sum += float(np.log(1.0 - prob[negative]).sum())
        n_pos += int(positive.sum())
        n_neg += int(negative.sum())

    loss = 0.0
    if n_pos:
        loss -= 0.5 / n_pos * pos_sum
    else:
        logger.warning("⚠️ no positive adjacency entries; positive term dropped")
    if n_neg:
        loss -= 0.5 / n_neg * neg_sum
    else:
        logger.warning("⚠️ no negative adjacency entries; negative term dropped")
    return loss


class OpCounter(BaseModel):
    """Multiply-add counts of one link_forward call, by stage."""

    mlp: int = 0
    bilinear: int = 0

    @property
    def total(self) -> int:
        return self.mlp + self.bilinear


def _mlp(layers: Sequence[Layer], x: np.ndarray, counter: OpCounter | None) -> np.ndarray:
    for k, layer in enumerate(layers):
        if x.shape[1] != layer.weight.shape[0]:
            raise ShapeMismatchError(
                f"layer {k} expects {layer.weight.shape[0]} inputs, got {x.shape[1]}"
            )
        x = x @ layer.weight + layer.bias
        if counter is not None:
            counter.mlp += x.shape[0] * layer.weight.shape[0] * layer.weight.shape[1]
        if k < len(layers) - 1:
            x = np.maximum(x, 0.0)
    return x


def link_forward(q: QueryFeatures, counter: OpCounter | None = None) -> np.ndarray:
    """
    P x P link probabilities from matched queries.

    Each query yields a per-node weight vector W_p = ConditionMLP(q_p) of
    length D + 1; V = ValueMLP(Q) is P x D; row p is sigmoid(W_p[:D] . V^T + W_p[D]).
    The MLPs run once per query, so their cost grows linearly in P.
    """
    weights = _mlp(q.condition_mlp, q.queries, counter)
    values = _mlp(q.value_mlp, q.queries, counter)
    dim = values.shape[1]
    if weights.shape[1] != dim + 1:
        raise ShapeMismatchError(
            f"condition MLP gives {weights.shape[1]} outputs, value MLP {dim}; need {dim + 1}"
        )
    logits = weights[:, :dim] @ values.T + weights[:, dim:]
    if counter is not None:
        counter.bilinear += weights.shape[0] * values.shape[0] * dim
    return expit(logits)
