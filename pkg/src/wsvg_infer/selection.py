"""Top-1 selection among the N boundary spans predicted for one query."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .core import TemporalSpan, temporal_iou
from .errors import ValidationError


class SelectionStrategy(str, Enum):
    IOU = "iou"
    LOSS = "loss"
    IOU_LOSS_SUM = "iou-loss-sum"
    IOU_LOSS_MAX = "iou-loss-max"

    @classmethod
    def parse(cls, token: str) -> "SelectionStrategy":
        try:
            return cls(token.strip().lower().replace("_", "-"))
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValidationError(f"unknown selection strategy {token!r}; valid: {valid}") from None

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    SelectionStrategy.IOU: "IoU",
    SelectionStrategy.LOSS: "Loss",
    SelectionStrategy.IOU_LOSS_SUM: "IoU+LossSum",
    SelectionStrategy.IOU_LOSS_MAX: "IoU+LossMax",
}


@dataclass(frozen=True)
class SelectionResult:
    """``winner_index`` is 1-based. ``scores`` are higher-is-better for every strategy."""

    winner_index: int
    scores: tuple[float, ...]
    tie: bool = False


def pairwise_iou_matrix(spans: Sequence[TemporalSpan]) -> list[list[float]]:
    n = len(spans)
    if n and any(s.unit is not spans[0].unit for s in spans):
        raise ValidationError("spans passed to pairwise_iou_matrix mix units")
    matrix = [[0.0] * n for _ in range(n)]
    for i in range(n):
        matrix[i][i] = temporal_iou(spans[i], spans[i])
        for j in range(i + 1, n):
            matrix[i][j] = matrix[j][i] = temporal_iou(spans[i], spans[j])
    return matrix


def vote_totals(matrix: Sequence[Sequence[float]]) -> list[float]:
    """Sum of each proposal's IoU with every *other* proposal."""
    return [math.fsum(v for j, v in enumerate(row) if j != i) for i, row in enumerate(matrix)]


def loss_weights(losses: Sequence[float], strategy: SelectionStrategy) -> list[float] | None:
    """Per-proposal weights ``1 - L / sum(L)`` or ``1 - L / max(L)``.

    Returns None when the weights carry no information (zero denominator or
    every weight zero); callers then fall back to plain IoU voting.
    """
    denom = math.fsum(losses) if strategy is SelectionStrategy.IOU_LOSS_SUM else max(losses)
    if denom <= 0.0:
        return None
    weights = [1.0 - loss / denom for loss in losses]
    if all(w == 0.0 for w in weights):
        return None
    return weights


def argmax_first(scores: Sequence[float]) -> tuple[int, bool]:
    """0-based index of the maximum, lowest index on ties, plus whether a tie occurred."""
    best = max(scores)
    hits = [i for i, s in enumerate(scores) if s == best]
    return hits[0], len(hits) > 1


def _check_inputs(spans: Sequence[TemporalSpan], losses: Sequence[float]) -> None:
    if not spans:
        raise ValidationError("selection needs at least one span")
    if len(spans) != len(losses):
        raise ValidationError(f"{len(spans)} spans but {len(losses)} losses")
    for i, loss in enumerate(losses, 1):
        if not (loss >= 0.0) or math.isinf(loss):
            raise ValidationError(f"loss of proposal {i} must be finite and >= 0, got {loss}")


def select_top1(
    spans: Sequence[TemporalSpan], losses: Sequence[float], strategy: SelectionStrategy
) -> SelectionResult:
    strategy = SelectionStrategy(strategy)
    _check_inputs(spans, losses)

    if strategy is SelectionStrategy.LOSS:
        best = min(losses)
        hits = [i for i, loss in enumerate(losses) if loss == best]
        # negated loss over its maximum: unchanged when every loss is rescaled
        top = max(losses)
        scores = tuple(-loss / top if top > 0.0 else 0.0 for loss in losses)
        return SelectionResult(hits[0] + 1, scores, len(hits) > 1)

    votes = vote_totals(pairwise_iou_matrix(spans))
    if strategy is SelectionStrategy.IOU:
        idx, tie = argmax_first(votes)
        return SelectionResult(idx + 1, tuple(votes), tie)

    weights = loss_weights(losses, strategy)
    if weights is None:
        idx, _ = argmax_first(votes)
        return SelectionResult(idx + 1, tuple(votes), False)
    scores = [w * v for w, v in zip(weights, votes)]
    idx, tie = argmax_first(scores)
    return SelectionResult(idx + 1, tuple(scores), tie)
