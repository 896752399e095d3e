"""Recall@IoU and mIoU of top-1 predictions, and the boundary x selector ablation grid."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .boundary import BoundaryStrategy
from .core import QueryCase, TemporalSpan, temporal_iou
from .errors import DuplicateQueryError, ParameterRangeError, UnmatchedQueryError, ValidationError
from .pipeline import infer
from .records import GroundTruthAnnotation, PredictionRecord
from .selection import SelectionStrategy

DEFAULT_THRESHOLDS = (0.3, 0.5, 0.7)
THREADS_ENV = "WSVG_INFER_THREADS"

# row order of the published comparison table
DEFAULT_BOUNDARIES = (
    BoundaryStrategy.LONG_TAIL,
    BoundaryStrategy.SHORT_TAIL,
    BoundaryStrategy.SHORTEST_TAIL,
    BoundaryStrategy.AVERAGE,
    BoundaryStrategy.ATTENTION,
)
DEFAULT_SELECTORS = (
    SelectionStrategy.IOU,
    SelectionStrategy.LOSS,
    SelectionStrategy.IOU_LOSS_MAX,
    SelectionStrategy.IOU_LOSS_SUM,
)


class ThresholdMode(str, Enum):
    STRICT_GREATER = "strict_greater"
    GREATER_EQUAL = "greater_equal"

    @classmethod
    def parse(cls, token: str) -> "ThresholdMode":
        try:
            return cls(token.strip().lower().replace("-", "_"))
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown threshold mode {token!r}; valid: {valid}") from None


@dataclass(frozen=True)
class EvalConfig:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    threshold_mode: ThresholdMode = ThresholdMode.STRICT_GREATER

    def __post_init__(self) -> None:
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "threshold_mode", ThresholdMode(self.threshold_mode))
        if not self.thresholds:
            raise ParameterRangeError("at least one IoU threshold is required")
        for t in self.thresholds:
            if not (0.0 < t < 1.0):
                raise ParameterRangeError(f"thresholds must lie in (0, 1), got {t}")
        if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ParameterRangeError(f"thresholds must be strictly ascending, got {list(self.thresholds)}")

    def hit(self, iou: float, threshold: float) -> bool:
        if self.threshold_mode is ThresholdMode.STRICT_GREATER:
            return iou > threshold
        return iou >= threshold


@dataclass(frozen=True)
class EvalReport:
    recall_at: dict[float, float]
    mean_iou: float
    num_queries: int
    per_query_iou: tuple[tuple[str, float], ...] = field(default=())


def _index_unique(items: Iterable, key, where: str) -> dict:
    out: dict = {}
    dupes = []
    for item in items:
        k = key(item)
        if k in out:
            dupes.append(k)
        out[k] = item
    if dupes:
        raise DuplicateQueryError(sorted(set(dupes)), where)
    return out


def evaluate(
    predictions: Sequence[tuple[str, TemporalSpan]] | Sequence[PredictionRecord],
    ground_truth: Sequence[GroundTruthAnnotation],
    config: EvalConfig | None = None,
) -> EvalReport:
    """Score one top-1 span per query against its ground truth, both in seconds."""
    config = config or EvalConfig()
    pairs = [(p.query_id, p.span_sec) if isinstance(p, PredictionRecord) else tuple(p) for p in predictions]
    if not pairs:
        raise ValidationError("no predictions to evaluate")
    preds = _index_unique(pairs, lambda p: p[0], "predictions")
    gts = _index_unique(ground_truth, lambda g: g.query_id, "ground truth")
    missing_gt = [q for q in preds if q not in gts]
    missing_pred = [q for q in gts if q not in preds]
    if missing_gt or missing_pred:
        raise UnmatchedQueryError(missing_gt, missing_pred)

    per_query = tuple((q, temporal_iou(preds[q][1], gts[q].span_sec)) for q in sorted(preds))
    ious = [v for _, v in per_query]
    n = len(ious)
    recall_at = {t: sum(config.hit(v, t) for v in ious) / n for t in config.thresholds}
    mean_iou = min(max(math.fsum(ious) / n, min(ious)), max(ious))
    return EvalReport(recall_at, mean_iou, n, per_query)


@dataclass(frozen=True)
class AblationRow:
    boundary: BoundaryStrategy
    selector: SelectionStrategy
    report: EvalReport


@dataclass(frozen=True)
class AblationReport:
    thresholds: tuple[float, ...]
    rows: tuple[AblationRow, ...]
    gamma: float = 1.0

    def cell(self, boundary: BoundaryStrategy, selector: SelectionStrategy) -> EvalReport:
        for row in self.rows:
            if row.boundary is boundary and row.selector is selector:
                return row.report
        raise KeyError((boundary, selector))


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def ablation_grid(
    cases: Sequence[QueryCase],
    ground_truth: Sequence[GroundTruthAnnotation],
    boundaries: Sequence[BoundaryStrategy] = DEFAULT_BOUNDARIES,
    selectors: Sequence[SelectionStrategy] = DEFAULT_SELECTORS,
    gamma: float = 1.0,
    config: EvalConfig | None = None,
    workers: int | None = None,
) -> AblationReport:
    """Run the full pipeline for every (boundary, selector) pair, in declared order."""
    config = config or EvalConfig()
    if not boundaries or not selectors:
        raise ValidationError("ablation needs at least one boundary and one selection strategy")
    grid = [(BoundaryStrategy(b), SelectionStrategy(s)) for b in boundaries for s in selectors]

    def run(cell):
        b, s = cell
        return AblationRow(b, s, evaluate(infer(list(cases), b, s, gamma), ground_truth, config))

    workers = workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(run, grid))
    else:
        rows = tuple(run(cell) for cell in grid)
    return AblationReport(config.thresholds, rows, gamma)
