"""Per-query inference: endpoints -> boundary per proposal -> top-1 selection -> seconds."""

from __future__ import annotations

from dataclasses import dataclass

from .boundary import BoundaryOutcome, BoundaryStrategy, proposal_boundary
from .core import QueryCase, rescale_span
from .errors import ValidationError
from .records import PredictionRecord
from .selection import SelectionResult, SelectionStrategy, select_top1


@dataclass(frozen=True)
class QueryInference:
    record: PredictionRecord
    outcomes: tuple[BoundaryOutcome, ...]
    selection: SelectionResult


def infer_query(
    case: QueryCase,
    boundary: BoundaryStrategy,
    selector: SelectionStrategy,
    gamma: float = 1.0,
) -> QueryInference:
    try:
        outcomes = tuple(proposal_boundary(p, boundary, gamma) for p in case.proposals)
        result = select_top1([o.span for o in outcomes], case.losses, selector)
    except ValidationError as exc:
        raise ValidationError(f"query {case.query_id}: {exc}") from exc
    span = rescale_span(outcomes[result.winner_index - 1].span, case.duration_sec)
    record = PredictionRecord(
        query_id=case.query_id,
        span_sec=span,
        boundary=BoundaryStrategy(boundary),
        selector=SelectionStrategy(selector),
        winner_index=result.winner_index,
        score=result.scores[result.winner_index - 1],
    )
    return QueryInference(record, outcomes, result)


def infer(
    cases: list[QueryCase],
    boundary: BoundaryStrategy,
    selector: SelectionStrategy,
    gamma: float = 1.0,
) -> list[PredictionRecord]:
    return [infer_query(c, boundary, selector, gamma).record for c in cases]
