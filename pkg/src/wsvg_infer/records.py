from __future__ import annotations

import math
from dataclasses import dataclass

from .boundary import BoundaryStrategy
from .core import SpanUnit, TemporalSpan
from .errors import ValidationError
from .selection import SelectionStrategy


@dataclass(frozen=True)
class GroundTruthAnnotation:
    query_id: str
    video_id: str
    duration_sec: float
    span_sec: TemporalSpan
    sentence: str = ""

    def __post_init__(self) -> None:
        if not self.query_id:
            raise ValidationError("ground truth query_id must be non-empty")
        if not (self.duration_sec > 0.0) or math.isinf(self.duration_sec):
            raise ValidationError(f"{self.query_id}: duration_sec must be > 0, got {self.duration_sec}")
        if self.span_sec.unit is not SpanUnit.SECONDS:
            raise ValidationError(f"{self.query_id}: ground truth span must be in seconds")
        if self.span_sec.start < 0.0 or self.span_sec.end > self.duration_sec:
            raise ValidationError(
                f"{self.query_id}: span ({self.span_sec.start}, {self.span_sec.end}) "
                f"outside [0, {self.duration_sec}]"
            )


@dataclass(frozen=True)
class PredictionRecord:
    query_id: str
    span_sec: TemporalSpan
    boundary: BoundaryStrategy
    selector: SelectionStrategy
    winner_index: int
    score: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", BoundaryStrategy(self.boundary))
        object.__setattr__(self, "selector", SelectionStrategy(self.selector))
        if not self.query_id:
            raise ValidationError("prediction query_id must be non-empty")
        if self.span_sec.unit is not SpanUnit.SECONDS:
            raise ValidationError(f"{self.query_id}: prediction span must be in seconds")
        if isinstance(self.winner_index, bool) or int(self.winner_index) != self.winner_index or self.winner_index < 1:
            raise ValidationError(f"{self.query_id}: winner_index must be an integer >= 1")
