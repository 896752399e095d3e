"""Domain types, mask endpoint arithmetic and proposal curve rendering.

All values are immutable after construction and every function here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import ParameterRangeError, ValidationError

ATTENTION_TOL = 1e-6


class SpanUnit(str, Enum):
    NORMALIZED = "normalized"
    SECONDS = "seconds"


class MaskShape(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    INVERSE_GAUSSIAN = "inverse_gaussian"

    @classmethod
    def parse(cls, token: str) -> "MaskShape":
        try:
            return cls(token.replace("-", "_").lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown mask shape {token!r}; valid: {valid}") from None


@dataclass(frozen=True)
class GaussianMask:
    center: float
    width: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.center <= 1.0):
            raise ValidationError(f"mask center must lie in [0, 1], got {self.center}")
        if not (self.width > 0.0) or math.isinf(self.width):
            raise ValidationError(f"mask width must be a positive finite number, got {self.width}")


@dataclass(frozen=True)
class MixtureProposal:
    """One candidate moment: a weighted set of masks plus its reconstruction loss."""

    masks: tuple[GaussianMask, ...]
    attention: tuple[float, ...]
    recon_loss: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "masks", tuple(self.masks))
        object.__setattr__(self, "attention", tuple(float(a) for a in self.attention))
        if not self.masks:
            raise ValidationError("proposal needs at least one mask")
        if len(self.attention) != len(self.masks):
            raise ValidationError(
                f"attention length {len(self.attention)} != mask count {len(self.masks)}"
            )
        if any(not (a >= 0.0) for a in self.attention):
            raise ValidationError(f"attention weights must be >= 0, got {list(self.attention)}")
        total = math.fsum(self.attention)
        if abs(total - 1.0) > ATTENTION_TOL:
            raise ValidationError(f"attention weights sum to {total!r}, expected 1")
        if not (self.recon_loss >= 0.0) or math.isinf(self.recon_loss):
            raise ValidationError(f"recon_loss must be finite and >= 0, got {self.recon_loss}")

    @classmethod
    def from_arrays(
        cls,
        centers: Sequence[float],
        widths: Sequence[float],
        attention: Sequence[float],
        recon_loss: float = 0.0,
    ) -> "MixtureProposal":
        if len(centers) != len(widths):
            raise ValidationError(f"centers length {len(centers)} != widths length {len(widths)}")
        masks = tuple(GaussianMask(float(c), float(w)) for c, w in zip(centers, widths))
        return cls(masks, tuple(attention), float(recon_loss))

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(m.center for m in self.masks)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(m.width for m in self.masks)

    def __len__(self) -> int:
        return len(self.masks)


@dataclass(frozen=True)
class QueryCase:
    query_id: str
    video_id: str
    duration_sec: float
    num_segments: int
    proposals: tuple[MixtureProposal, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "proposals", tuple(self.proposals))
        if not self.query_id:
            raise ValidationError("query_id must be non-empty")
        if not (self.duration_sec > 0.0) or math.isinf(self.duration_sec):
            raise ValidationError(f"query {self.query_id}: duration_sec must be > 0, got {self.duration_sec}")
        if isinstance(self.num_segments, bool) or int(self.num_segments) != self.num_segments or self.num_segments < 1:
            raise ValidationError(f"query {self.query_id}: num_segments must be an integer >= 1")
        if not self.proposals:
            raise ValidationError(f"query {self.query_id}: at least one proposal is required")

    @property
    def losses(self) -> list[float]:
        return [p.recon_loss for p in self.proposals]


@dataclass(frozen=True)
class TemporalSpan:
    start: float
    end: float
    unit: SpanUnit = SpanUnit.NORMALIZED

    def __post_init__(self) -> None:
        object.__setattr__(self, "unit", SpanUnit(self.unit))
        if math.isnan(self.start) or math.isnan(self.end):
            raise ValidationError("span bounds must not be NaN")
        if self.start > self.end:
            raise ValidationError(f"span start {self.start} > end {self.end}")
        if self.unit is SpanUnit.NORMALIZED and (self.start < 0.0 or self.end > 1.0):
            raise ValidationError(f"normalized span ({self.start}, {self.end}) outside [0, 1]")

    @property
    def length(self) -> float:
        return self.end - self.start


def temporal_iou(a: TemporalSpan, b: TemporalSpan) -> float:
    """Intersection over union of two spans sharing a unit.

    Two identical zero-length spans have IoU 1; any other pairing with an
    empty union scores 0.
    """
    if a.unit is not b.unit:
        raise ValidationError(f"cannot compare spans in {a.unit.value} and {b.unit.value}")
    inter = max(0.0, min(a.end, b.end) - max(a.start, b.start))
    union = a.length + b.length - inter
    if union <= 0.0:
        return 1.0 if (a.start, a.end) == (b.start, b.end) else 0.0
    return min(1.0, inter / union)


@dataclass(frozen=True)
class EndpointVectors:
    left_sorted: tuple[float, ...]
    right_sorted: tuple[float, ...]
    left_raw: tuple[float, ...]
    right_raw: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.left_raw)


def compute_endpoints(proposal: MixtureProposal, gamma: float = 1.0) -> EndpointVectors:
    """Left/right points ``c -/+ gamma * w / 2`` of every mask, in mask order and sorted.

    Endpoints are not clamped to [0, 1] here.
    """
    if not (0.0 < gamma <= 1.0):
        raise ParameterRangeError(f"gamma must lie in (0, 1], got {gamma}")
    left = tuple(m.center - gamma * m.width / 2.0 for m in proposal.masks)
    right = tuple(m.center + gamma * m.width / 2.0 for m in proposal.masks)
    return EndpointVectors(tuple(sorted(left)), tuple(sorted(right)), left, right)


def _mask_value(x: float, center: float, width: float, shape: MaskShape) -> float:
    if shape is MaskShape.LAPLACE:
        return math.exp(-abs(x - center) / width)
    # sigma = width: boundaries at c -/+ w/2 sit half a standard deviation from the mean
    return math.exp(-((x - center) ** 2) / (2.0 * width * width))


def render_proposal_curve(
    proposal: MixtureProposal, num_segments: int, shape: MaskShape = MaskShape.GAUSSIAN
) -> list[float]:
    """Sample the attention-weighted mask mixture at ``num_segments`` positions t/(T-1).

    Diagnostics only; boundary and selection code never looks at sampled curves.
    """
    shape = MaskShape(shape)
    if num_segments < 2:
        raise ParameterRangeError(f"num_segments must be >= 2 to render a curve, got {num_segments}")
    if shape is MaskShape.INVERSE_GAUSSIAN:
        # weights sum to one, so the mixture of (1 - g_i) equals 1 - mixture of g_i
        return [1.0 - v for v in render_proposal_curve(proposal, num_segments, MaskShape.GAUSSIAN)]
    curve = []
    for t in range(num_segments):
        x = t / (num_segments - 1)
        value = math.fsum(
            a * _mask_value(x, m.center, m.width, shape)
            for m, a in zip(proposal.masks, proposal.attention)
        )
        curve.append(min(1.0, max(0.0, value)))
    return curve


def rescale_span(span: TemporalSpan, duration_sec: float) -> TemporalSpan:
    if span.unit is not SpanUnit.NORMALIZED:
        raise ValidationError("rescale_span expects a normalized span")
    if not (duration_sec > 0.0) or math.isinf(duration_sec):
        raise ParameterRangeError(f"duration must be > 0, got {duration_sec}")
    return TemporalSpan(span.start * duration_sec, span.end * duration_sec, SpanUnit.SECONDS)
