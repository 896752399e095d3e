"""Boundary prediction: map one proposal's mask endpoints to a normalized span."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .core import EndpointVectors, MixtureProposal, SpanUnit, TemporalSpan, compute_endpoints
from .errors import ValidationError


class BoundaryStrategy(str, Enum):
    LONG_TAIL = "long-tail"
    SHORT_TAIL = "short-tail"
    SHORTEST_TAIL = "shortest-tail"
    AVERAGE = "average"
    ATTENTION = "attention"

    @classmethod
    def parse(cls, token: str) -> "BoundaryStrategy":
        try:
            return cls(token.strip().lower().replace("_", "-"))
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValidationError(f"unknown boundary strategy {token!r}; valid: {valid}") from None

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    BoundaryStrategy.LONG_TAIL: "Long Tail",
    BoundaryStrategy.SHORT_TAIL: "Short Tail",
    BoundaryStrategy.SHORTEST_TAIL: "Shortest Tail",
    BoundaryStrategy.AVERAGE: "Average",
    BoundaryStrategy.ATTENTION: "Attention",
}


@dataclass(frozen=True)
class BoundaryOutcome:
    span: TemporalSpan
    degenerate: bool = False


def central_index(num_masks: int) -> int:
    """0-based index of the central mask, floor((M + 1) / 2) in 1-based terms."""
    return (num_masks + 1) // 2 - 1


def _pooled(values: Sequence[float], weights: Sequence[float] | None, lo: float, hi: float) -> float:
    if weights is None:
        value = math.fsum(values) / len(values)
    else:
        value = math.fsum(w * v for w, v in zip(weights, values))
    # a convex combination cannot leave [min, max]; keep rounding from doing so
    return min(hi, max(lo, value))


def predict_boundary(
    endpoints: EndpointVectors, attention: Sequence[float], strategy: BoundaryStrategy
) -> BoundaryOutcome:
    strategy = BoundaryStrategy(strategy)
    m = len(endpoints)
    if len(attention) != m:
        raise ValidationError(f"attention length {len(attention)} != endpoint count {m}")
    ls, rs = endpoints.left_sorted, endpoints.right_sorted

    if strategy is BoundaryStrategy.LONG_TAIL or (strategy is BoundaryStrategy.SHORT_TAIL and m == 1):
        s, e = ls[0], rs[-1]
    elif strategy is BoundaryStrategy.SHORT_TAIL:
        s, e = ls[1], rs[m - 2]
    elif strategy is BoundaryStrategy.SHORTEST_TAIL:
        k = central_index(m)
        s, e = ls[k], rs[k]
    elif strategy is BoundaryStrategy.AVERAGE:
        s = _pooled(ls, None, ls[0], ls[-1])
        e = _pooled(rs, None, rs[0], rs[-1])
    else:
        # raw mask order keeps each endpoint paired with its own weight
        s = _pooled(endpoints.left_raw, attention, ls[0], ls[-1])
        e = _pooled(endpoints.right_raw, attention, rs[0], rs[-1])

    s, e = max(s, 0.0), min(e, 1.0)
    degenerate = s > e
    if degenerate:
        s, e = e, s
    return BoundaryOutcome(TemporalSpan(s, e, SpanUnit.NORMALIZED), degenerate)


def proposal_boundary(
    proposal: MixtureProposal, strategy: BoundaryStrategy, gamma: float = 1.0
) -> BoundaryOutcome:
    return predict_boundary(compute_endpoints(proposal, gamma), proposal.attention, strategy)
