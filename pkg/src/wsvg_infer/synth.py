"""Seeded synthetic proposals/ground truth and a brute-force selection oracle.

Randomness comes from numpy's Philox4x64-10 counter-based bit generator. Each
query draws from its own stream keyed by ``SeedSequence(seed, spawn_key=(i,))``
and raw 64-bit outputs are mapped to doubles as ``(x >> 11) * 2**-53``, so
output depends only on the seed and query index, never on the platform, numpy's
distribution code, or generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .boundary import BoundaryStrategy, proposal_boundary
from .core import GaussianMask, MixtureProposal, QueryCase, SpanUnit, TemporalSpan, temporal_iou
from .errors import ParameterRangeError, ValidationError
from .records import GroundTruthAnnotation
from .selection import SelectionResult, SelectionStrategy

MIN_WIDTH = 1e-3
GT_LENGTH_RANGE = (0.1, 0.6)
DURATION_RANGE = (20.0, 150.0)


class LossModel(str, Enum):
    ONE_MINUS_IOU = "one_minus_iou"
    UNIFORM_RANDOM = "uniform_random"
    CONSTANT = "constant"

    @classmethod
    def parse(cls, token: str) -> "LossModel":
        try:
            return cls(token.strip().lower().replace("-", "_"))
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown loss model {token!r}; valid: {valid}") from None


@dataclass(frozen=True)
class SynthConfig:
    num_queries: int = 50
    n_proposals: int = 5
    masks_per_proposal: int = 3
    center_noise_sd: float = 0.0
    width_noise_sd: float = 0.0
    loss_model: LossModel = LossModel.ONE_MINUS_IOU
    seed: int = 0
    num_segments: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "loss_model", LossModel(self.loss_model))
        if self.num_queries < 0:
            raise ParameterRangeError(f"num_queries must be >= 0, got {self.num_queries}")
        if self.n_proposals < 1:
            raise ParameterRangeError(f"n_proposals must be >= 1, got {self.n_proposals}")
        if self.masks_per_proposal < 1:
            raise ParameterRangeError(f"masks_per_proposal must be >= 1, got {self.masks_per_proposal}")
        if not (self.center_noise_sd >= 0.0):
            raise ParameterRangeError(f"center_noise_sd must be >= 0, got {self.center_noise_sd}")
        if not (self.width_noise_sd >= 0.0):
            raise ParameterRangeError(f"width_noise_sd must be >= 0, got {self.width_noise_sd}")
        if self.seed < 0:
            raise ParameterRangeError(f"seed must be >= 0, got {self.seed}")
        if self.num_segments < 2:
            raise ParameterRangeError(f"num_segments must be >= 2, got {self.num_segments}")


class _Stream:
    """Uniform and normal variates from a Philox stream, with a fixed conversion."""

    def __init__(self, seed: int, index: int):
        self._bits = np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,)))

    def uniforms(self, n: int) -> list[float]:
        raw = self._bits.random_raw(n)
        return [int(x >> np.uint64(11)) * 2.0**-53 for x in np.atleast_1d(raw)]

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * self.uniforms(1)[0]

    def normal(self) -> float:
        # Box-Muller; 1 - u keeps the log argument in (0, 1]
        u1, u2 = self.uniforms(2)
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def simplex(self, n: int) -> list[float]:
        e = [-math.log(1.0 - u) + 1e-12 for u in self.uniforms(n)]
        total = math.fsum(e)
        return [x / total for x in e]


def _anchor(stream: _Stream, start: float, end: float, m: int) -> tuple[list[float], list[float], list[float]]:
    """Masks whose attention-pooled endpoints reproduce (start, end)."""
    length, mid = end - start, (start + end) / 2.0
    attention = stream.simplex(m)
    if m == 1:
        return [mid], [length], attention
    raw = [stream.uniform(-1.0, 1.0) for _ in range(m)]
    shift = math.fsum(a * r for a, r in zip(attention, raw))
    offsets = [r - shift for r in raw]
    reach = max(abs(o) for o in offsets) or 1.0
    limit = min(0.25 * length, mid, 1.0 - mid)
    centers = [min(1.0, max(0.0, mid + o * limit / reach)) for o in offsets]
    factors = [stream.uniform(0.5, 1.5) for _ in range(m)]
    pooled = math.fsum(a * f for a, f in zip(attention, factors))
    widths = [length * f / pooled for f in factors]
    return centers, widths, attention


def _perturb(stream: _Stream, centers, widths, scale_c: float, scale_w: float):
    if scale_c > 0.0:
        centers = [min(1.0, max(0.0, c + scale_c * stream.normal())) for c in centers]
    if scale_w > 0.0:
        widths = [max(MIN_WIDTH, w + scale_w * stream.normal()) for w in widths]
    return list(centers), list(widths)


def generate_query(config: SynthConfig, index: int) -> tuple[QueryCase, GroundTruthAnnotation]:
    stream = _Stream(config.seed, index)
    duration = stream.uniform(*DURATION_RANGE)
    length = stream.uniform(*GT_LENGTH_RANGE)
    start = stream.uniform(0.0, 1.0 - length)
    end = min(1.0, start + length)
    gt_norm = TemporalSpan(start, end, SpanUnit.NORMALIZED)

    base_c, base_w, attention = _anchor(stream, start, end, config.masks_per_proposal)
    shapes = []
    for n in range(config.n_proposals):
        # proposal n is perturbed with (n + 1) times the configured noise
        c, w = _perturb(stream, base_c, base_w, (n + 1) * config.center_noise_sd, (n + 1) * config.width_noise_sd)
        shapes.append((c, w))

    proposals = []
    for c, w in shapes:
        draft = MixtureProposal(tuple(GaussianMask(ci, wi) for ci, wi in zip(c, w)), tuple(attention), 0.0)
        if config.loss_model is LossModel.ONE_MINUS_IOU:
            span = proposal_boundary(draft, BoundaryStrategy.ATTENTION).span
            loss = 1.0 - temporal_iou(span, gt_norm)
        elif config.loss_model is LossModel.UNIFORM_RANDOM:
            loss = stream.uniform(0.0, 5.0)
        else:
            loss = 1.0
        proposals.append(MixtureProposal(draft.masks, draft.attention, loss))

    qid, vid = f"synth-{index:05d}", f"video-{index:05d}"
    case = QueryCase(qid, vid, duration, config.num_segments, tuple(proposals))
    gt = GroundTruthAnnotation(
        qid,
        vid,
        duration,
        TemporalSpan(start * duration, end * duration, SpanUnit.SECONDS),
        f"synthetic query {index}",
    )
    return case, gt


def generate(config: SynthConfig) -> tuple[list[QueryCase], list[GroundTruthAnnotation]]:
    pairs = [generate_query(config, i) for i in range(config.num_queries)]
    return [c for c, _ in pairs], [g for _, g in pairs]


# ---------------------------------------------------------------------------
# brute-force oracle (tests only)
# ---------------------------------------------------------------------------


def _oracle_iou(a: TemporalSpan, b: TemporalSpan) -> float:
    lo = a.start if a.start > b.start else b.start
    hi = a.end if a.end < b.end else b.end
    inter = hi - lo if hi > lo else 0.0
    union = (a.end - a.start) + (b.end - b.start) - inter
    if union == 0.0:
        return 1.0 if a.start == b.start and a.end == b.end else 0.0
    return inter / union


def oracle_vote(
    spans: Sequence[TemporalSpan], losses: Sequence[float], strategy: SelectionStrategy
) -> SelectionResult:
    """Literal double-loop transcription of the four selection rules."""
    strategy = SelectionStrategy(strategy)
    n = len(spans)
    if n == 0 or n != len(losses):
        raise ValidationError("oracle_vote needs equally many spans and losses, at least one")
    for loss in losses:
        if loss < 0.0:
            raise ValidationError("losses must be >= 0")

    if strategy is SelectionStrategy.LOSS:
        winner, tie = 0, False
        for i in range(1, n):
            if losses[i] < losses[winner]:
                winner, tie = i, False
            elif losses[i] == losses[winner]:
                tie = True
        top = 0.0
        for loss in losses:
            if loss > top:
                top = loss
        scores = [(-losses[i] / top) if top > 0.0 else 0.0 for i in range(n)]
        return SelectionResult(winner + 1, tuple(scores), tie)

    # exact summation so equal multisets of ballots give bit-equal totals
    votes = []
    for i in range(n):
        ballots = []
        for j in range(n):
            if j != i:
                ballots.append(_oracle_iou(spans[i], spans[j]))
        votes.append(math.fsum(ballots))

    scores = votes
    fallback = False
    if strategy is not SelectionStrategy.IOU:
        if strategy is SelectionStrategy.IOU_LOSS_SUM:
            denom = math.fsum(losses)
        else:
            denom = 0.0
            for loss in losses:
                if loss > denom:
                    denom = loss
        weights = [1.0 - losses[i] / denom for i in range(n)] if denom > 0.0 else [0.0] * n
        if all(w == 0.0 for w in weights):
            fallback = True
        else:
            scores = [weights[i] * votes[i] for i in range(n)]

    winner, tie = 0, False
    for i in range(1, n):
        if scores[i] > scores[winner]:
            winner, tie = i, False
        elif scores[i] == scores[winner]:
            tie = True
    return SelectionResult(winner + 1, tuple(scores), tie and not fallback)
