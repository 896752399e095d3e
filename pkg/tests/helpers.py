"""Random instance builders shared by the property and acceptance tests."""

from __future__ import annotations

import numpy as np

from wsvg_infer import MixtureProposal, SpanUnit, TemporalSpan


def random_proposal(rng: np.random.Generator, m: int, loss: float | None = None) -> MixtureProposal:
    centers = rng.uniform(0.0, 1.0, m)
    widths = rng.uniform(0.01, 0.8, m)
    attention = rng.dirichlet(np.ones(m))
    if loss is None:
        loss = float(rng.uniform(0.0, 5.0))
    return MixtureProposal.from_arrays(centers.tolist(), widths.tolist(), attention.tolist(), loss)


def random_spans(rng: np.random.Generator, n: int) -> list[TemporalSpan]:
    spans = []
    for _ in range(n):
        kind = rng.integers(0, 10)
        if kind == 0 and spans:
            spans.append(spans[int(rng.integers(0, len(spans)))])  # exact duplicate
        elif kind == 1:
            spans.append(TemporalSpan(0.0, 1.0, SpanUnit.NORMALIZED))  # fully clamped
        elif kind == 2:
            x = float(rng.uniform())
            spans.append(TemporalSpan(x, x, SpanUnit.NORMALIZED))  # zero length
        else:
            a, b = sorted(rng.uniform(0.0, 1.0, 2).tolist())
            spans.append(TemporalSpan(a, b, SpanUnit.NORMALIZED))
    return spans


def random_losses(rng: np.random.Generator, n: int) -> list[float]:
    kind = rng.integers(0, 8)
    if kind == 0:
        return [0.0] * n
    if kind == 1:
        return [float(rng.uniform(0.1, 3.0))] * n
    losses = rng.uniform(0.0, 5.0, n)
    if kind == 2:
        losses[rng.integers(0, n)] = 0.0
    return losses.tolist()
