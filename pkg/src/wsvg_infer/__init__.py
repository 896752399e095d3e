"""Inference and evaluation for Gaussian mixture temporal grounding proposals."""

from .boundary import BoundaryOutcome, BoundaryStrategy, predict_boundary, proposal_boundary
from .core import (
    EndpointVectors,
    GaussianMask,
    MaskShape,
    MixtureProposal,
    QueryCase,
    SpanUnit,
    TemporalSpan,
    compute_endpoints,
    render_proposal_curve,
    rescale_span,
    temporal_iou,
)
from .errors import DuplicateQueryError, ParameterRangeError, UnmatchedQueryError, ValidationError
from .metrics import AblationReport, EvalConfig, EvalReport, ThresholdMode, ablation_grid, evaluate
from .pipeline import infer, infer_query
from .records import GroundTruthAnnotation, PredictionRecord
from .selection import SelectionResult, SelectionStrategy, pairwise_iou_matrix, select_top1

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "BoundaryOutcome",
    "BoundaryStrategy",
    "DuplicateQueryError",
    "EndpointVectors",
    "EvalConfig",
    "EvalReport",
    "GaussianMask",
    "GroundTruthAnnotation",
    "MaskShape",
    "MixtureProposal",
    "ParameterRangeError",
    "PredictionRecord",
    "QueryCase",
    "SelectionResult",
    "SelectionStrategy",
    "SpanUnit",
    "TemporalSpan",
    "ThresholdMode",
    "UnmatchedQueryError",
    "ValidationError",
    "ablation_grid",
    "compute_endpoints",
    "evaluate",
    "infer",
    "infer_query",
    "pairwise_iou_matrix",
    "predict_boundary",
    "proposal_boundary",
    "render_proposal_curve",
    "rescale_span",
    "select_top1",
    "temporal_iou",
]
