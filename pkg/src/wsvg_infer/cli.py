"""Command-line front end.

Exit status: 0 on success, 1 on I/O failure, 2 on invalid input. Each output
file gets a ``<output>.manifest.json`` with the resolved configuration and
SHA-256 digests of inputs and outputs.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .boundary import BoundaryStrategy
from .core import MaskShape, render_proposal_curve
from .dataio import (
    atomic_write_text,
    format_report,
    read_activitynet_annotations,
    read_charades_annotations,
    read_durations,
    read_ground_truth,
    read_predictions,
    read_proposals,
    write_ground_truth,
    write_predictions,
    write_proposals,
)
from .errors import ValidationError
from .metrics import (
    DEFAULT_BOUNDARIES,
    DEFAULT_SELECTORS,
    DEFAULT_THRESHOLDS,
    EvalConfig,
    ThresholdMode,
    ablation_grid,
    default_workers,
)
from .metrics import evaluate as evaluate_predictions
from .pipeline import infer
from .selection import SelectionStrategy
from .synth import LossModel, SynthConfig, generate


EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def _token(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def convert(raw: str):
        try:
            return parse(raw)
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return convert


def _token_list(parse: Callable[[str], Any], default: Sequence[Any]) -> Callable[[str], list[Any]]:
    def convert(raw: str):
        if raw.strip().lower() == "all":
            return list(default)
        try:
            return [parse(t) for t in raw.split(",") if t.strip()]
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return convert


def _thresholds(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"thresholds must be comma-separated numbers, got {raw!r}") from None


def _non_negative(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {raw!r}") from None
    if not value >= 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {raw}")
    return value


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {raw}")
    return value


# ---------------------------------------------------------------------------
# manifest and output helpers
# ---------------------------------------------------------------------------


def file_digest(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(out: str | os.PathLike) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value"):
        return value.value
    return value


def _finish(command: str, config: dict[str, Any], inputs: Sequence[str], outputs: Sequence[str]) -> None:
    """Write the manifest next to the first output; drop every output if that fails."""
    manifest = {
        "tool": "wsvg-infer",
        "version": __version__,
        "command": command,
        "config": {k: _jsonable(v) for k, v in config.items()},
        "inputs": {p: file_digest(p) for p in inputs},
        "outputs": {p: file_digest(p) for p in outputs},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    try:
        atomic_write_text(manifest_path(outputs[0]), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except BaseException:
        _remove(outputs)
        raise


def _remove(paths: Sequence[str]) -> None:
    for p in paths:
        try:
            os.unlink(p)
        except FileNotFoundError:
            pass


def _load_ground_truth(args: argparse.Namespace):
    if args.gt_format == "native":
        return read_ground_truth(args.gt)
    if args.gt_format == "activitynet":
        return read_activitynet_annotations(args.gt)
    if not args.durations:
        raise ValidationError("--gt-format charades requires --durations")
    return read_charades_annotations(args.gt, read_durations(args.durations))


def _gt_inputs(args: argparse.Namespace) -> list[str]:
    return [args.gt] + ([args.durations] if getattr(args, "durations", None) else [])


def _eval_config(args: argparse.Namespace) -> EvalConfig:
    return EvalConfig(args.thresholds, args.mode)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_infer(args: argparse.Namespace) -> int:
    cases = read_proposals(args.proposals)
    if not cases:
        raise ValidationError(f"{args.proposals}: no queries")
    records = infer(cases, args.boundary, args.selector, args.gamma)
    write_predictions(records, args.out)
    _finish(
        "infer",
        {"boundary": args.boundary, "selector": args.selector, "gamma": args.gamma,
         "proposals": args.proposals, "out": args.out},
        [args.proposals],
        [args.out],
    )
    print(f"wrote {len(records)} predictions ({args.boundary.value}, {args.selector.value}) to {args.out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    predictions = read_predictions(args.predictions)
    if not predictions:
        raise ValidationError(f"{args.predictions}: no predictions")
    report = evaluate_predictions(predictions, _load_ground_truth(args), _eval_config(args))
    atomic_write_text(args.out, format_report(report, args.format))
    _finish(
        "evaluate",
        {"thresholds": args.thresholds, "threshold_mode": args.mode, "format": args.format,
         "predictions": args.predictions, "gt": args.gt, "gt_format": args.gt_format, "out": args.out},
        [args.predictions] + _gt_inputs(args),
        [args.out],
    )
    recalls = "  ".join(f"IoU@{t:g}={v:.4f}" for t, v in report.recall_at.items())
    print(f"{report.num_queries} queries  {recalls}  mIoU={report.mean_iou:.4f}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    cases = read_proposals(args.proposals)
    if not cases:
        raise ValidationError(f"{args.proposals}: no queries")
    report = ablation_grid(
        cases,
        _load_ground_truth(args),
        args.boundaries,
        args.selectors,
        args.gamma,
        _eval_config(args),
        workers=args.workers,
    )
    text = format_report(report, args.format)
    atomic_write_text(args.out, text)
    _finish(
        "ablate",
        {"boundaries": args.boundaries, "selectors": args.selectors, "gamma": args.gamma,
         "thresholds": args.thresholds, "threshold_mode": args.mode, "format": args.format,
         "proposals": args.proposals, "gt": args.gt, "gt_format": args.gt_format, "out": args.out},
        [args.proposals] + _gt_inputs(args),
        [args.out],
    )
    print(format_report(report, "markdown"), end="")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    config = SynthConfig(
        num_queries=args.queries,
        n_proposals=args.proposals,
        masks_per_proposal=args.masks,
        center_noise_sd=args.center_noise,
        width_noise_sd=args.width_noise,
        loss_model=args.loss_model,
        seed=args.seed,
        num_segments=args.num_segments,
    )
    cases, gt = generate(config)
    try:
        write_proposals(cases, args.out_proposals)
        write_ground_truth(gt, args.out_gt)
    except BaseException:
        _remove([args.out_proposals, args.out_gt])
        raise
    _finish(
        "synth",
        {"queries": args.queries, "proposals": args.proposals, "masks": args.masks,
         "center_noise": args.center_noise, "width_noise": args.width_noise,
         "loss_model": args.loss_model, "seed": args.seed, "num_segments": args.num_segments},
        [],
        [args.out_proposals, args.out_gt],
    )
    print(f"wrote {len(cases)} queries to {args.out_proposals} and {args.out_gt}")
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    matches = [c for c in read_proposals(args.proposals) if c.query_id == args.query_id]
    if not matches:
        raise ValidationError(f"query {args.query_id!r} not found in {args.proposals}")
    case = matches[0]
    if args.proposal_index > len(case.proposals):
        raise ValidationError(
            f"query {case.query_id} has {len(case.proposals)} proposals, asked for {args.proposal_index}"
        )
    segments = args.segments or case.num_segments
    curve = render_proposal_curve(case.proposals[args.proposal_index - 1], segments, args.shape)
    lines = ["segment,position,value"]
    lines += [f"{t},{t / (segments - 1)!r},{v!r}" for t, v in enumerate(curve)]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    _finish(
        "render",
        {"query_id": args.query_id, "proposal_index": args.proposal_index, "shape": args.shape,
         "segments": segments, "proposals": args.proposals, "out": args.out},
        [args.proposals],
        [args.out],
    )
    print(f"wrote {segments}-segment {args.shape.value} curve for {case.query_id} to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gt", required=True, help="ground-truth file")
    p.add_argument("--gt-format", choices=["native", "charades", "activitynet"], default="native")
    p.add_argument("--durations", help="video durations table (required for charades)")
    p.add_argument("--thresholds", type=_thresholds, default=DEFAULT_THRESHOLDS,
                   help="comma-separated IoU thresholds (default 0.3,0.5,0.7)")
    p.add_argument("--mode", type=_token(ThresholdMode.parse), default=ThresholdMode.STRICT_GREATER,
                   help="strict_greater (IoU > m, default) or greater_equal")
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsvg-infer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="top-1 prediction per query")
    p.add_argument("--proposals", required=True, help="proposals JSONL")
    p.add_argument("--boundary", type=_token(BoundaryStrategy.parse), default=BoundaryStrategy.SHORTEST_TAIL,
                   help="long-tail, short-tail, shortest-tail (default), average or attention")
    p.add_argument("--selector", type=_token(SelectionStrategy.parse), default=SelectionStrategy.IOU_LOSS_MAX,
                   help="iou, loss, iou-loss-sum or iou-loss-max (default)")
    p.add_argument("--gamma", type=float, default=1.0, help="endpoint scale in (0, 1] (default 1.0)")
    p.add_argument("--out", required=True, help="predictions JSONL to write")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--predictions", required=True, help="predictions JSONL")
    _add_eval_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="boundary x selector grid")
    p.add_argument("--proposals", required=True, help="proposals JSONL")
    _add_eval_flags(p)
    p.add_argument("--boundaries", type=_token_list(BoundaryStrategy.parse, DEFAULT_BOUNDARIES),
                   default=list(DEFAULT_BOUNDARIES), help="comma-separated strategies or 'all'")
    p.add_argument("--selectors", type=_token_list(SelectionStrategy.parse, DEFAULT_SELECTORS),
                   default=list(DEFAULT_SELECTORS), help="comma-separated selectors or 'all'")
    p.add_argument("--gamma", type=float, default=1.0, help="endpoint scale in (0, 1] (default 1.0)")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker threads (default from WSVG_INFER_THREADS, else 1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("synth", help="generate a seeded synthetic fixture")
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--proposals", type=int, default=5, help="proposals per query")
    p.add_argument("--masks", type=int, default=3, help="Gaussian masks per proposal")
    p.add_argument("--center-noise", type=_non_negative, default=0.0, help="center perturbation sd")
    p.add_argument("--width-noise", type=_non_negative, default=0.0, help="width perturbation sd")
    p.add_argument("--loss-model", type=_token(LossModel.parse), default=LossModel.ONE_MINUS_IOU,
                   help="one_minus_iou (default), uniform_random or constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-segments", type=int, default=64)
    p.add_argument("--out-proposals", required=True)
    p.add_argument("--out-gt", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="sample one proposal's mask mixture as CSV")
    p.add_argument("--proposals", required=True)
    p.add_argument("--query-id", required=True)
    p.add_argument("--proposal-index", type=_positive_int, default=1)
    p.add_argument("--shape", type=_token(MaskShape.parse), default=MaskShape.GAUSSIAN,
                   help="gaussian (default), laplace or inverse-gaussian")
    p.add_argument("--segments", type=_positive_int, default=None, help="override the query's segment count")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) is None:
        try:
            args.workers = default_workers()
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
