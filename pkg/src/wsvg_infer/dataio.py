"""Readers and writers for proposals, predictions, ground truth and reports.

Proposals, predictions and native ground truth are JSON Lines (one record per
line, UTF-8). Floats are written with ``repr`` precision so a write/read round
trip is lossless.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .boundary import BoundaryStrategy
from .core import MixtureProposal, QueryCase, SpanUnit, TemporalSpan
from .errors import DuplicateQueryError, ValidationError
from .metrics import AblationReport, EvalReport
from .records import GroundTruthAnnotation, PredictionRecord
from .selection import SelectionStrategy

logger = logging.getLogger(__name__)

RENORMALIZE_TOL = 1e-4
# sums already this close to 1 are kept verbatim so round trips stay lossless
RENORMALIZE_SKIP = 1e-12

PathLike = str | os.PathLike


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _iter_jsonl(path: PathLike) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{line_no}: malformed JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ValidationError(f"{path}:{line_no}: expected a JSON object")
            yield line_no, obj


def _field(obj: Mapping[str, Any], name: str, where: str) -> Any:
    try:
        return obj[name]
    except KeyError:
        raise ValidationError(f"{where}: missing field {name!r}") from None


def _number(value: Any, name: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: field {name!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{where}: field {name!r} must be finite")
    return value


def _numbers(value: Any, name: str, where: str) -> list[float]:
    if not isinstance(value, list):
        raise ValidationError(f"{where}: field {name!r} must be a list of numbers")
    return [_number(v, name, where) for v in value]


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temp file in the same directory so failures leave no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_jsonl(rows: Iterable[dict[str, Any]]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, allow_nan=False) + "\n" for r in rows)


def repair_span(start: float, end: float, duration: float, where: str) -> tuple[float, float]:
    """Swap reversed bounds and clamp to [0, duration], warning on every repair."""
    if start > end:
        logger.warning("%s: start %s > end %s, swapping", where, start, end)
        start, end = end, start
    cs, ce = min(max(start, 0.0), duration), min(max(end, 0.0), duration)
    if (cs, ce) != (start, end):
        logger.warning("%s: span (%s, %s) clamped to [0, %s]", where, start, end, duration)
    return cs, ce


# ---------------------------------------------------------------------------
# proposals
# ---------------------------------------------------------------------------


def _parse_proposal(obj: Any, where: str) -> MixtureProposal:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: proposal must be an object")
    centers = _numbers(_field(obj, "centers", where), "centers", where)
    widths = _numbers(_field(obj, "widths", where), "widths", where)
    attention = _numbers(_field(obj, "attention", where), "attention", where)
    loss = _number(_field(obj, "recon_loss", where), "recon_loss", where)
    if len(centers) != len(widths) or len(centers) != len(attention):
        raise ValidationError(
            f"{where}: centers/widths/attention lengths differ ({len(centers)}, {len(widths)}, {len(attention)})"
        )
    if any(w <= 0.0 for w in widths):
        raise ValidationError(f"{where}: field 'widths' must be > 0, got {widths}")
    if any(a < 0.0 for a in attention):
        raise ValidationError(f"{where}: field 'attention' must be >= 0, got {attention}")
    total = math.fsum(attention)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise ValidationError(f"{where}: field 'attention' sums to {total!r}, expected 1")
    if abs(total - 1.0) > RENORMALIZE_SKIP:
        attention = [a / total for a in attention]
    try:
        return MixtureProposal.from_arrays(centers, widths, attention, loss)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def proposals_from_record(obj: Mapping[str, Any], where: str = "record") -> QueryCase:
    qid = _field(obj, "query_id", where)
    if not isinstance(qid, str) or not qid:
        raise ValidationError(f"{where}: field 'query_id' must be a non-empty string")
    where = f"{where} (query {qid})"
    props = _field(obj, "proposals", where)
    if not isinstance(props, list) or not props:
        raise ValidationError(f"{where}: field 'proposals' must be a non-empty list")
    num_segments = _field(obj, "num_segments", where)
    if isinstance(num_segments, bool) or not isinstance(num_segments, int):
        raise ValidationError(f"{where}: field 'num_segments' must be an integer")
    try:
        return QueryCase(
            query_id=qid,
            video_id=str(_field(obj, "video_id", where)),
            duration_sec=_number(_field(obj, "duration_sec", where), "duration_sec", where),
            num_segments=num_segments,
            proposals=tuple(_parse_proposal(p, f"{where} proposal {i}") for i, p in enumerate(props, 1)),
        )
    except ValidationError as exc:
        if where in str(exc):
            raise
        raise ValidationError(f"{where}: {exc}") from None


def proposals_to_record(case: QueryCase) -> dict[str, Any]:
    return {
        "query_id": case.query_id,
        "video_id": case.video_id,
        "duration_sec": case.duration_sec,
        "num_segments": case.num_segments,
        "proposals": [
            {
                "centers": list(p.centers),
                "widths": list(p.widths),
                "attention": list(p.attention),
                "recon_loss": p.recon_loss,
            }
            for p in case.proposals
        ],
    }


def read_proposals(path: PathLike) -> list[QueryCase]:
    cases = [proposals_from_record(obj, f"{path}:{n}") for n, obj in _iter_jsonl(path)]
    _reject_duplicates([c.query_id for c in cases], str(path))
    return cases


def write_proposals(cases: Sequence[QueryCase], path: PathLike) -> None:
    atomic_write_text(path, _dump_jsonl(proposals_to_record(c) for c in cases))


def _reject_duplicates(ids: Sequence[str], where: str) -> None:
    seen, dupes = set(), set()
    for q in ids:
        (dupes if q in seen else seen).add(q)
    if dupes:
        raise DuplicateQueryError(sorted(dupes), where)


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


def prediction_to_record(p: PredictionRecord) -> dict[str, Any]:
    return {
        "query_id": p.query_id,
        "start_sec": p.span_sec.start,
        "end_sec": p.span_sec.end,
        "boundary": p.boundary.value,
        "selector": p.selector.value,
        "winner_index": p.winner_index,
        "score": p.score,
    }


def write_predictions(records: Sequence[PredictionRecord], path: PathLike) -> None:
    rows = sorted(records, key=lambda r: r.query_id)
    atomic_write_text(path, _dump_jsonl(prediction_to_record(r) for r in rows))


def read_predictions(path: PathLike) -> list[PredictionRecord]:
    out = []
    for n, obj in _iter_jsonl(path):
        where = f"{path}:{n}"
        try:
            out.append(
                PredictionRecord(
                    query_id=str(_field(obj, "query_id", where)),
                    span_sec=TemporalSpan(
                        _number(_field(obj, "start_sec", where), "start_sec", where),
                        _number(_field(obj, "end_sec", where), "end_sec", where),
                        SpanUnit.SECONDS,
                    ),
                    boundary=BoundaryStrategy.parse(str(_field(obj, "boundary", where))),
                    selector=SelectionStrategy.parse(str(_field(obj, "selector", where))),
                    winner_index=_field(obj, "winner_index", where),
                    score=_number(_field(obj, "score", where), "score", where),
                )
            )
        except ValidationError as exc:
            if where in str(exc):
                raise
            raise ValidationError(f"{where}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# ground truth
# ---------------------------------------------------------------------------


def ground_truth_to_record(g: GroundTruthAnnotation) -> dict[str, Any]:
    return {
        "query_id": g.query_id,
        "video_id": g.video_id,
        "duration_sec": g.duration_sec,
        "start_sec": g.span_sec.start,
        "end_sec": g.span_sec.end,
        "sentence": g.sentence,
    }


def write_ground_truth(annotations: Sequence[GroundTruthAnnotation], path: PathLike) -> None:
    atomic_write_text(path, _dump_jsonl(ground_truth_to_record(g) for g in annotations))


def _make_gt(qid: str, vid: str, duration: float, start: float, end: float, sentence: str, where: str):
    if not (duration > 0.0):
        raise ValidationError(f"{where}: video {vid} has non-positive duration {duration}")
    start, end = repair_span(start, end, duration, f"{where} ({qid})")
    return GroundTruthAnnotation(qid, vid, duration, TemporalSpan(start, end, SpanUnit.SECONDS), sentence)


def read_ground_truth(path: PathLike) -> list[GroundTruthAnnotation]:
    out = []
    for n, obj in _iter_jsonl(path):
        where = f"{path}:{n}"
        qid = _field(obj, "query_id", where)
        if not isinstance(qid, str) or not qid:
            raise ValidationError(f"{where}: field 'query_id' must be a non-empty string")
        out.append(
            _make_gt(
                qid,
                str(_field(obj, "video_id", where)),
                _number(_field(obj, "duration_sec", where), "duration_sec", where),
                _number(_field(obj, "start_sec", where), "start_sec", where),
                _number(_field(obj, "end_sec", where), "end_sec", where),
                str(obj.get("sentence", "")),
                where,
            )
        )
    _reject_duplicates([g.query_id for g in out], str(path))
    return out


def read_durations(path: PathLike) -> dict[str, float]:
    """Video durations table: one ``<video_id> <seconds>`` pair per line (comma or whitespace)."""
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{n}: expected '<video_id> <seconds>'")
            try:
                seconds = float(parts[1])
            except ValueError:
                if n == 1:  # header row
                    continue
                raise ValidationError(f"{path}:{n}: non-numeric duration {parts[1]!r}") from None
            out[parts[0]] = seconds
    return out


def read_charades_annotations(path: PathLike, durations: Mapping[str, float]) -> list[GroundTruthAnnotation]:
    """Parse ``<video_id> <start> <end>##<sentence>`` lines.

    Query ids are ``<video_id>#<k>`` with ``k`` counting that video's lines from 0
    in file order.
    """
    out = []
    counters: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            where = f"{path}:{n}"
            line = line.rstrip("\r\n")
            if not line.strip():
                logger.warning("%s: empty line skipped", where)
                continue
            head, sep, sentence = line.partition("##")
            if not sep:
                raise ValidationError(f"{where}: missing '##' separator")
            parts = head.split()
            if len(parts) != 3:
                raise ValidationError(f"{where}: expected '<video_id> <start> <end>' before '##'")
            vid = parts[0]
            try:
                start, end = float(parts[1]), float(parts[2])
            except ValueError:
                raise ValidationError(f"{where}: non-numeric times {parts[1]!r} {parts[2]!r}") from None
            if vid not in durations:
                raise ValidationError(f"{where}: no duration for video {vid}")
            k = counters.get(vid, 0)
            counters[vid] = k + 1
            out.append(_make_gt(f"{vid}#{k}", vid, float(durations[vid]), start, end, sentence.strip(), where))
    return out


def read_activitynet_annotations(path: PathLike) -> list[GroundTruthAnnotation]:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected an object mapping video_id to annotations")
    out = []
    for vid, entry in doc.items():
        where = f"{path} (video {vid})"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        duration = _number(_field(entry, "duration", where), "duration", where)
        stamps = _field(entry, "timestamps", where)
        sentences = _field(entry, "sentences", where)
        if not isinstance(stamps, list) or not isinstance(sentences, list):
            raise ValidationError(f"{where}: timestamps and sentences must be lists")
        if len(stamps) != len(sentences):
            raise ValidationError(
                f"{where}: {len(stamps)} timestamps but {len(sentences)} sentences for video {vid}"
            )
        if duration <= 0.0:
            raise ValidationError(f"{where}: video {vid} has non-positive duration {duration}")
        for i, (stamp, sentence) in enumerate(zip(stamps, sentences)):
            pair = _numbers(stamp, "timestamps", where)
            if len(pair) != 2:
                raise ValidationError(f"{where}: timestamp {i} must be [start, end]")
            out.append(_make_gt(f"{vid}#{i}", vid, duration, pair[0], pair[1], str(sentence).strip(), where))
    return out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _threshold_label(t: float) -> str:
    return f"IoU@{t:g}"


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def report_table(report: AblationReport | EvalReport) -> tuple[list[str], list[list[str]]]:
    """Header and formatted rows for either an ablation grid or a single evaluation."""
    if isinstance(report, EvalReport):
        thresholds = list(report.recall_at)
        header = [_threshold_label(t) for t in thresholds] + ["mIoU", "queries"]
        row = [_fmt(report.recall_at[t]) for t in thresholds] + [_fmt(report.mean_iou), str(report.num_queries)]
        return header, [row]
    header = ["Boundary Prediction", "Top-1 Proposal Selection"]
    header += [_threshold_label(t) for t in report.thresholds] + ["mIoU"]
    rows = []
    for r in report.rows:
        rows.append(
            [r.boundary.label, r.selector.label]
            + [_fmt(r.report.recall_at[t]) for t in report.thresholds]
            + [_fmt(r.report.mean_iou)]
        )
    return header, rows


def format_report(report: AblationReport | EvalReport, fmt: str = "csv") -> str:
    header, rows = report_table(report)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt in ("markdown", "md"):
        lines = ["| " + " | ".join(header) + " |"]
        lines.append("|" + "|".join(":---" if not h.startswith(("IoU@", "mIoU", "queries")) else "---:" for h in header) + "|")
        previous = None
        for row in rows:
            if isinstance(report, AblationReport):
                # group selector sub-rows under one boundary label
                shown = row[0] if row[0] != previous else ""
                previous = row[0]
                row = [shown] + row[1:]
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown report format {fmt!r}; valid: csv, markdown")


def write_report(report: AblationReport | EvalReport, path: PathLike, fmt: str = "csv") -> None:
    atomic_write_text(path, format_report(report, fmt))
