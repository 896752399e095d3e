import csv
import json

import pytest

from wsvg_infer import GroundTruthAnnotation, MixtureProposal, QueryCase, SpanUnit, TemporalSpan, compute_endpoints
from wsvg_infer.cli import file_digest, main, manifest_path
from wsvg_infer.dataio import read_predictions, read_proposals, write_ground_truth, write_proposals


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def minimal_proposals(tmp_path):
    case = QueryCase("q1", "v1", 40.0, 11, (MixtureProposal.from_arrays([0.5], [0.4], [1.0], 2.0),))
    path = tmp_path / "p.jsonl"
    write_proposals([case], path)
    return path


@pytest.fixture
def synth_files(tmp_path):
    p, g = tmp_path / "synth_p.jsonl", tmp_path / "synth_g.jsonl"
    code = run("synth", "--queries", 50, "--seed", 42, "--center-noise", 0.03, "--width-noise", 0.03,
               "--loss-model", "uniform_random", "--out-proposals", p, "--out-gt", g)
    assert code == 0
    return p, g


def read_manifest(out):
    return json.loads(manifest_path(out).read_text())


class TestInfer:
    def test_smoke(self, tmp_path, minimal_proposals):
        out = tmp_path / "pred.jsonl"
        assert run("infer", "--proposals", minimal_proposals, "--boundary", "shortest-tail",
                   "--selector", "iou-loss-max", "--out", out) == 0
        (rec,) = read_predictions(out)
        assert rec.winner_index == 1
        assert (rec.span_sec.start, rec.span_sec.end) == pytest.approx((12.0, 28.0))
        manifest = read_manifest(out)
        assert manifest["inputs"] == {str(minimal_proposals): file_digest(minimal_proposals)}
        assert manifest["outputs"] == {str(out): file_digest(out)}
        assert manifest["config"]["boundary"] == "shortest-tail"

    def test_unknown_token(self, tmp_path, minimal_proposals, capsys):
        out = tmp_path / "pred.jsonl"
        assert run("infer", "--proposals", minimal_proposals, "--boundary", "longest-tail", "--out", out) == 2
        err = capsys.readouterr().err
        assert "long-tail, short-tail, shortest-tail, average, attention" in err
        assert not out.exists()

    def test_gamma_scales_single_mask_spans(self, tmp_path):
        cases_path = tmp_path / "m1.jsonl"
        assert run("synth", "--queries", 10, "--masks", 1, "--proposals", 3, "--center-noise", 0.05,
                   "--width-noise", 0.05, "--seed", 4, "--out-proposals", cases_path,
                   "--out-gt", tmp_path / "m1_gt.jsonl") == 0
        cases = {c.query_id: c for c in read_proposals(cases_path)}
        outs = {}
        for gamma in ("1.0", "0.85"):
            out = tmp_path / f"pred_{gamma}.jsonl"
            assert run("infer", "--proposals", cases_path, "--boundary", "long-tail", "--selector", "loss",
                       "--gamma", gamma, "--out", out) == 0
            outs[gamma] = {r.query_id: r for r in read_predictions(out)}
        for qid, case in cases.items():
            full, narrow = outs["1.0"][qid], outs["0.85"][qid]
            assert full.winner_index == narrow.winner_index
            proposal = case.proposals[narrow.winner_index - 1]
            ep = compute_endpoints(proposal, 0.85)
            expected = (max(ep.left_raw[0], 0.0) * case.duration_sec, min(ep.right_raw[0], 1.0) * case.duration_sec)
            assert (narrow.span_sec.start, narrow.span_sec.end) == pytest.approx(expected, abs=1e-12)

    def test_bad_gamma(self, tmp_path, minimal_proposals):
        assert run("infer", "--proposals", minimal_proposals, "--gamma", "1.5", "--out", tmp_path / "x") == 2
        assert not (tmp_path / "x").exists()

    def test_io_errors(self, tmp_path, minimal_proposals):
        assert run("infer", "--proposals", tmp_path / "missing.jsonl", "--out", tmp_path / "x") == 1
        assert run("infer", "--proposals", minimal_proposals, "--out", tmp_path / "nodir" / "x") == 1

    def test_invalid_input_file(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"query_id": "q"}\n')
        assert run("infer", "--proposals", bad, "--out", tmp_path / "x") == 2


@pytest.fixture
def known_iou_files(tmp_path):
    gt = [GroundTruthAnnotation(q, "v", 10.0, TemporalSpan(0.0, 10.0, SpanUnit.SECONDS)) for q in ("a", "b", "c")]
    write_ground_truth(gt, tmp_path / "gt.jsonl")
    preds = tmp_path / "pred.jsonl"
    preds.write_text(
        "".join(
            json.dumps({"query_id": q, "start_sec": 0.0, "end_sec": e, "boundary": "average",
                        "selector": "iou", "winner_index": 1, "score": 0.0}) + "\n"
            for q, e in (("a", 7.5), ("b", 4.0), ("c", 5.5))
        )
    )
    return preds, tmp_path / "gt.jsonl"


class TestEvaluate:
    def test_known_ious(self, tmp_path, known_iou_files):
        preds, gt = known_iou_files
        out = tmp_path / "eval.csv"
        assert run("evaluate", "--predictions", preds, "--gt", gt, "--thresholds", "0.3,0.5,0.7", "--out", out) == 0
        rows = list(csv.reader(out.open()))
        assert rows == [["IoU@0.3", "IoU@0.5", "IoU@0.7", "mIoU", "queries"],
                        ["1.0000", "0.6667", "0.3333", "0.5667", "3"]]

    def test_perfect(self, tmp_path, synth_files):
        p, g = synth_files
        gt_lines = [json.loads(line) for line in g.read_text().splitlines()]
        preds = tmp_path / "perfect.jsonl"
        preds.write_text("".join(
            json.dumps({"query_id": r["query_id"], "start_sec": r["start_sec"], "end_sec": r["end_sec"],
                        "boundary": "average", "selector": "iou", "winner_index": 1, "score": 0.0}) + "\n"
            for r in gt_lines))
        out = tmp_path / "eval.csv"
        assert run("evaluate", "--predictions", preds, "--gt", g, "--out", out) == 0
        assert out.read_text().splitlines()[1] == "1.0000,1.0000,1.0000,1.0000,50"

    def test_empty_predictions(self, tmp_path, known_iou_files):
        _, gt = known_iou_files
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        assert run("evaluate", "--predictions", empty, "--gt", gt, "--out", tmp_path / "e.csv") == 2

    def test_unmatched_lists_offenders(self, tmp_path, known_iou_files, capsys):
        preds, gt = known_iou_files
        extra = [json.dumps({"query_id": f"zz{i:02d}", "start_sec": 0.0, "end_sec": 1.0, "boundary": "average",
                             "selector": "iou", "winner_index": 1, "score": 0.0}) for i in range(15)]
        preds.write_text(preds.read_text() + "\n".join(extra) + "\n")
        assert run("evaluate", "--predictions", preds, "--gt", gt, "--out", tmp_path / "e.csv") == 2
        err = capsys.readouterr().err
        assert "zz00" in err and "zz09" in err and "zz10" not in err
        assert not (tmp_path / "e.csv").exists()

    def test_charades_ground_truth(self, tmp_path):
        ann = tmp_path / "charades.txt"
        ann.write_text("AO8RW 0.0 6.9##a person is putting a book on a shelf.\n")
        durations = tmp_path / "durations.txt"
        durations.write_text("AO8RW 30.0\n")
        preds = tmp_path / "pred.jsonl"
        preds.write_text(json.dumps({"query_id": "AO8RW#0", "start_sec": 0.0, "end_sec": 6.9, "boundary": "average",
                                     "selector": "iou", "winner_index": 1, "score": 0.0}) + "\n")
        out = tmp_path / "e.md"
        assert run("evaluate", "--predictions", preds, "--gt", ann, "--gt-format", "charades",
                   "--durations", durations, "--format", "markdown", "--out", out) == 0
        assert "| 1.0000 | 1.0000 | 1.0000 | 1.0000 | 1 |" in out.read_text()
        assert run("evaluate", "--predictions", preds, "--gt", ann, "--gt-format", "charades",
                   "--out", out) == 2


class TestAblate:
    def test_full_grid(self, tmp_path, synth_files):
        p, g = synth_files
        out = tmp_path / "grid.md"
        assert run("ablate", "--proposals", p, "--gt", g, "--format", "markdown", "--out", out) == 0
        assert len(out.read_text().splitlines()) == 22

    def test_single_cell_equals_infer_then_evaluate(self, tmp_path, synth_files):
        p, g = synth_files
        grid = tmp_path / "grid.csv"
        assert run("ablate", "--proposals", p, "--gt", g, "--boundaries", "shortest-tail",
                   "--selectors", "iou-loss-max", "--out", grid) == 0
        pred, ev = tmp_path / "pred.jsonl", tmp_path / "eval.csv"
        assert run("infer", "--proposals", p, "--boundary", "shortest-tail", "--selector", "iou-loss-max",
                   "--out", pred) == 0
        assert run("evaluate", "--predictions", pred, "--gt", g, "--out", ev) == 0
        grid_rows = grid.read_text().splitlines()
        assert len(grid_rows) == 2
        assert grid_rows[1].split(",")[2:] == ev.read_text().splitlines()[1].split(",")[:4]

    def test_repeatable(self, tmp_path, synth_files):
        p, g = synth_files
        outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for out in outs:
            assert run("ablate", "--proposals", p, "--gt", g, "--out", out, "--workers", 3) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        ma, mb = read_manifest(outs[0]), read_manifest(outs[1])
        for m in (ma, mb):
            m.pop("timestamp")
            m["config"].pop("out")
            m["outputs"] = list(m["outputs"].values())
        assert ma == mb

    def test_threads_env(self, tmp_path, synth_files, monkeypatch):
        p, g = synth_files
        monkeypatch.setenv("WSVG_INFER_THREADS", "abc")
        assert run("ablate", "--proposals", p, "--gt", g, "--out", tmp_path / "x.csv") == 2
        monkeypatch.setenv("WSVG_INFER_THREADS", "2")
        assert run("ablate", "--proposals", p, "--gt", g, "--out", tmp_path / "x.csv") == 0

    def test_bad_selector_list(self, tmp_path, synth_files, capsys):
        p, g = synth_files
        assert run("ablate", "--proposals", p, "--gt", g, "--selectors", "iou,nms", "--out", tmp_path / "x") == 2
        assert "iou-loss-max" in capsys.readouterr().err


class TestSynth:
    def test_counts_and_determinism(self, tmp_path):
        digests = []
        for tag in ("a", "b"):
            p, g = tmp_path / f"{tag}_p.jsonl", tmp_path / f"{tag}_g.jsonl"
            assert run("synth", "--queries", 50, "--seed", 42, "--out-proposals", p, "--out-gt", g) == 0
            assert len(p.read_text().splitlines()) == 50
            assert len(g.read_text().splitlines()) == 50
            digests.append((file_digest(p), file_digest(g)))
        assert digests[0] == digests[1]

    def test_negative_noise(self, tmp_path):
        assert run("synth", "--center-noise", "-0.1", "--out-proposals", tmp_path / "p",
                   "--out-gt", tmp_path / "g") == 2
        assert not (tmp_path / "p").exists()


class TestRender:
    def test_gaussian_and_inverse(self, tmp_path, minimal_proposals):
        g, inv = tmp_path / "g.csv", tmp_path / "inv.csv"
        assert run("render", "--proposals", minimal_proposals, "--query-id", "q1", "--out", g) == 0
        assert run("render", "--proposals", minimal_proposals, "--query-id", "q1", "--shape", "inverse_gaussian",
                   "--out", inv) == 0
        rows = list(csv.DictReader(g.open()))
        inv_rows = list(csv.DictReader(inv.open()))
        assert len(rows) == 11
        values = [float(r["value"]) for r in rows]
        assert values.index(max(values)) + 1 == 6
        assert all(float(a["value"]) + float(b["value"]) == 1.0 for a, b in zip(rows, inv_rows))

    def test_unknown_query(self, tmp_path, minimal_proposals):
        assert run("render", "--proposals", minimal_proposals, "--query-id", "nope", "--out", tmp_path / "x") == 2
        assert run("render", "--proposals", minimal_proposals, "--query-id", "q1", "--proposal-index", 2,
                   "--out", tmp_path / "x") == 2
