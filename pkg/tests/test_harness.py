import json

import pytest

from streamsim import (
    PolicyConfig,
    RunConfig,
    load_corpus,
    make_random_corpus,
    run_eval,
    sweep,
    write_corpus,
)
from streamsim.harness import CSV_HEADER, make_clock, read_emission_log, write_curve_svg
from streamsim.simulate import FixedCostClock, SystemClock

ANALYTIC_ROW = {
    "id": "seg-0000",
    "duration_ms": 1500,
    "reference": "a b c",
    "script": {"script_tokens": ["a", "b", "c"], "alignment": [1, 2, 3]},
}


def corpus_file(tmp_path, rows, name="corpus.jsonl"):
    path = tmp_path / name
    write_corpus(rows, path)
    return path


def analytic_corpus(tmp_path, n=10):
    rows = []
    for i in range(n):
        row = dict(ANALYTIC_ROW)
        row["id"] = f"seg-{i:04d}"
        rows.append(row)
    return corpus_file(tmp_path, rows)


def test_run_eval_writes_manifest_logs_and_report(tmp_path):
    out = tmp_path / "out"
    cfg = RunConfig(
        corpus=analytic_corpus(tmp_path),
        policy=PolicyConfig(kind="alignatt", f=1),
        out_dir=out,
        clock="zero",
    )
    outcome = run_eval(cfg)
    assert outcome.ok
    assert (out / "manifest.json").exists()
    assert (out / "report.json").exists()
    entries = read_emission_log(out / "emissions.jsonl")
    assert len(entries) == 10
    report = json.loads((out / "report.json").read_text())
    # analytic value for the 3x500ms AlignAtt f=1 segment
    assert report["latency"]["ideal"]["mean"]["AL"] == 1000.0
    for seg_report in report["latency"]["ideal"]["segments"]:
        assert set(seg_report) == {"segment_id", "mode", "AL", "LAAL", "ATD"}


def test_run_eval_bleu_identity_on_scripted_corpus(tmp_path):
    # never-emit-early wait-k reproduces the scripts, which are the references
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, make_random_corpus(10, seed=13, min_tokens=5)),
        policy=PolicyConfig(kind="waitk", k=10**6),
        clock="zero",
    )
    outcome = run_eval(cfg)
    assert outcome.report["bleu"] == 100.0


def test_empty_corpus_rejected(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    cfg = RunConfig(corpus=path, policy=PolicyConfig(kind="waitk", k=1))
    with pytest.raises(ValueError):
        run_eval(cfg)


def test_reference_free_corpus_has_no_bleu(tmp_path):
    row = {k: v for k, v in ANALYTIC_ROW.items() if k != "reference"}
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, [row]),
        policy=PolicyConfig(kind="waitk", k=1),
        clock="zero",
    )
    outcome = run_eval(cfg)
    assert outcome.report["bleu"] is None
    assert outcome.report["latency"]["ideal"]["mean"]["AL"] is not None


def test_failed_segments_are_collected_and_run_continues(tmp_path):
    bad = dict(ANALYTIC_ROW, id="bad", script={"script_tokens": ["a"], "alignment": [9]})
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, [ANALYTIC_ROW, bad]),
        policy=PolicyConfig(kind="waitk", k=1),
        clock="zero",
    )
    outcome = run_eval(cfg)
    assert not outcome.ok
    assert [f["segment_id"] for f in outcome.failures] == ["bad"]
    assert outcome.report["segment_count"] == 1


def test_jobs_do_not_change_results(tmp_path):
    corpus = corpus_file(tmp_path, make_random_corpus(12, seed=42))
    outcomes = []
    for jobs in (1, 4):
        cfg = RunConfig(
            corpus=corpus,
            policy=PolicyConfig(kind="alignatt", f=2),
            jobs=jobs,
            clock="zero",
        )
        outcomes.append(run_eval(cfg))
    assert outcomes[0].log_entries == outcomes[1].log_entries


def test_scripted_overrides(tmp_path):
    overrides = tmp_path / "overrides.json"
    overrides.write_text(json.dumps({"instability_depth": 2}), encoding="utf-8")
    cfg = RunConfig(
        corpus=analytic_corpus(tmp_path, n=1),
        policy=PolicyConfig(kind="waitk", k=1),
        model=f"scripted:{overrides}",
        clock="zero",
    )
    outcome = run_eval(cfg)
    # with depth 2 and k=1, early commits are unstable placeholders
    assert outcome.results[0].final_text != "a b c"


def test_sweep_rows_ordering_and_csv(tmp_path):
    out = tmp_path / "sweep"
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, make_random_corpus(20, seed=3)),
        policy=PolicyConfig(kind="alignatt", f=1),
        out_dir=out,
        clock="zero",
    )
    rows, failures = sweep(cfg, [1, 2])
    assert not failures
    assert len(rows) == 2
    assert rows == sorted(rows, key=lambda r: (r.al, r.param))
    by_param = {r.param: r for r in rows}
    assert by_param[2].al >= by_param[1].al
    csv_text = (out / "curve.csv").read_text()
    lines = csv_text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert all(len(line.split(",")) == 9 for line in lines)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["grid"] == [1, 2]
    assert [p["param"] for p in manifest["points"]] == [1, 2]


def test_sweep_edatt_alpha_ordering(tmp_path):
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, make_random_corpus(20, seed=3)),
        policy=PolicyConfig(kind="edatt", lam=2, alpha=0.1),
        clock="zero",
    )
    rows, _ = sweep(cfg, [0.4, 0.1])
    by_param = {r.param: r for r in rows}
    assert by_param[0.1].al >= by_param[0.4].al


def test_single_point_sweep_matches_run_eval(tmp_path):
    corpus = corpus_file(tmp_path, make_random_corpus(8, seed=6))
    base = RunConfig(
        corpus=corpus, policy=PolicyConfig(kind="alignatt", f=2), clock="zero"
    )
    rows, _ = sweep(base, [2])
    outcome = run_eval(base)
    assert rows[0].bleu == outcome.report["bleu"]
    assert rows[0].al == pytest.approx(
        outcome.report["latency"]["ideal"]["mean"]["AL"] / 1000.0
    )


def test_sweep_reproducibility_bytes(tmp_path):
    corpus = corpus_file(tmp_path, make_random_corpus(15, seed=9))
    texts = []
    for attempt in ("one", "two"):
        out = tmp_path / attempt
        cfg = RunConfig(
            corpus=corpus,
            policy=PolicyConfig(kind="alignatt", f=1),
            out_dir=out,
            seed=9,
            clock="step:200",
        )
        sweep(cfg, [1, 2, 4])
        texts.append((out / "curve.csv").read_bytes())
    assert texts[0] == texts[1]


def test_sweep_rejects_empty_grid(tmp_path):
    cfg = RunConfig(
        corpus=analytic_corpus(tmp_path, 1), policy=PolicyConfig(kind="alignatt", f=1)
    )
    with pytest.raises(ValueError):
        sweep(cfg, [])


def test_svg_rendering(tmp_path):
    corpus = corpus_file(tmp_path, make_random_corpus(10, seed=2))
    cfg = RunConfig(
        corpus=corpus, policy=PolicyConfig(kind="alignatt", f=1), clock="zero"
    )
    rows, _ = sweep(cfg, [1, 4])
    svg_path = tmp_path / "curve.svg"
    write_curve_svg(rows, svg_path)
    text = svg_path.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text


def test_load_corpus_with_features(tmp_path):
    features = tmp_path / "feat.json"
    features.write_text(json.dumps([[0.1, 0.2], [0.3, 0.4]]), encoding="utf-8")
    row = {"id": "ext", "duration_ms": 1000, "audio_features": "feat.json"}
    rows = load_corpus(corpus_file(tmp_path, [row]), chunk_ms=500)
    assert rows[0].segment.chunks[0].payload == (0.1, 0.2)
    assert rows[0].script is None


def test_load_corpus_feature_count_mismatch(tmp_path):
    features = tmp_path / "feat.json"
    features.write_text(json.dumps([[0.1]]), encoding="utf-8")
    row = {"id": "ext", "duration_ms": 1000, "audio_features": "feat.json"}
    with pytest.raises(ValueError):
        load_corpus(corpus_file(tmp_path, [row]), chunk_ms=500)


def test_load_corpus_requires_script_or_features(tmp_path):
    row = {"id": "ext", "duration_ms": 1000}
    with pytest.raises(ValueError):
        load_corpus(corpus_file(tmp_path, [row]), chunk_ms=500)


def test_run_config_mode_flags(tmp_path):
    cfg = RunConfig(
        corpus=analytic_corpus(tmp_path, 1),
        policy=PolicyConfig(kind="waitk", k=1),
        clock="zero",
        modes=("ideal",),
    )
    outcome = run_eval(cfg)
    assert set(outcome.report["latency"]) == {"ideal"}
    with pytest.raises(ValueError):
        RunConfig(
            corpus=analytic_corpus(tmp_path, 1),
            policy=PolicyConfig(kind="waitk", k=1),
            modes=("wallclock",),
        )


def test_sweep_reads_grid_from_config(tmp_path):
    cfg = RunConfig(
        corpus=corpus_file(tmp_path, make_random_corpus(5, seed=8)),
        policy=PolicyConfig(kind="alignatt", f=1),
        clock="zero",
        grid=(1, 2),
    )
    rows, _ = sweep(cfg)
    assert {r.param for r in rows} == {1, 2}


def test_sweep_requires_both_modes(tmp_path):
    cfg = RunConfig(
        corpus=analytic_corpus(tmp_path, 1),
        policy=PolicyConfig(kind="alignatt", f=1),
        modes=("ideal",),
        grid=(1,),
    )
    with pytest.raises(ValueError):
        sweep(cfg)


def test_make_clock_specs():
    assert isinstance(make_clock("real"), SystemClock)
    assert isinstance(make_clock("zero"), FixedCostClock)
    assert make_clock("step:250").cost_ms == 250.0
    with pytest.raises(ValueError):
        make_clock("warp")


def test_make_random_corpus_is_deterministic():
    assert make_random_corpus(5, seed=1) == make_random_corpus(5, seed=1)
    assert make_random_corpus(5, seed=1) != make_random_corpus(5, seed=2)
