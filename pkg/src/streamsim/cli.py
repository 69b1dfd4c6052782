"""Command-line harness.

Subcommands: ``run`` (one policy over a corpus), ``sweep`` (a grid of one
hyperparameter), ``score`` (corpus BLEU of two text files), ``subtitle``
(tagged text to SRT plus conformity), ``report`` (metrics from an emission
log). Verbosity comes from the STREAMSIM_LOG environment variable.

Exit codes: 0 success, 2 partial segment failures, 1 fatal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bleu import corpus_bleu
from .errors import StreamSimError
from .harness import (
    RunConfig,
    make_random_corpus,
    read_emission_log,
    run_eval,
    sweep,
    write_corpus,
    write_curve_svg,
)
from .latency import compute_report
from .policies import SWEEP_FIELD, PolicyConfig
from .subtitles import assign_timestamps, conformity_report, parse_tagged, write_srt

logger = logging.getLogger("streamsim")

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def _policy_from_args(args) -> PolicyConfig:
    kwargs = {}
    for field_name, attr in (("k", "k"), ("n", "n"), ("lam", "lam"),
                             ("alpha", "alpha"), ("f", "f")):
        value = getattr(args, attr, None)
        if value is not None:
            kwargs[field_name] = value
    return PolicyConfig(kind=args.policy, **kwargs)


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--policy",
        required=True,
        choices=("waitk", "local_agreement", "edatt", "alignatt"),
    )
    parser.add_argument("--k", type=int, help="wait-k lag in chunks")
    parser.add_argument("--n", type=int, help="agreement depth (local_agreement)")
    parser.add_argument(
        "--lambda", dest="lam", type=int, help="attention tail window in frames (edatt)"
    )
    parser.add_argument("--alpha", type=float, help="attention mass threshold (edatt)")
    parser.add_argument("--f", type=int, help="frontier width in frames (alignatt)")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, type=Path)
    parser.add_argument(
        "--model",
        default="scripted",
        help="scripted[:OVERRIDES.json] | proto:HOST:PORT | proto:stdio:CMD",
    )
    _add_policy_flags(parser)
    parser.add_argument("--chunk-ms", type=int, default=500)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--clock",
        default="real",
        help="real | zero | step:MS (deterministic fixed cost per generate)",
    )


def _run_config(args) -> RunConfig:
    return RunConfig(
        corpus=args.corpus,
        policy=_policy_from_args(args),
        model=args.model,
        chunk_ms=args.chunk_ms,
        out_dir=args.out,
        jobs=args.jobs,
        seed=args.seed,
        clock=args.clock,
    )


def cmd_run(args) -> int:
    outcome = run_eval(_run_config(args))
    mean_ideal = outcome.report["latency"]["ideal"]["mean"]
    bleu = outcome.report["bleu"]
    print(
        f"{outcome.report['policy']} {outcome.report['params']}: "
        f"{outcome.report['segment_count']} segments, "
        f"BLEU {'-' if bleu is None else f'{bleu:.2f}'}, "
        f"AL {_sec(mean_ideal['AL'])}, LAAL {_sec(mean_ideal['LAAL'])}, "
        f"ATD {_sec(mean_ideal['ATD'])}"
    )
    if outcome.failures:
        print(f"{len(outcome.failures)} segment(s) failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = [_grid_value(v) for v in args.grid.split(",") if v]
    rows, failures = sweep(_run_config(args), grid)
    for row in rows:
        annotation = ""
        if args.al_threshold is not None:
            ok = row.al <= args.al_threshold
            annotation = "  meets threshold" if ok else "  over threshold"
        bleu = "-" if row.bleu is None else f"{row.bleu:.2f}"
        print(
            f"{row.policy} {SWEEP_FIELD[row.policy]}={row.param}: BLEU {bleu}, "
            f"AL {row.al:.2f}s, AL_CA {row.al_ca:.2f}s{annotation}"
        )
    if args.svg:
        write_curve_svg(rows, args.svg)
    return EXIT_PARTIAL if failures else EXIT_OK


def _grid_value(text: str):
    value = float(text)
    return int(value) if value.is_integer() and "." not in text else value


def cmd_score(args) -> int:
    hyps = args.hyp.read_text(encoding="utf-8").splitlines()
    refs = args.ref.read_text(encoding="utf-8").splitlines()
    result = corpus_bleu(hyps, refs)
    print(json.dumps(result.to_dict(), indent=2))
    return EXIT_OK


def cmd_subtitle(args) -> int:
    blocks = parse_tagged(args.tagged.read_text(encoding="utf-8"))
    alignment = json.loads(args.align.read_text(encoding="utf-8"))
    timed = assign_timestamps(blocks, alignment, args.frame_ms)
    srt = write_srt(timed)
    if args.srt:
        args.srt.write_text(srt, encoding="utf-8")
    else:
        print(srt, end="")
    report = conformity_report(timed)
    if args.report:
        args.report.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(report, indent=2), file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    entries = read_emission_log(args.log)
    if not entries:
        raise ValueError(f"emission log {args.log} is empty")
    modes = ("ideal", "computation_aware") if args.mode == "both" else (args.mode,)
    output = {}
    for mode in modes:
        segments = []
        for entry in entries:
            reference = (entry.get("reference") or "").split() or None
            segments.append(compute_report(entry, reference, mode).to_dict())
        means = {
            metric: sum(s[metric] for s in segments) / len(segments)
            for metric in ("AL", "LAAL", "ATD")
        }
        output[mode] = {"segments": segments, "mean": means}
        print(
            f"{mode}: AL {_sec(means['AL'])}, LAAL {_sec(means['LAAL'])}, "
            f"ATD {_sec(means['ATD'])} over {len(segments)} segments"
        )
    if args.out:
        args.out.write_text(json.dumps(output, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    rows = make_random_corpus(args.segments, args.seed, chunk_ms=args.chunk_ms)
    write_corpus(rows, args.out)
    print(f"wrote {len(rows)} segments to {args.out}")
    return EXIT_OK


def _sec(ms: float | None) -> str:
    return "-" if ms is None else f"{ms / 1000.0:.2f}s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamsim",
        description="Simultaneous-translation policy simulator and evaluator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate one policy over a corpus")
    _add_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="evaluate a grid of one hyperparameter")
    _add_run_flags(p_sweep)
    p_sweep.add_argument(
        "--grid", required=True, help="comma-separated values for the swept field"
    )
    p_sweep.add_argument("--svg", type=Path, help="write a quality/latency SVG plot")
    p_sweep.add_argument(
        "--al-threshold",
        type=float,
        help="annotate grid points against this ideal AL budget in seconds",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_score = sub.add_parser("score", help="corpus BLEU of hyp vs ref files")
    p_score.add_argument("--hyp", required=True, type=Path)
    p_score.add_argument("--ref", required=True, type=Path)
    p_score.set_defaults(func=cmd_score)

    p_sub = sub.add_parser("subtitle", help="tagged text to SRT plus conformity")
    p_sub.add_argument("--tagged", required=True, type=Path)
    p_sub.add_argument(
        "--align", required=True, type=Path, help="JSON array of 1-based frame indices"
    )
    p_sub.add_argument("--frame-ms", type=int, default=500)
    p_sub.add_argument("--srt", type=Path, help="output SRT path (default stdout)")
    p_sub.add_argument("--report", type=Path, help="conformity report JSON path")
    p_sub.set_defaults(func=cmd_subtitle)

    p_report = sub.add_parser("report", help="latency metrics from an emission log")
    p_report.add_argument("--log", required=True, type=Path)
    p_report.add_argument(
        "--mode", choices=("ideal", "computation_aware", "both"), default="both"
    )
    p_report.add_argument("--out", type=Path)
    p_report.set_defaults(func=cmd_report)

    p_corpus = sub.add_parser(
        "make-corpus", help="write a deterministic synthetic scripted corpus"
    )
    p_corpus.add_argument("--segments", type=int, default=100)
    p_corpus.add_argument("--seed", type=int, default=0)
    p_corpus.add_argument("--chunk-ms", type=int, default=500)
    p_corpus.add_argument("--out", required=True, type=Path)
    p_corpus.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("STREAMSIM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StreamSimError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
