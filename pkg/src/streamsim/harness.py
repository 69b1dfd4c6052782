"""Run corpora through policies, aggregate quality/latency, sweep grids.

A corpus is a JSONL file, one segment per line:

    {"id": "seg-001", "duration_ms": 3000, "reference": "text ...",
     "script": {"script_tokens": [...], "alignment": [...], ...}}

for scripted runs, or, for external models,

    {"id": "seg-001", "duration_ms": 3000, "reference": "text ...",
     "audio_features": "relative/path.json"}

where the features file holds one float array per chunk.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Sequence

from .bleu import corpus_bleu
from .core import Chunk, SegmentSource, chunk_stream
from .errors import StreamSimError
from .latency import LatencyReport, compute_report
from .policies import SWEEP_FIELD, PolicyConfig
from .remote import open_model
from .scripted import ScriptedModel, ScriptedModelConfig
from .simulate import (
    FixedCostClock,
    SegmentResult,
    SystemClock,
    emission_log_entry,
    run_policy,
)

logger = logging.getLogger(__name__)

MODES = ("ideal", "computation_aware")


@dataclass(frozen=True)
class CorpusRow:
    segment: SegmentSource
    script: ScriptedModelConfig | None


@dataclass
class RunConfig:
    corpus: Path
    policy: PolicyConfig
    model: str = "scripted"
    chunk_ms: int = 500
    out_dir: Path | None = None
    jobs: int = 1
    seed: int = 0
    clock: str = "real"
    modes: tuple[str, ...] = MODES
    grid: tuple | None = None

    def __post_init__(self):
        self.corpus = Path(self.corpus)
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)
        if self.chunk_ms <= 0:
            raise ValueError("chunk_ms must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        self.modes = tuple(self.modes)
        unknown = set(self.modes) - set(MODES)
        if unknown or not self.modes:
            raise ValueError(f"modes must be a non-empty subset of {MODES}")
        if self.grid is not None:
            self.grid = tuple(self.grid)

    def to_dict(self) -> dict:
        return {
            "corpus": str(self.corpus),
            "policy": self.policy.kind,
            "params": self.policy.params(),
            "model": self.model,
            "chunk_ms": self.chunk_ms,
            "out_dir": str(self.out_dir) if self.out_dir else None,
            "jobs": self.jobs,
            "seed": self.seed,
            "clock": self.clock,
            "modes": list(self.modes),
            "grid": list(self.grid) if self.grid is not None else None,
        }


def make_clock(spec: str):
    if spec == "real":
        return SystemClock()
    if spec == "zero":
        return FixedCostClock(0.0)
    if spec.startswith("step:"):
        return FixedCostClock(float(spec[len("step:") :]))
    raise ValueError(f"unknown clock spec {spec!r}; want real, zero or step:MS")


def load_corpus(path: Path, chunk_ms: int) -> list[CorpusRow]:
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad JSON: {exc}") from exc
            rows.append(_corpus_row(data, chunk_ms, path.parent, line_no))
    if not rows:
        raise ValueError(f"corpus {path} contains no segments")
    return rows


def _corpus_row(data: dict, chunk_ms: int, base: Path, line_no: int) -> CorpusRow:
    chunks = chunk_stream(int(data["duration_ms"]), chunk_ms)
    if "audio_features" in data:
        feature_path = base / data["audio_features"]
        payloads = json.loads(feature_path.read_text(encoding="utf-8"))
        if len(payloads) != len(chunks):
            raise ValueError(
                f"segment {data['id']!r}: {len(payloads)} feature chunks for "
                f"{len(chunks)} stream chunks at {chunk_ms} ms"
            )
        chunks = [
            Chunk(index=c.index, duration_ms=c.duration_ms, payload=tuple(p))
            for c, p in zip(chunks, payloads)
        ]
    reference = data.get("reference")
    segment = SegmentSource(
        id=str(data["id"]),
        chunks=tuple(chunks),
        reference=tuple(reference.split()) if reference else None,
    )
    script = None
    if "script" in data:
        script = ScriptedModelConfig.from_dict(data["script"])
    elif "audio_features" not in data:
        raise ValueError(
            f"segment {data['id']!r} (line {line_no}) has neither a script "
            "nor audio features"
        )
    return CorpusRow(segment=segment, script=script)


class _ModelProvider:
    """Hands each worker thread a model for a corpus row.

    Scripted models are per segment; external connections are one per
    worker thread and never shared.
    """

    def __init__(self, spec: str):
        self.spec = spec
        self._overrides: dict = {}
        self._local = threading.local()
        self._remotes: list = []
        self._lock = threading.Lock()
        if spec.startswith("scripted:"):
            override_path = Path(spec[len("scripted:") :])
            self._overrides = json.loads(override_path.read_text(encoding="utf-8"))
        elif spec != "scripted" and not spec.startswith("proto:"):
            raise ValueError(f"unknown model spec {spec!r}")

    @property
    def is_scripted(self) -> bool:
        return not self.spec.startswith("proto:")

    def model_for(self, row: CorpusRow):
        if self.is_scripted:
            if row.script is None:
                raise ValueError(
                    f"segment {row.segment.id!r} has no script but the model "
                    "spec is scripted"
                )
            cfg = row.script
            if self._overrides:
                cfg = dataclasses.replace(cfg, **self._overrides)
            return ScriptedModel(cfg)
        model = getattr(self._local, "model", None)
        if model is None:
            model = open_model(self.spec)
            self._local.model = model
            with self._lock:
                self._remotes.append(model)
        return model

    def invalidate(self) -> None:
        """Drop this worker's connection after a protocol failure so the
        next segment reconnects on a clean stream."""
        model = getattr(self._local, "model", None)
        if model is None:
            return
        self._local.model = None
        with self._lock:
            if model in self._remotes:
                self._remotes.remove(model)
        try:
            model.close()
        except Exception:
            pass

    def close(self) -> None:
        for model in self._remotes:
            try:
                model.close()
            except Exception:  # best effort; the run is already over
                pass
        self._remotes.clear()


@dataclass
class RunOutcome:
    config_dict: dict
    results: list[SegmentResult]
    log_entries: list[dict]
    failures: list[dict]
    report: dict

    @property
    def ok(self) -> bool:
        return not self.failures


def run_eval(cfg: RunConfig, clock=None) -> RunOutcome:
    """Evaluate one policy configuration over a corpus.

    Per-segment model errors are collected and the run continues; the
    outcome lists them so callers can report partial failure.
    """
    rows = load_corpus(cfg.corpus, cfg.chunk_ms)
    if clock is None:
        clock = make_clock(cfg.clock)
    provider = _ModelProvider(cfg.model)

    def one(row: CorpusRow) -> tuple[SegmentResult | None, dict | None]:
        try:
            model = provider.model_for(row)
            return run_policy(model, row.segment, cfg.policy, clock), None
        except (StreamSimError, ValueError) as exc:
            logger.warning("segment %s failed: %s", row.segment.id, exc)
            provider.invalidate()
            return None, {"segment_id": row.segment.id, "reason": str(exc)}

    results: list[SegmentResult | None] = [None] * len(rows)
    failures: list[dict] = []
    try:
        if cfg.jobs == 1:
            settled = [one(row) for row in rows]
        else:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                settled = list(pool.map(one, rows))
        for i, (result, failure) in enumerate(settled):
            results[i] = result
            if failure is not None:
                failures.append(failure)
    finally:
        provider.close()

    completed = [r for r in results if r is not None]
    log_entries = [emission_log_entry(r, cfg.policy, cfg.chunk_ms) for r in completed]
    report = _build_report(cfg, completed, log_entries, failures)
    outcome = RunOutcome(
        config_dict=cfg.to_dict(),
        results=completed,
        log_entries=log_entries,
        failures=failures,
        report=report,
    )
    if cfg.out_dir is not None:
        _write_outcome(cfg.out_dir, outcome)
    return outcome


def _build_report(
    cfg: RunConfig,
    results: list[SegmentResult],
    log_entries: list[dict],
    failures: list[dict],
) -> dict:
    scored = [r for r in results if r.reference]
    bleu = None
    if scored:
        bleu = corpus_bleu(
            [r.final_text for r in scored],
            [" ".join(r.reference) for r in scored],
        ).score

    latency: dict = {}
    for mode in cfg.modes:
        per_segment: list[LatencyReport] = [
            compute_report(entry, result.reference, mode)
            for entry, result in zip(log_entries, results)
        ]
        latency[mode] = {
            "segments": [r.to_dict() for r in per_segment],
            "mean": {
                metric: _mean([getattr(r, metric) for r in per_segment])
                for metric in ("AL", "LAAL", "ATD")
            },
        }

    return {
        "policy": cfg.policy.kind,
        "params": cfg.policy.params(),
        "chunk_ms": cfg.chunk_ms,
        "segment_count": len(results),
        "failures": failures,
        "bleu": None if bleu is None else round(bleu, 2),
        "latency": latency,
    }


def _mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _write_outcome(out_dir: Path, outcome: RunOutcome) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_emission_log(out_dir / "emissions.jsonl", outcome.log_entries)
    _dump_json(out_dir / "report.json", outcome.report)
    manifest = {
        "config": outcome.config_dict,
        "segments": outcome.report["segment_count"],
        "failures": outcome.failures,
        "artifacts": {"emissions": "emissions.jsonl", "report": "report.json"},
    }
    _dump_json(out_dir / "manifest.json", manifest)


def write_emission_log(path: Path, entries: Sequence[dict]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def read_emission_log(path: Path) -> list[dict]:
    entries = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(json.loads(line))
    return entries


def _dump_json(path: Path, data) -> None:
    Path(path).write_text(
        json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Parameter sweeps


@dataclass(frozen=True)
class CurveRow:
    """One quality/latency point of a sweep; latencies in seconds."""

    policy: str
    param: float
    bleu: float | None
    al: float
    laal: float
    atd: float
    al_ca: float
    laal_ca: float
    atd_ca: float


CSV_HEADER = "policy,param,BLEU,AL,LAAL,ATD,AL_CA,LAAL_CA,ATD_CA"


def sweep(
    cfg: RunConfig, grid: Sequence | None = None, clock=None
) -> tuple[list[CurveRow], list[dict]]:
    """One run per grid value of the policy's swept hyperparameter.

    The grid comes from the argument or from ``cfg.grid``. Returns the
    curve rows sorted by ideal latency plus all per-run failures;
    artifacts land under ``out_dir/<field>=<value>/`` with the CSV and
    sweep manifest at the top level.
    """
    if grid is None:
        grid = cfg.grid
    if grid is None or not list(grid):
        raise ValueError("sweep grid must be non-empty")
    if set(MODES) - set(cfg.modes):
        raise ValueError("sweeps need both latency modes enabled")
    field_name = SWEEP_FIELD[cfg.policy.kind]
    rows: list[CurveRow] = []
    failures: list[dict] = []
    points = []
    for value in grid:
        point_cfg = dataclasses.replace(
            cfg,
            policy=cfg.policy.with_sweep_value(value),
            out_dir=(cfg.out_dir / f"{field_name}={value}") if cfg.out_dir else None,
        )
        outcome = run_eval(point_cfg, clock=clock)
        failures.extend(outcome.failures)
        mean_ideal = outcome.report["latency"]["ideal"]["mean"]
        mean_ca = outcome.report["latency"]["computation_aware"]["mean"]
        rows.append(
            CurveRow(
                policy=cfg.policy.kind,
                param=value,
                bleu=outcome.report["bleu"],
                al=_s(mean_ideal["AL"]),
                laal=_s(mean_ideal["LAAL"]),
                atd=_s(mean_ideal["ATD"]),
                al_ca=_s(mean_ca["AL"]),
                laal_ca=_s(mean_ca["LAAL"]),
                atd_ca=_s(mean_ca["ATD"]),
            )
        )
        points.append({"param": value, "failures": len(outcome.failures)})
    rows.sort(key=lambda r: (r.al, r.param))

    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / "curve.csv").write_text(render_csv(rows), encoding="utf-8")
        _dump_json(
            cfg.out_dir / "manifest.json",
            {
                "config": cfg.to_dict(),
                "sweep_field": field_name,
                "grid": list(grid),
                "points": points,
                "artifacts": {"csv": "curve.csv"},
            },
        )
    return rows, failures


def _s(ms: float | None) -> float:
    return round(ms / 1000.0, 6) if ms is not None else float("nan")


def render_csv(rows: Sequence[CurveRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        bleu = "" if r.bleu is None else f"{r.bleu:.2f}"
        lines.append(
            f"{r.policy},{r.param},{bleu},"
            f"{r.al:.3f},{r.laal:.3f},{r.atd:.3f},"
            f"{r.al_ca:.3f},{r.laal_ca:.3f},{r.atd_ca:.3f}"
        )
    return "\n".join(lines) + "\n"


def write_curve_svg(rows: Sequence[CurveRow], path: Path) -> None:
    """Quality/latency curve: BLEU against AL (solid) and AL_CA (dashed)."""
    rows = [r for r in rows if r.bleu is not None]
    if not rows:
        raise ValueError("no scored rows to plot")
    width, height, margin = 640, 420, 60
    xs = [r.al for r in rows] + [r.al_ca for r in rows]
    ys = [r.bleu for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x: float) -> float:
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def py(y: float) -> float:
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    def polyline(points: Sequence[tuple[float, float]], dashed: bool) -> str:
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in points)
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        return (
            f'<polyline fill="none" stroke="#333" stroke-width="1.5"{dash} '
            f'points="{coords}"/>'
        )

    ordered = sorted(rows, key=lambda r: r.al)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 15}" text-anchor="middle" '
        f'font-size="13">latency (s)</text>',
        f'<text x="18" y="{height / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {height / 2:.0f})">BLEU</text>',
        polyline([(r.al, r.bleu) for r in ordered], dashed=False),
        polyline([(r.al_ca, r.bleu) for r in ordered], dashed=True),
    ]
    for r in ordered:
        parts.append(
            f'<circle cx="{px(r.al):.1f}" cy="{py(r.bleu):.1f}" r="3" fill="#333"/>'
        )
        parts.append(
            f'<circle cx="{px(r.al_ca):.1f}" cy="{py(r.bleu):.1f}" r="3" '
            f'fill="none" stroke="#333"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic corpora


_VOCAB = (
    "the of and to in is was for on that with as his they at be this from "
    "have or had by word but not what all were when your can said there use "
    "each which she how their will other about out many then them these so"
).split()


def make_random_corpus(
    n_segments: int,
    seed: int,
    *,
    chunk_ms: int = 500,
    min_chunks: int = 3,
    max_chunks: int = 8,
    min_tokens: int = 3,
    max_tokens: int = 12,
    instability_choices: Sequence[int] = (0, 1),
    temperature_choices: Sequence[float] = (0.3, 0.6, 1.0),
) -> list[dict]:
    """Deterministic corpus rows for tests and demos.

    Durations are exact chunk multiples and references equal the scripts,
    so an offline run scores BLEU 100.
    """
    rng = Random(seed)
    rows = []
    for i in range(n_segments):
        n_chunks = rng.randint(min_chunks, max_chunks)
        n_tokens = rng.randint(min_tokens, max_tokens)
        tokens = [rng.choice(_VOCAB) for _ in range(n_tokens)]
        alignment = sorted(rng.randint(1, n_chunks) for _ in range(n_tokens))
        rows.append(
            {
                "id": f"seg-{i:04d}",
                "duration_ms": n_chunks * chunk_ms,
                "reference": " ".join(tokens),
                "script": {
                    "script_tokens": tokens,
                    "alignment": alignment,
                    "instability_depth": rng.choice(list(instability_choices)),
                    "attention_temperature": rng.choice(list(temperature_choices)),
                    "frames_per_chunk": 1,
                },
            }
        )
    return rows


def write_corpus(rows: Sequence[dict], path: Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
