"""Streaming-translation policy simulator and evaluation toolkit."""

from .bleu import BleuConfig, BleuScore, corpus_bleu, tokenize_13a
from .core import (
    Chunk,
    Hypothesis,
    IncrementalModel,
    SegmentSource,
    chunk_stream,
    elapsed_source_ms,
)
from .harness import (
    CurveRow,
    RunConfig,
    load_corpus,
    make_random_corpus,
    run_eval,
    sweep,
    write_corpus,
)
from .latency import (
    DelayProfile,
    LatencyReport,
    average_lagging,
    average_token_delay,
    compute_report,
    length_adaptive_al,
)
from .policies import (
    PolicyConfig,
    alignatt_decide,
    edatt_decide,
    local_agreement_decide,
    waitk_decide,
)
from .remote import RemoteModel, open_model
from .scripted import ScriptedModel, ScriptedModelConfig, scripted_generate
from .simulate import (
    EmissionRecord,
    FixedCostClock,
    SegmentResult,
    SystemClock,
    run_policy,
)
from .subtitles import (
    SubtitleBlock,
    assign_timestamps,
    conformity_report,
    cpl_conformity,
    cps_conformity,
    parse_srt,
    parse_tagged,
    render_tagged,
    write_srt,
)

__version__ = "0.1.0"

__all__ = [
    "BleuConfig",
    "BleuScore",
    "Chunk",
    "CurveRow",
    "DelayProfile",
    "EmissionRecord",
    "FixedCostClock",
    "Hypothesis",
    "IncrementalModel",
    "LatencyReport",
    "PolicyConfig",
    "RemoteModel",
    "RunConfig",
    "ScriptedModel",
    "ScriptedModelConfig",
    "SegmentResult",
    "SegmentSource",
    "SubtitleBlock",
    "SystemClock",
    "alignatt_decide",
    "assign_timestamps",
    "average_lagging",
    "average_token_delay",
    "chunk_stream",
    "compute_report",
    "conformity_report",
    "corpus_bleu",
    "cpl_conformity",
    "cps_conformity",
    "edatt_decide",
    "elapsed_source_ms",
    "length_adaptive_al",
    "load_corpus",
    "local_agreement_decide",
    "make_random_corpus",
    "open_model",
    "parse_srt",
    "parse_tagged",
    "render_tagged",
    "run_eval",
    "run_policy",
    "scripted_generate",
    "sweep",
    "tokenize_13a",
    "waitk_decide",
    "write_corpus",
    "write_srt",
]
