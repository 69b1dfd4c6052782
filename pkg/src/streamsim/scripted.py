"""Deterministic scripted model used as ground truth in tests and demos.

The script fixes the full-source output and a per-token source alignment;
partial hypotheses reveal exactly the tokens whose aligned chunk has been
read. An optional instability depth makes the newest visible tokens churn
until more source arrives, which is what adaptive policies have to cope
with on real models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Hypothesis, SegmentSource
from .errors import ModelContractError


def placeholder_token(token: str, chunks_read: int) -> str:
    """Unstable stand-in for ``token`` while only ``chunks_read`` chunks are
    visible. Deterministic so runs are reproducible; always differs from the
    token it replaces."""
    return f"{token}#{chunks_read}"


@dataclass(frozen=True)
class ScriptedModelConfig:
    """Full-source output plus the knobs controlling partial hypotheses.

    alignment: 1-based index of the chunk that makes each token visible;
        non-decreasing, same length as the script.
    instability_depth: how many of the newest visible tokens are replaced
        by placeholders until more chunks arrive.
    attention_temperature: spread of the synthetic attention around the
        aligned frame; smaller is more peaked.
    """

    script_tokens: tuple[str, ...]
    alignment: tuple[int, ...]
    instability_depth: int = 0
    attention_temperature: float = 0.25
    frames_per_chunk: int = 1

    def __post_init__(self):
        object.__setattr__(self, "script_tokens", tuple(self.script_tokens))
        object.__setattr__(self, "alignment", tuple(int(a) for a in self.alignment))
        if len(self.alignment) != len(self.script_tokens):
            raise ValueError(
                f"alignment length {len(self.alignment)} != "
                f"script length {len(self.script_tokens)}"
            )
        if any(a < 1 for a in self.alignment):
            raise ValueError("alignment indices are 1-based and must be >= 1")
        if any(b < a for a, b in zip(self.alignment, self.alignment[1:])):
            raise ValueError("alignment must be non-decreasing")
        if self.instability_depth < 0:
            raise ValueError("instability_depth must be >= 0")
        if self.attention_temperature <= 0:
            raise ValueError("attention_temperature must be positive")
        if self.frames_per_chunk < 1:
            raise ValueError("frames_per_chunk must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScriptedModelConfig":
        return cls(
            script_tokens=tuple(data["script_tokens"]),
            alignment=tuple(data["alignment"]),
            instability_depth=int(data.get("instability_depth", 0)),
            attention_temperature=float(data.get("attention_temperature", 0.25)),
            frames_per_chunk=int(data.get("frames_per_chunk", 1)),
        )

    def to_dict(self) -> dict:
        return {
            "script_tokens": list(self.script_tokens),
            "alignment": list(self.alignment),
            "instability_depth": self.instability_depth,
            "attention_temperature": self.attention_temperature,
            "frames_per_chunk": self.frames_per_chunk,
        }


def attention_row(
    aligned_chunk: int, chunks_read: int, frames_per_chunk: int, temperature: float
) -> np.ndarray:
    """Normalized attention over frames 1..chunks_read*frames_per_chunk,
    peaked at the last frame of the aligned chunk."""
    n_frames = chunks_read * frames_per_chunk
    peak = min(aligned_chunk, chunks_read) * frames_per_chunk
    frames = np.arange(1, n_frames + 1, dtype=np.float64)
    weights = np.exp(-np.abs(frames - peak) / temperature)
    return weights / weights.sum()


def scripted_generate(
    cfg: ScriptedModelConfig,
    total_chunks: int,
    chunks_read: int,
    forced_prefix: Sequence[str] = (),
) -> Hypothesis:
    """Produce the partial hypothesis after ``chunks_read`` of
    ``total_chunks`` chunks.

    Visible tokens are those whose aligned chunk has been read; before the
    source ends, the newest ``instability_depth`` of them are placeholders.
    ``forced_prefix`` overrides the leading positions verbatim. At full
    source the unforced output equals the script exactly.
    """
    if chunks_read < 1:
        raise ValueError(f"chunks_read must be >= 1, got {chunks_read}")
    if chunks_read > total_chunks:
        raise ValueError(
            f"chunks_read {chunks_read} exceeds segment chunk count {total_chunks}"
        )

    visible = [
        (tok, chunk)
        for tok, chunk in zip(cfg.script_tokens, cfg.alignment)
        if chunk <= chunks_read
    ]
    tokens = [tok for tok, _ in visible]
    if chunks_read < total_chunks and cfg.instability_depth > 0:
        churn = min(cfg.instability_depth, len(tokens))
        for i in range(len(tokens) - churn, len(tokens)):
            tokens[i] = placeholder_token(tokens[i], chunks_read)

    forced = list(forced_prefix)
    if len(forced) > len(tokens):
        raise ModelContractError(
            f"forced prefix of {len(forced)} tokens exceeds the "
            f"{len(tokens)} visible at chunk {chunks_read}"
        )
    tokens[: len(forced)] = forced

    n_frames = chunks_read * cfg.frames_per_chunk
    rows = [
        attention_row(chunk, chunks_read, cfg.frames_per_chunk, cfg.attention_temperature)
        for _, chunk in visible
    ]
    attention = np.vstack(rows) if rows else np.zeros((0, n_frames))
    return Hypothesis(
        tokens=tuple(tokens), attention=attention, frames_received=n_frames
    )


class ScriptedModel:
    """Incremental-model backend driven by a :class:`ScriptedModelConfig`."""

    def __init__(self, cfg: ScriptedModelConfig):
        self.cfg = cfg
        self._total_chunks: int | None = None

    def reset(self, segment: SegmentSource) -> None:
        total = len(segment.chunks)
        if self.cfg.alignment and max(self.cfg.alignment) > total:
            raise ValueError(
                f"segment {segment.id!r} has {total} chunks but the script "
                f"aligns up to chunk {max(self.cfg.alignment)}"
            )
        self._total_chunks = total

    def generate(self, chunks_read: int, forced_prefix: Sequence[str] = ()) -> Hypothesis:
        if self._total_chunks is None:
            raise ValueError("model not reset for a segment")
        return scripted_generate(self.cfg, self._total_chunks, chunks_read, forced_prefix)
