"""Dummy scripted model served by the bridge.

Mirrors the scripted-run semantics of the evaluation toolkit so that runs
through the bridge reproduce in-process runs exactly:

* token i of the script becomes visible once its aligned chunk is read;
* before the source ends, the newest ``instability_depth`` visible tokens
  are replaced by the placeholder ``{token}#{chunks_read}``;
* a forced prefix overrides the leading output positions verbatim;
* each token's attention is exp(-|frame - peak| / temperature) over all
  received frames, normalized, peaked at the last frame of its aligned
  chunk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScriptEntry:
    """One segment's script plus the chunk geometry of its source."""

    segment_id: str
    tokens: tuple[str, ...]
    alignment: tuple[int, ...]
    total_chunks: int
    instability_depth: int = 0
    attention_temperature: float = 0.25
    frames_per_chunk: int = 1

    @classmethod
    def from_corpus_row(cls, row: dict, chunk_ms: int) -> "ScriptEntry":
        script = row["script"]
        duration = int(row["duration_ms"])
        return cls(
            segment_id=str(row["id"]),
            tokens=tuple(script["script_tokens"]),
            alignment=tuple(int(a) for a in script["alignment"]),
            total_chunks=-(-duration // chunk_ms),
            instability_depth=int(script.get("instability_depth", 0)),
            attention_temperature=float(script.get("attention_temperature", 0.25)),
            frames_per_chunk=int(script.get("frames_per_chunk", 1)),
        )


class DummyScriptedModel:
    """Incremental generator over a table of script entries."""

    def __init__(self, scripts: dict[str, ScriptEntry]):
        self.scripts = scripts

    def reset(self, segment_id: str) -> None:
        # stateless per call; nothing to clear
        return None

    def generate(
        self,
        segment_id: str,
        chunks: list,
        chunks_read: int,
        forced_prefix: list[str],
    ) -> tuple[list[str], list[list[float]]]:
        entry = self.scripts.get(segment_id)
        if entry is None:
            raise KeyError(f"unknown segment {segment_id!r}")
        if chunks_read < 1 or chunks_read > entry.total_chunks:
            raise ValueError(
                f"chunks_read {chunks_read} outside 1..{entry.total_chunks}"
            )

        visible_alignment = [a for a in entry.alignment if a <= chunks_read]
        tokens = [
            tok
            for tok, aligned in zip(entry.tokens, entry.alignment)
            if aligned <= chunks_read
        ]
        if chunks_read < entry.total_chunks and entry.instability_depth > 0:
            churn = min(entry.instability_depth, len(tokens))
            for i in range(len(tokens) - churn, len(tokens)):
                tokens[i] = f"{tokens[i]}#{chunks_read}"
        if len(forced_prefix) > len(tokens):
            raise ValueError(
                f"forced prefix of {len(forced_prefix)} exceeds "
                f"{len(tokens)} visible tokens"
            )
        tokens[: len(forced_prefix)] = [str(t) for t in forced_prefix]

        n_frames = chunks_read * entry.frames_per_chunk
        frames = np.arange(1, n_frames + 1, dtype=np.float64)
        rows = []
        for aligned in visible_alignment:
            peak = aligned * entry.frames_per_chunk
            weights = np.exp(-np.abs(frames - peak) / entry.attention_temperature)
            rows.append(weights / weights.sum())
        return tokens, [row.tolist() for row in rows]
