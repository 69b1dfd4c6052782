"""Domain types for chunked source streams and incremental hypotheses.

All timing is integer milliseconds. Attention matrices have one row per
output token and one column per received source frame; a chunk contributes
``frames_per_chunk`` frames (default 1), which stands in for encoder
subsampling without modelling it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

# Tolerance for attention rows summing to one.
ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Chunk:
    """One increment of source input.

    ``payload`` carries feature values for external models; scripted runs
    leave it empty.
    """

    index: int
    duration_ms: int
    payload: tuple[float, ...] = ()

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"chunk index must be >= 1, got {self.index}")
        if self.duration_ms <= 0:
            raise ValueError(f"chunk duration must be positive, got {self.duration_ms}")


@dataclass(frozen=True)
class SegmentSource:
    """One evaluation segment: an ordered chunk stream plus an optional
    reference translation."""

    id: str
    chunks: tuple[Chunk, ...]
    reference: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.chunks:
            raise ValueError(f"segment {self.id!r} has no chunks")
        for pos, chunk in enumerate(self.chunks, start=1):
            if chunk.index != pos:
                raise ValueError(
                    f"segment {self.id!r}: chunk indices must be consecutive "
                    f"from 1, found {chunk.index} at position {pos}"
                )

    @property
    def total_duration_ms(self) -> int:
        return sum(c.duration_ms for c in self.chunks)


@dataclass(frozen=True)
class Hypothesis:
    """A partial translation with its token-by-frame cross-attention.

    Rows are normalized distributions over the frames received so far.
    """

    tokens: tuple[str, ...]
    attention: np.ndarray
    frames_received: int

    def __post_init__(self):
        att = np.asarray(self.attention, dtype=np.float64)
        object.__setattr__(self, "attention", att)
        if att.ndim != 2:
            raise ValueError(f"attention must be 2-D, got shape {att.shape}")
        if att.shape[0] != len(self.tokens):
            raise ValueError(
                f"attention has {att.shape[0]} rows for {len(self.tokens)} tokens"
            )
        if att.shape[1] != self.frames_received:
            raise ValueError(
                f"attention has {att.shape[1]} columns for "
                f"{self.frames_received} received frames"
            )
        if att.size:
            if (att < 0).any():
                raise ValueError("attention entries must be non-negative")
            sums = att.sum(axis=1)
            if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
                raise ValueError("attention rows must each sum to 1")

    def __len__(self) -> int:
        return len(self.tokens)


@runtime_checkable
class IncrementalModel(Protocol):
    """Contract every model backend implements.

    ``generate`` must be deterministic for a fixed configuration and its
    output must begin with ``forced_prefix`` verbatim. One call in flight
    at a time; ``reset`` rebinds the instance to a new segment.
    """

    def reset(self, segment: SegmentSource) -> None: ...

    def generate(self, chunks_read: int, forced_prefix: Sequence[str]) -> Hypothesis: ...


def chunk_stream(total_duration_ms: int, chunk_ms: int) -> list[Chunk]:
    """Partition a source duration into fixed-size chunks.

    The last chunk may be shorter; durations always sum to
    ``total_duration_ms``.
    """
    if total_duration_ms <= 0:
        raise ValueError(f"total duration must be positive, got {total_duration_ms}")
    if chunk_ms <= 0:
        raise ValueError(f"chunk size must be positive, got {chunk_ms}")
    chunks = []
    consumed = 0
    index = 1
    while consumed < total_duration_ms:
        size = min(chunk_ms, total_duration_ms - consumed)
        chunks.append(Chunk(index=index, duration_ms=size))
        consumed += size
        index += 1
    return chunks


def elapsed_source_ms(segment: SegmentSource, chunks_read: int) -> int:
    """Source time elapsed once the first ``chunks_read`` chunks are in."""
    if chunks_read < 0 or chunks_read > len(segment.chunks):
        raise ValueError(
            f"chunks_read must be in [0, {len(segment.chunks)}], got {chunks_read}"
        )
    return sum(c.duration_ms for c in segment.chunks[:chunks_read])
