"""Latency metrics over per-token delay sequences.

Definitions, with d_i the delay of target token i, X the source duration,
Y the hypothesis length and Y* the reference length:

    AL   = (1/tau) * sum_{i<=tau} [ d_i - (i-1) * X/|Y*| ]
    LAAL =            same, with divisor max(|Y|, |Y*|)
    tau  = first i with d_i >= X, else |Y|
    ATD  = (1/|Y|) * sum_i [ E_i - T_x(a(i)) ]

where E_i = max(d_i, E_{i-1}) + delta_out is the queued end time of token
i, T_x(j) the end time of source chunk j, and a(i) = min(i, r_i) with r_i
the number of chunks fully read at d_i.

The same functions serve the ideal and the computation-aware readings; only
the delay sequence fed in changes.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .errors import MetricUndefinedError

Mode = Literal["ideal", "computation_aware"]


@dataclass(frozen=True)
class DelayProfile:
    """Per-token delays plus the source/reference geometry they refer to.

    output_token_ms is the playback duration charged per emitted token;
    zero for plain text output.
    """

    delays_ms: tuple[float, ...]
    source_duration_ms: float
    ref_len: int
    chunk_ms: float
    output_token_ms: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delays_ms", tuple(float(d) for d in self.delays_ms))
        if any(b < a for a, b in zip(self.delays_ms, self.delays_ms[1:])):
            raise ValueError("delays must be non-decreasing")
        if self.ref_len < 1:
            raise ValueError("ref_len must be >= 1")
        if self.output_token_ms < 0:
            raise ValueError("output_token_ms must be >= 0")

    @property
    def hyp_len(self) -> int:
        return len(self.delays_ms)


def _check_defined(p: DelayProfile) -> None:
    if not p.delays_ms:
        raise MetricUndefinedError("no emissions: latency is undefined")
    if p.source_duration_ms <= 0:
        raise MetricUndefinedError("degenerate source of non-positive duration")


def _lagging(p: DelayProfile, divisor: int) -> float:
    _check_defined(p)
    rate = p.source_duration_ms / divisor
    total = 0.0
    tau = p.hyp_len
    for i, d in enumerate(p.delays_ms, start=1):
        total += d - (i - 1) * rate
        if d >= p.source_duration_ms:
            tau = i
            break
    return total / tau


def average_lagging(p: DelayProfile) -> float:
    """AL: mean lag behind an evenly paced reference-rate schedule."""
    return _lagging(p, p.ref_len)


def length_adaptive_al(p: DelayProfile) -> float:
    """LAAL: AL with the pacing divisor max(|Y|, |Y*|), robust to
    over-generation."""
    return _lagging(p, max(p.hyp_len, p.ref_len))


def average_token_delay(p: DelayProfile) -> float:
    """ATD: mean gap between token end times and their corresponding
    source-chunk end times."""
    _check_defined(p)
    if p.chunk_ms <= 0:
        raise ValueError("chunk_ms must be positive")
    ends = []
    t = 0.0
    while t < p.source_duration_ms:
        t = min(t + p.chunk_ms, p.source_duration_ms)
        ends.append(t)
    total = 0.0
    emit_end = 0.0
    for i, d in enumerate(p.delays_ms, start=1):
        emit_end = max(d, emit_end) + p.output_token_ms
        fully_read = bisect_right(ends, d)
        a = min(i, fully_read)
        source_end = ends[a - 1] if a >= 1 else 0.0
        total += emit_end - source_end
    return total / p.hyp_len


@dataclass(frozen=True)
class LatencyReport:
    segment_id: str
    mode: Mode
    AL: float
    LAAL: float
    ATD: float
    ref_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "mode": self.mode,
            "AL": self.AL,
            "LAAL": self.LAAL,
            "ATD": self.ATD,
        }


def profile_from_log(
    log: Mapping, reference: Sequence[str] | None, mode: Mode
) -> tuple[DelayProfile, bool]:
    """Build the delay profile for one emission-log record.

    Falls back to the hypothesis length when no reference is available;
    the flag in the result records that."""
    emissions = log["emissions"]
    key = "ideal_delay_ms" if mode == "ideal" else "ca_delay_ms"
    delays = tuple(float(e[key]) for e in emissions)
    fallback = not reference
    ref_len = len(delays) if fallback else len(reference)
    profile = DelayProfile(
        delays_ms=delays,
        source_duration_ms=float(log["total_source_ms"]),
        ref_len=max(ref_len, 1),
        chunk_ms=float(log["chunk_ms"]),
    )
    return profile, fallback


def compute_report(
    log: Mapping, reference: Sequence[str] | None, mode: Mode
) -> LatencyReport:
    """Evaluate AL, LAAL and ATD for one emission-log record."""
    if mode not in ("ideal", "computation_aware"):
        raise ValueError(f"unknown mode {mode!r}")
    profile, fallback = profile_from_log(log, reference, mode)
    return LatencyReport(
        segment_id=log["segment_id"],
        mode=mode,
        AL=average_lagging(profile),
        LAAL=length_adaptive_al(profile),
        ATD=average_token_delay(profile),
        ref_fallback=fallback,
    )
