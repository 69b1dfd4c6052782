"""The incremental read/decide/commit loop.

Each step reads one more chunk, regenerates a hypothesis, and lets the
policy commit a prefix extension. Committed text is append-only. Two delay
clocks run side by side: the ideal clock is source time consumed at commit,
the computation-aware clock is a simulated streaming wall clock in which
the model may only start working on a chunk after that chunk has fully
arrived, and each generate call costs its measured computation time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import Hypothesis, IncrementalModel, SegmentSource, elapsed_source_ms
from .policies import (
    PolicyConfig,
    alignatt_decide,
    edatt_decide,
    local_agreement_decide,
    waitk_decide,
)


class SystemClock:
    """Measures real computation time around a generate call."""

    def measure(self, fn: Callable[[], Hypothesis]) -> tuple[Hypothesis, float]:
        start = time.perf_counter()
        result = fn()
        return result, (time.perf_counter() - start) * 1000.0


class FixedCostClock:
    """Charges a fixed computation cost per generate call; deterministic.

    A cost of 0 makes the wall clock coincide with the ideal clock.
    """

    def __init__(self, cost_ms: float = 0.0):
        if cost_ms < 0:
            raise ValueError("cost_ms must be >= 0")
        self.cost_ms = float(cost_ms)

    def measure(self, fn: Callable[[], Hypothesis]) -> tuple[Hypothesis, float]:
        return fn(), self.cost_ms


@dataclass(frozen=True)
class EmissionRecord:
    """One committed token with both delay readings."""

    token: str
    ideal_delay_ms: int
    ca_delay_ms: float
    step: int


@dataclass(frozen=True)
class SegmentResult:
    segment_id: str
    emissions: tuple[EmissionRecord, ...]
    final_text: str
    reference: tuple[str, ...] | None
    total_source_ms: int

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(e.token for e in self.emissions)


def run_policy(
    model: IncrementalModel,
    segment: SegmentSource,
    policy: PolicyConfig,
    clock=None,
    *,
    frontier_guard: bool = True,
    drop_final_frame: bool = True,
) -> SegmentResult:
    """Drive one segment through the incremental loop.

    Local Agreement regenerates from scratch each step; the other policies
    force the committed prefix. After the final chunk the rest of the final
    hypothesis is committed unconditionally, so every run terminates with a
    complete translation.
    """
    if clock is None:
        clock = SystemClock()
    model.reset(segment)

    committed: list[str] = []
    emissions: list[EmissionRecord] = []
    history: list[Hypothesis] = []
    wall_ms = 0.0
    total_chunks = len(segment.chunks)

    for step in range(1, total_chunks + 1):
        forced: tuple[str, ...] = ()
        if policy.kind != "local_agreement":
            forced = tuple(committed)
        hyp, cost_ms = clock.measure(lambda: model.generate(step, forced))
        history.append(hyp)

        arrival_ms = elapsed_source_ms(segment, step)
        wall_ms = max(wall_ms, float(arrival_ms)) + cost_ms

        if step < total_chunks:
            count = _decide(
                policy,
                hyp,
                history,
                len(committed),
                step,
                total_chunks,
                frontier_guard=frontier_guard,
                drop_final_frame=drop_final_frame,
            )
        else:
            # finalization: the source is exhausted, flush the rest
            count = len(hyp) - len(committed)
        count = max(0, min(count, len(hyp) - len(committed)))

        for token in hyp.tokens[len(committed) : len(committed) + count]:
            committed.append(token)
            emissions.append(
                EmissionRecord(
                    token=token,
                    ideal_delay_ms=arrival_ms,
                    ca_delay_ms=wall_ms,
                    step=step,
                )
            )

    return SegmentResult(
        segment_id=segment.id,
        emissions=tuple(emissions),
        final_text=" ".join(committed),
        reference=segment.reference,
        total_source_ms=segment.total_duration_ms,
    )


def _decide(
    policy: PolicyConfig,
    hyp: Hypothesis,
    history: Sequence[Hypothesis],
    committed: int,
    step: int,
    total_chunks: int,
    *,
    frontier_guard: bool,
    drop_final_frame: bool,
) -> int:
    if policy.kind == "waitk":
        return waitk_decide(step, total_chunks, policy.k, hyp, committed)
    if policy.kind == "local_agreement":
        return local_agreement_decide(history, committed, policy.n)
    if policy.kind == "edatt":
        return edatt_decide(
            hyp,
            committed,
            policy.lam,
            policy.alpha,
            drop_final_frame=drop_final_frame,
            frontier_guard=frontier_guard,
        )
    if policy.kind == "alignatt":
        return alignatt_decide(
            hyp, committed, policy.f, frontier_guard=frontier_guard
        )
    raise ValueError(f"unknown policy kind {policy.kind!r}")


def emission_log_entry(
    result: SegmentResult, policy: PolicyConfig, chunk_ms: int
) -> dict:
    """One segment's emission log record, the canonical input to the
    latency metrics."""
    return {
        "segment_id": result.segment_id,
        "policy": policy.kind,
        "params": policy.params(),
        "emissions": [
            {
                "token": e.token,
                "ideal_delay_ms": e.ideal_delay_ms,
                "ca_delay_ms": round(e.ca_delay_ms, 3),
                "step": e.step,
            }
            for e in result.emissions
        ],
        "final_text": result.final_text,
        "total_source_ms": result.total_source_ms,
        "chunk_ms": chunk_ms,
        "reference": " ".join(result.reference) if result.reference else None,
    }
