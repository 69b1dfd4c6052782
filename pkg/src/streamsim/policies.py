"""Decision policies: given the state of an incremental run, how many new
tokens of the current hypothesis to commit.

All four are pure functions. wait-k is fixed (source-content independent);
Local Agreement compares successive regenerations; EDAtt and AlignAtt read
the cross-attention of the hypothesis itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Hypothesis

POLICY_KINDS = ("waitk", "local_agreement", "edatt", "alignatt")

# PolicyConfig field name required by each kind, and the field swept by the
# harness grid. EDAtt additionally requires the tail window ``lam``.
_REQUIRED_FIELDS = {
    "waitk": ("k",),
    "local_agreement": ("n",),
    "edatt": ("lam", "alpha"),
    "alignatt": ("f",),
}
SWEEP_FIELD = {
    "waitk": "k",
    "local_agreement": "n",
    "edatt": "alpha",
    "alignatt": "f",
}


@dataclass(frozen=True)
class PolicyConfig:
    """Policy identity plus exactly the hyperparameters that kind uses.

    k: chunks to wait before the one-token-per-chunk schedule (waitk).
    n: agreement depth, successive hypotheses that must share a prefix
       (local_agreement, >= 2).
    lam: tail window in frames whose attention mass gates emission (edatt).
    alpha: attention-mass threshold in (0, 1] (edatt).
    f: frontier width in frames; tokens aligned there are held back
       (alignatt).
    """

    kind: str
    k: int | None = None
    n: int | None = None
    lam: int | None = None
    alpha: float | None = None
    f: int | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "local_agreement" and self.n is None:
            object.__setattr__(self, "n", 2)
        required = _REQUIRED_FIELDS[self.kind]
        for name in ("k", "n", "lam", "alpha", "f"):
            value = getattr(self, name)
            if name in required and value is None:
                raise ValueError(f"policy {self.kind!r} requires {name!r}")
            if name not in required and value is not None:
                raise ValueError(f"policy {self.kind!r} does not take {name!r}")
        if self.k is not None and self.k <= 0:
            raise ValueError("k must be a positive chunk count")
        if self.n is not None and self.n < 2:
            raise ValueError("agreement depth n must be >= 2")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be a positive frame count")
        if self.alpha is not None and not (0 < self.alpha <= 1):
            raise ValueError("alpha must lie in (0, 1]")
        if self.f is not None and self.f <= 0:
            raise ValueError("f must be a positive frame count")

    def params(self) -> dict:
        """Hyperparameters for logs and manifests; ``lam`` is written out
        under its conventional name ``lambda``."""
        out = {}
        for name in _REQUIRED_FIELDS[self.kind]:
            key = "lambda" if name == "lam" else name
            out[key] = getattr(self, name)
        return out

    def with_sweep_value(self, value) -> "PolicyConfig":
        field = SWEEP_FIELD[self.kind]
        kwargs = {
            name: getattr(self, name)
            for name in _REQUIRED_FIELDS[self.kind]
            if name != field
        }
        caster = float if field == "alpha" else int
        kwargs[field] = caster(value)
        return PolicyConfig(kind=self.kind, **kwargs)


def waitk_decide(
    chunks_read: int,
    total_chunks: int,
    k: int,
    hyp: Hypothesis,
    committed: int,
) -> int:
    """One token per chunk once k chunks have been read."""
    if k <= 0:
        raise ValueError("k must be a positive chunk count")
    if chunks_read > total_chunks:
        raise ValueError("chunks_read exceeds total_chunks")
    if committed > len(hyp):
        raise ValueError("committed exceeds hypothesis length")
    if chunks_read < k:
        return 0
    allowance = chunks_read - k + 1
    return max(0, min(len(hyp) - committed, allowance - committed))


def local_agreement_decide(
    history: Sequence[Hypothesis], committed: int, n: int = 2
) -> int:
    """Commit the longest token prefix on which the last n regenerations
    agree. Nothing is committed until n hypotheses exist."""
    if not history:
        raise ValueError("history must contain at least the current hypothesis")
    if n < 2:
        raise ValueError("agreement depth n must be >= 2")
    if committed > len(history[-1]):
        raise ValueError("committed exceeds newest hypothesis length")
    if len(history) < n:
        return 0
    window = [h.tokens for h in history[-n:]]
    agreed = 0
    for tokens in zip(*window):
        if any(t != tokens[0] for t in tokens[1:]):
            break
        agreed += 1
    return max(0, agreed - committed)


def _edatt_tail_mass(row: np.ndarray, lam: int, drop_final_frame: bool) -> float:
    if drop_final_frame:
        head = row[:-1].sum()
        if head <= 0.0:
            # all mass sat on the newest frame: maximally uncertain
            return 1.0
        row = np.concatenate([row[:-1] / head, [0.0]])
    return float(row[-lam:].sum()) if lam > 0 else 0.0


def edatt_decide(
    hyp: Hypothesis,
    committed: int,
    lam: int,
    alpha: float,
    *,
    drop_final_frame: bool = True,
    frontier_guard: bool = True,
) -> int:
    """Emit tokens until one holds attention mass above ``alpha`` on the
    last ``lam`` frames; that token and everything after it wait.

    By default each row first has the newest frame zeroed and is
    renormalized (attention piles up there on partial input), and the last
    hypothesis token is never emitted (it is the most unstable one).
    """
    if hyp.frames_received < 1:
        raise ValueError("hypothesis must cover at least one frame")
    if committed > len(hyp):
        raise ValueError("committed exceeds hypothesis length")
    if lam <= 0:
        raise ValueError("lam must be a positive frame count")
    lam = min(lam, hyp.frames_received - 1)
    limit = len(hyp) - 1 if frontier_guard else len(hyp)
    emitted = 0
    for i in range(committed, limit):
        if _edatt_tail_mass(hyp.attention[i], lam, drop_final_frame) > alpha:
            break
        emitted += 1
    return emitted


def alignatt_decide(
    hyp: Hypothesis,
    committed: int,
    f: int,
    *,
    frontier_guard: bool = True,
) -> int:
    """Emit tokens whose attention argmax falls before the last ``f``
    frames; stop at the first token aligned inside that frontier.

    Argmax ties break toward the lowest frame index.
    """
    if hyp.frames_received < 1:
        raise ValueError("hypothesis must cover at least one frame")
    if committed > len(hyp):
        raise ValueError("committed exceeds hypothesis length")
    if f <= 0:
        raise ValueError("f must be a positive frame count")
    limit = len(hyp) - 1 if frontier_guard else len(hyp)
    emitted = 0
    for i in range(committed, limit):
        aligned_frame = int(np.argmax(hyp.attention[i])) + 1
        if aligned_frame > hyp.frames_received - f:
            break
        emitted += 1
    return emitted
