"""Corpus BLEU with the 13a tokenizer, mixed case, exponential smoothing.

One fixed scoring recipe rather than a metrics library: 4-gram corpus BLEU
where an order with zero matches is smoothed to 1/(2^s * total), s counting
the zero orders seen so far, and the brevity penalty is
min(1, exp(1 - ref_len/hyp_len)).
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

logger = logging.getLogger(__name__)

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuConfig:
    """The one scoring recipe this module implements.

    The fields document the signature rather than offering plug-ins;
    constructing any variant raises.
    """

    max_order: int = 4
    smoothing: str = "exp"
    tokenizer: str = "13a"
    case: str = "mixed"

    def __post_init__(self):
        if (self.max_order, self.smoothing, self.tokenizer, self.case) != (
            4,
            "exp",
            "13a",
            "mixed",
        ):
            raise ValueError(
                "only the fixed recipe max_order=4/exp/13a/mixed is supported"
            )

    @property
    def signature(self) -> str:
        return f"case:{self.case}|eff:no|tok:{self.tokenizer}|smooth:{self.smoothing}"


BLEU_CONFIG = BleuConfig()

_ENTITIES = (
    ("<skipped>", ""),
    ("-\n", ""),
    ("\n", " "),
    ("&quot;", '"'),
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
)

# Symbols always split; periods/commas only when not between digits; dashes
# after digits.
_RULES = (
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
)


def tokenize_13a(text: str) -> list[str]:
    """Minimal international tokenization: entity unescaping, punctuation
    padding except inside numbers, whitespace collapse."""
    for old, new in _ENTITIES:
        text = text.replace(old, new)
    text = f" {text} "
    for pattern, repl in _RULES:
        text = pattern.sub(repl, text)
    return text.split()


def _ngrams(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "bleu": round(self.score, 2),
            "precisions": [round(p, 4) for p in self.precisions],
            "brevity_penalty": round(self.brevity_penalty, 4),
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
        }


def corpus_bleu(
    hyps: Sequence[str], refs: Sequence[str], cfg: BleuConfig = BLEU_CONFIG
) -> BleuScore:
    """Corpus-level BLEU of hypothesis strings against one reference each.

    Case is preserved; both sides are tokenized with
    :func:`tokenize_13a`.
    """
    if len(hyps) != len(refs):
        raise ValueError(
            f"hypothesis count {len(hyps)} != reference count {len(refs)}"
        )
    if not hyps:
        raise ValueError("corpus must contain at least one pair")

    matched = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_tokens = tokenize_13a(hyp)
        ref_tokens = tokenize_13a(ref)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for order in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp_tokens, order)
            ref_counts = _ngrams(ref_tokens, order)
            total[order - 1] += sum(hyp_counts.values())
            matched[order - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )

    if hyp_len == 0:
        logger.warning("empty hypothesis corpus scores 0")
        return BleuScore(0.0, (0.0,) * MAX_ORDER, 0.0, 0, ref_len, degenerate=True)

    precisions = []
    smooth = 1
    for order in range(MAX_ORDER):
        if total[order] == 0:
            precisions.append(0.0)
        elif matched[order] == 0:
            precisions.append(1.0 / (2**smooth * total[order]))
            smooth += 1
        else:
            precisions.append(matched[order] / total[order])

    bp = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    if min(precisions) > 0.0:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER) * 100.0
    else:
        score = 0.0
    return BleuScore(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )
