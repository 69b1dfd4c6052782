import numpy as np
import pytest

from streamsim import Hypothesis


def make_hyp(rows, tokens=None) -> Hypothesis:
    """Hypothesis from raw attention rows; tokens default to t0, t1, ..."""
    att = np.asarray(rows, dtype=np.float64)
    if att.ndim != 2:
        att = att.reshape(0, 0)
    if tokens is None:
        tokens = tuple(f"t{i}" for i in range(att.shape[0]))
    return Hypothesis(
        tokens=tuple(tokens), attention=att, frames_received=att.shape[1]
    )


@pytest.fixture
def hyp_factory():
    return make_hyp
