"""Latency metrics on hand-built delay profiles.

AL measures how far behind an evenly paced schedule the emissions run;
LAAL guards it against over-generation; ATD compares token end times with
the end times of their corresponding source chunks.
"""

from streamsim import (
    DelayProfile,
    average_lagging,
    average_token_delay,
    length_adaptive_al,
)


def show(label, profile):
    print(
        f"{label:34s} AL {average_lagging(profile):7.1f} ms   "
        f"LAAL {length_adaptive_al(profile):7.1f} ms   "
        f"ATD {average_token_delay(profile):7.1f} ms"
    )


# three tokens over a 1.5 s source, one token per 500 ms chunk
paced = DelayProfile(
    delays_ms=(500, 1000, 1500), source_duration_ms=1500, ref_len=3, chunk_ms=500
)
show("perfectly paced", paced)

# everything held back to the end of the source
final_burst = DelayProfile(
    delays_ms=(1500, 1500, 1500), source_duration_ms=1500, ref_len=3, chunk_ms=500
)
show("all tokens at source end", final_burst)

# over-generation: 5 tokens against a 3-token reference; LAAL paces by the
# hypothesis length instead and reads lower than AL would suggest
verbose = DelayProfile(
    delays_ms=(500, 700, 900, 1200, 1500),
    source_duration_ms=1500,
    ref_len=3,
    chunk_ms=500,
)
show("over-generating hypothesis", verbose)

# charging 120 ms of playback per token pushes ATD up without moving AL
spoken = DelayProfile(
    delays_ms=(500, 1000, 1500),
    source_duration_ms=1500,
    ref_len=3,
    chunk_ms=500,
    output_token_ms=120,
)
show("with 120 ms per output token", spoken)
