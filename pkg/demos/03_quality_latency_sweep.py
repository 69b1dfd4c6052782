"""Sweep policy hyperparameters over a synthetic corpus and plot the curve.

Produces the quality/latency trade-off data the harness exists for: one
CSV row per grid point, ideal and computation-aware, plus an SVG plot.
Run from the repository root; artifacts land in ./sweep-demo/.
"""

from pathlib import Path

from streamsim import PolicyConfig, RunConfig, make_random_corpus, sweep, write_corpus
from streamsim.harness import write_curve_svg

out = Path("sweep-demo")
out.mkdir(exist_ok=True)

# a deterministic 60-segment scripted corpus; references equal the scripts
corpus_path = out / "corpus.jsonl"
write_corpus(make_random_corpus(60, seed=17), corpus_path)

# AlignAtt: the frontier width f trades latency for stability. The fixed
# 150 ms per-generate cost stands in for model computation so the CA
# columns are meaningful and deterministic.
cfg = RunConfig(
    corpus=corpus_path,
    policy=PolicyConfig(kind="alignatt", f=1),
    out_dir=out / "alignatt",
    clock="step:150",
)
rows, failures = sweep(cfg, [1, 2, 4, 6])
assert not failures

print(f"{'f':>6s} {'BLEU':>7s} {'AL(s)':>7s} {'AL_CA(s)':>9s}")
for row in rows:
    print(f"{row.param:>6} {row.bleu:>7.2f} {row.al:>7.3f} {row.al_ca:>9.3f}")

write_curve_svg(rows, out / "alignatt_curve.svg")
print(f"\nCSV at {out / 'alignatt' / 'curve.csv'}")
print(f"SVG at {out / 'alignatt_curve.svg'}")

# EDAtt sweeps its threshold the other way: smaller alpha waits longer
edatt_rows, _ = sweep(
    RunConfig(
        corpus=corpus_path,
        policy=PolicyConfig(kind="edatt", lam=2, alpha=0.1),
        out_dir=out / "edatt",
        clock="step:150",
    ),
    [0.05, 0.1, 0.2, 0.4],
)
print(f"\n{'alpha':>6s} {'BLEU':>7s} {'AL(s)':>7s}")
for row in edatt_rows:
    print(f"{row.param:>6} {row.bleu:>7.2f} {row.al:>7.3f}")
