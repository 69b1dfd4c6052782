"""Drive the loop against an external model over the wire protocol.

Any process that speaks the newline-delimited JSON protocol can serve as
the model. The reference server lives in the bridge/ package; once it is
installed (pip install -e ./bridge) this demo launches it as a subprocess
over stdio and checks that the remote run matches the in-process one.
"""

import shutil
import sys
from pathlib import Path

from streamsim import (
    FixedCostClock,
    PolicyConfig,
    load_corpus,
    make_random_corpus,
    run_policy,
    write_corpus,
)
from streamsim.remote import open_model
from streamsim.scripted import ScriptedModel

if shutil.which("bridge") is None:
    sys.exit("bridge command not found: pip install -e ./bridge first")

out = Path("bridge-demo")
out.mkdir(exist_ok=True)
corpus_path = out / "corpus.jsonl"
write_corpus(make_random_corpus(5, seed=23), corpus_path)

rows = load_corpus(corpus_path, chunk_ms=500)
policy = PolicyConfig(kind="alignatt", f=2)

remote = open_model(f"proto:stdio:bridge --stdio --script {corpus_path}")
try:
    for row in rows:
        via_bridge = run_policy(remote, row.segment, policy, FixedCostClock(0))
        in_process = run_policy(
            ScriptedModel(row.script), row.segment, policy, FixedCostClock(0)
        )
        match = "ok" if via_bridge.emissions == in_process.emissions else "MISMATCH"
        print(f"{row.segment.id}: {match}  ->  {via_bridge.final_text}")
finally:
    remote.close()
