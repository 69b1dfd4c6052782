"""Bridge entry point: serve the dummy scripted model over stdio or TCP.

    bridge --stdio --script corpus.jsonl
    bridge --tcp 9000 --script corpus.jsonl [--chunk-ms 500]

The script file is corpus JSONL; each row needs id, duration_ms and a
script object. --chunk-ms must match the client's chunking so both sides
agree on the total chunk count per segment.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .scripted import DummyScriptedModel, ScriptEntry
from .server import BridgeSession, announce_tcp, serve_stdio, serve_tcp

logger = logging.getLogger("model_bridge")


def load_scripts(path: Path, chunk_ms: int) -> dict[str, ScriptEntry]:
    scripts = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "script" not in row:
                logger.warning("line %d has no script; skipped", line_no)
                continue
            entry = ScriptEntry.from_corpus_row(row, chunk_ms)
            scripts[entry.segment_id] = entry
    if not scripts:
        raise ValueError(f"no scripted segments in {path}")
    return scripts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge", description="Reference external-model protocol server"
    )
    endpoint = parser.add_mutually_exclusive_group(required=True)
    endpoint.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    endpoint.add_argument("--tcp", type=int, metavar="PORT", help="serve on a TCP port")
    parser.add_argument(
        "--script", required=True, type=Path, help="corpus JSONL with per-segment scripts"
    )
    parser.add_argument("--chunk-ms", type=int, default=500)
    parser.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        scripts = load_scripts(args.script, args.chunk_ms)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    def session_factory() -> BridgeSession:
        return BridgeSession(DummyScriptedModel(scripts))

    if args.stdio:
        serve_stdio(session_factory())
        return 0
    server = serve_tcp(args.tcp, session_factory, host=args.host)
    print(announce_tcp(server), file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
