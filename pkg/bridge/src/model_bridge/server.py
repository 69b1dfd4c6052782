"""Wire-protocol server: newline-delimited JSON over stdio or TCP.

One session per connection. Malformed input never takes the server down;
every bad line is answered with an error object and the loop continues.

Mounting a real model
---------------------
The bridge ships a dummy scripted model, but anything satisfying
:class:`ModelHook` can be served instead::

    from model_bridge.server import BridgeSession, serve_tcp

    class MyModel:
        def reset(self, segment_id): ...
        def generate(self, segment_id, chunks, chunks_read, forced_prefix):
            # run incremental inference over the feature chunks and return
            # (tokens, attention_rows); rows are renormalized before they
            # go on the wire
            return tokens, rows

    serve_tcp(port=9000, session_factory=lambda: BridgeSession(MyModel()))
"""

from __future__ import annotations

import json
import logging
import socket
import socketserver
import sys
from typing import Protocol

import numpy as np

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


class ModelHook(Protocol):
    """What the bridge needs from a mounted model."""

    def reset(self, segment_id: str) -> None: ...

    def generate(
        self,
        segment_id: str,
        chunks: list,
        chunks_read: int,
        forced_prefix: list[str],
    ) -> tuple[list[str], list[list[float]]]: ...


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def _normalized_rows(rows: list[list[float]]) -> list[list[float]]:
    """Guarantee each attention row sums to one before it hits the wire.

    Rows already normalized pass through bit-exactly; degenerate all-zero
    rows become uniform."""
    out = []
    for row in rows:
        arr = np.asarray(row, dtype=np.float64)
        total = float(arr.sum())
        if arr.size and abs(total - 1.0) > 1e-12:
            if total <= 0.0:
                arr = np.full(arr.shape, 1.0 / arr.size)
            else:
                arr = arr / total
        out.append(arr.tolist())
    return out


class BridgeSession:
    """Protocol state machine for one connection.

    Tracks the active segment plus the latest chunk buffer and forced
    prefix so a mounted model can be driven incrementally; ``reset``
    clears all of it.
    """

    def __init__(self, model: ModelHook):
        self.model = model
        self.segment_id: str | None = None
        self.chunks: list = []
        self.forced_prefix: list[str] = []

    def handle_line(self, line: str) -> str | None:
        """Reply for one request line; None when the message has no reply."""
        line = line.strip()
        if not line:
            return None
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            return json.dumps(_error("bad_request", f"unparseable JSON: {exc}"))
        if not isinstance(message, dict) or "type" not in message:
            return json.dumps(_error("bad_request", "expected an object with a type"))
        try:
            reply = self._dispatch(message)
        except Exception as exc:  # the session must survive anything
            logger.exception("request failed")
            reply = _error("internal", str(exc))
        return None if reply is None else json.dumps(reply)

    def _dispatch(self, message: dict) -> dict | None:
        kind = message["type"]
        if kind == "hello":
            return {"type": "hello_ack", "version": PROTOCOL_VERSION}
        if kind == "reset":
            if "segment_id" not in message:
                return _error("bad_request", "reset without segment_id")
            self.segment_id = str(message["segment_id"])
            self.chunks = []
            self.forced_prefix = []
            self.model.reset(self.segment_id)
            return None
        if kind == "generate":
            return self._generate(message)
        return _error("unsupported", f"unknown message type {kind!r}")

    def _generate(self, message: dict) -> dict:
        for field in ("segment_id", "chunks_read"):
            if field not in message:
                return _error("bad_request", f"generate without {field}")
        segment_id = str(message["segment_id"])
        if self.segment_id is None:
            return _error("no_segment", "generate before reset")
        if segment_id != self.segment_id:
            return _error(
                "segment_mismatch",
                f"active segment is {self.segment_id!r}, got {segment_id!r}",
            )
        chunks = message.get("chunks", [])
        forced_prefix = [str(t) for t in message.get("forced_prefix", [])]
        if not isinstance(chunks, list):
            return _error("bad_request", "chunks must be an array")
        self.chunks = chunks
        self.forced_prefix = forced_prefix
        try:
            tokens, rows = self.model.generate(
                segment_id, chunks, int(message["chunks_read"]), forced_prefix
            )
        except KeyError as exc:
            return _error("unknown_segment", str(exc))
        except (ValueError, TypeError) as exc:
            return _error("contract_violation", str(exc))
        return {
            "type": "hypothesis",
            "segment_id": segment_id,
            "tokens": list(tokens),
            "attention": _normalized_rows(rows),
        }


def serve_stdio(session: BridgeSession, stdin=None, stdout=None) -> None:
    """Serve one session over stdin/stdout until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        reply = session.handle_line(line)
        if reply is not None:
            stdout.write(reply + "\n")
            stdout.flush()


def serve_tcp(port: int, session_factory, host: str = "127.0.0.1"):
    """Serve one session per TCP connection; returns the bound server.

    Call ``serve_forever`` on the result (or ``handle_request`` in tests);
    ``shutdown`` stops it.
    """

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = session_factory()
            for raw in self.rfile:
                reply = session.handle_line(raw.decode("utf-8", errors="replace"))
                if reply is not None:
                    try:
                        self.wfile.write((reply + "\n").encode("utf-8"))
                        self.wfile.flush()
                    except (BrokenPipeError, ConnectionResetError):
                        return

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    return Server((host, port), Handler)


def announce_tcp(server) -> str:
    host, port = server.server_address[:2]
    return f"listening on {host}:{port}"
