"""Client for external incremental models speaking newline-delimited JSON.

One JSON object per line, over a subprocess's stdio or a TCP socket:

    -> {"type":"hello","version":1}
    <- {"type":"hello_ack","version":1}
    -> {"type":"reset","segment_id":S}
    -> {"type":"generate","segment_id":S,"chunks_read":N,
        "chunks":[[...floats...],...],"forced_prefix":["tok",...]}
    <- {"type":"hypothesis","segment_id":S,"tokens":[...],
        "attention":[[...],...]}
    <- {"type":"error","code":...,"message":...}

Unknown fields in incoming messages are ignored. ``reset`` has no reply.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
from typing import Sequence

import numpy as np

from .core import Hypothesis, SegmentSource
from .errors import ProtocolError

PROTOCOL_VERSION = 1


class StdioTransport:
    """Line transport over a child process's stdin/stdout."""

    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def send_line(self, line: str) -> None:
        if self.proc.stdin is None:
            raise ProtocolError("transport_closed", "child stdin unavailable")
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv_line(self) -> str:
        if self.proc.stdout is None:
            raise ProtocolError("transport_closed", "child stdout unavailable")
        line = self.proc.stdout.readline()
        if not line:
            raise ProtocolError("transport_closed", "child process closed its stdout")
        return line.rstrip("\n")

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.terminate()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


class TcpTransport:
    """Line transport over a TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._reader = self.sock.makefile("r", encoding="utf-8", newline="\n")

    def send_line(self, line: str) -> None:
        self.sock.sendall((line + "\n").encode("utf-8"))

    def recv_line(self) -> str:
        line = self._reader.readline()
        if not line:
            raise ProtocolError("transport_closed", "server closed the connection")
        return line.rstrip("\n")

    def close(self) -> None:
        self._reader.close()
        self.sock.close()


class RemoteModel:
    """Incremental-model backend bound to a wire-protocol transport.

    Performs the version handshake on construction. ``reset`` binds a
    segment and ships nothing but its id; ``generate`` sends the chunk
    payload prefix read so far.
    """

    def __init__(self, transport):
        self.transport = transport
        self._segment: SegmentSource | None = None
        ack = self._roundtrip({"type": "hello", "version": PROTOCOL_VERSION})
        if ack.get("type") != "hello_ack" or ack.get("version") != PROTOCOL_VERSION:
            raise ProtocolError("bad_handshake", f"unexpected hello reply: {ack}")

    def _send(self, message: dict) -> None:
        self.transport.send_line(json.dumps(message))

    def _recv(self) -> dict:
        line = self.transport.recv_line()
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError("bad_json", f"unparseable reply: {line!r}") from exc
        if not isinstance(message, dict):
            raise ProtocolError("bad_json", f"reply is not an object: {line!r}")
        if message.get("type") == "error":
            raise ProtocolError(
                str(message.get("code", "unknown")), str(message.get("message", ""))
            )
        return message

    def _roundtrip(self, message: dict) -> dict:
        self._send(message)
        return self._recv()

    def reset(self, segment: SegmentSource) -> None:
        self._segment = segment
        self._send({"type": "reset", "segment_id": segment.id})

    def generate(self, chunks_read: int, forced_prefix: Sequence[str] = ()) -> Hypothesis:
        if self._segment is None:
            raise ProtocolError("no_segment", "generate before reset")
        if not 1 <= chunks_read <= len(self._segment.chunks):
            raise ValueError(f"chunks_read out of range: {chunks_read}")
        reply = self._roundtrip(
            {
                "type": "generate",
                "segment_id": self._segment.id,
                "chunks_read": chunks_read,
                "chunks": [
                    list(c.payload) for c in self._segment.chunks[:chunks_read]
                ],
                "forced_prefix": list(forced_prefix),
            }
        )
        if reply.get("type") != "hypothesis":
            raise ProtocolError(
                "unexpected_message", f"wanted a hypothesis, got {reply.get('type')!r}"
            )
        if reply.get("segment_id") != self._segment.id:
            raise ProtocolError(
                "segment_mismatch",
                f"hypothesis for {reply.get('segment_id')!r} during "
                f"{self._segment.id!r}",
            )
        tokens = tuple(str(t) for t in reply.get("tokens", []))
        rows = reply.get("attention", [])
        frames = len(rows[0]) if rows else chunks_read
        attention = (
            np.asarray(rows, dtype=np.float64)
            if rows
            else np.zeros((0, frames))
        )
        try:
            return Hypothesis(
                tokens=tokens, attention=attention, frames_received=frames
            )
        except ValueError as exc:
            raise ProtocolError("bad_hypothesis", str(exc)) from exc

    def close(self) -> None:
        self.transport.close()


def open_model(spec: str) -> RemoteModel:
    """Connect per a model spec: ``proto:HOST:PORT`` or ``proto:stdio:CMD``.

    An unreachable endpoint raises OSError with the endpoint named, so
    callers can fail fast instead of collecting per-segment errors.
    """
    if not spec.startswith("proto:"):
        raise ValueError(f"not an external model spec: {spec!r}")
    rest = spec[len("proto:") :]
    try:
        if rest.startswith("stdio:"):
            return RemoteModel(StdioTransport(rest[len("stdio:") :]))
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(
                f"expected proto:HOST:PORT or proto:stdio:CMD, got {spec!r}"
            )
        return RemoteModel(TcpTransport(host, int(port)))
    except OSError as exc:
        raise OSError(f"external model unreachable at {spec!r}: {exc}") from exc
