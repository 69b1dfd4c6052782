"""Tagged translation output to timed subtitles, SRT I/O, conformity.

Tagged text interleaves tokens with two markers: ``<eol>`` breaks a line
inside a subtitle block, ``<eob>`` ends the block. Blocks carry at most two
lines. Character counts include spaces and punctuation; the line break
itself is never counted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import MetricUndefinedError, SrtParseError, SubtitleValidationError

EOL = "<eol>"
EOB = "<eob>"

MAX_LINES_PER_BLOCK = 2
CPL_LIMIT = 42
CPS_LIMIT = 21.0

_TIMECODE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")


@dataclass(frozen=True)
class SubtitleBlock:
    """1-2 lines of text shown from start_ms to end_ms."""

    lines: tuple[str, ...]
    start_ms: int
    end_ms: int

    def __post_init__(self):
        if not 1 <= len(self.lines) <= MAX_LINES_PER_BLOCK:
            raise SubtitleValidationError(
                f"a block must have 1-{MAX_LINES_PER_BLOCK} lines, "
                f"got {len(self.lines)}"
            )
        if self.end_ms <= self.start_ms:
            raise SubtitleValidationError(
                f"block must end after it starts ({self.start_ms} -> {self.end_ms})"
            )

    @property
    def char_count(self) -> int:
        return sum(len(line) for line in self.lines)

    @property
    def duration_s(self) -> float:
        return (self.end_ms - self.start_ms) / 1000.0


def parse_tagged(text: str) -> list[list[str]]:
    """Split tagged text into blocks of line strings.

    Trailing text without a final block marker forms an implicit last
    block; empty lines and empty blocks are dropped.
    """
    blocks = []
    for raw_block in text.split(EOB):
        lines = []
        for raw_line in raw_block.split(EOL):
            line = " ".join(raw_line.split())
            if line:
                lines.append(line)
        if not lines:
            continue
        if len(lines) > MAX_LINES_PER_BLOCK:
            raise SubtitleValidationError(
                f"block {len(blocks) + 1} has {len(lines)} lines "
                f"(max {MAX_LINES_PER_BLOCK}): {lines!r}"
            )
        blocks.append(lines)
    return blocks


def render_tagged(blocks: Sequence[Sequence[str]]) -> str:
    """Inverse of :func:`parse_tagged`; every block ends with its marker."""
    parts = []
    for lines in blocks:
        parts.append(f" {EOL} ".join(lines) + f" {EOB}")
    return " ".join(parts)


def _block_token_counts(blocks: Sequence[Sequence[str]]) -> list[int]:
    return [sum(len(line.split()) for line in lines) for lines in blocks]


def assign_timestamps(
    blocks: Sequence[Sequence[str]],
    alignment: Sequence[int],
    frame_ms: int,
) -> list[SubtitleBlock]:
    """Time each block from the frames its first and last tokens align to.

    A block ends when the frame of its last token ends; it starts when its
    first token's frame starts, clamped so blocks never overlap.
    """
    if frame_ms <= 0:
        raise ValueError("frame_ms must be positive")
    counts = _block_token_counts(blocks)
    if sum(counts) != len(alignment):
        raise ValueError(
            f"alignment covers {len(alignment)} tokens but the blocks "
            f"contain {sum(counts)}"
        )
    if any(a < 1 for a in alignment):
        raise ValueError("frame indices are 1-based and must be >= 1")
    if any(b < a for a, b in zip(alignment, alignment[1:])):
        raise ValueError("alignment must be non-decreasing")

    timed = []
    cursor = 0
    prev_end = 0
    for lines, count in zip(blocks, counts):
        if count == 0:
            raise ValueError(f"block {lines!r} contains no tokens")
        first_frame = alignment[cursor]
        last_frame = alignment[cursor + count - 1]
        cursor += count
        start = max(prev_end, (first_frame - 1) * frame_ms)
        end = last_frame * frame_ms
        if end <= start:
            raise ValueError(
                f"block {lines!r} would get a non-positive duration "
                f"({start} -> {end}); alignment is too crowded"
            )
        timed.append(SubtitleBlock(lines=tuple(lines), start_ms=start, end_ms=end))
        prev_end = end
    return timed


def format_timecode(ms: int) -> str:
    if ms < 0:
        raise ValueError("timecodes cannot be negative")
    seconds, millis = divmod(int(ms), 1000)
    minutes, secs = divmod(seconds, 60)
    hours, mins = divmod(minutes, 60)
    return f"{hours:02d}:{mins:02d}:{secs:02d},{millis:03d}"


def parse_timecode(text: str, line_no: int) -> int:
    match = _TIMECODE.match(text)
    if not match:
        raise SrtParseError(line_no, f"malformed timecode {text!r}")
    hours, minutes, seconds, millis = (int(g) for g in match.groups())
    return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis


def write_srt(blocks: Sequence[SubtitleBlock]) -> str:
    """Render blocks in SRT form: index, timecode range, text, blank line."""
    parts = []
    for i, block in enumerate(blocks, start=1):
        parts.append(
            f"{i}\n"
            f"{format_timecode(block.start_ms)} --> {format_timecode(block.end_ms)}\n"
            + "\n".join(block.lines)
            + "\n\n"
        )
    return "".join(parts)


def parse_srt(text: str) -> list[SubtitleBlock]:
    """Strict inverse of :func:`write_srt`."""
    blocks = []
    lines = text.split("\n")
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        if not lines[pos].strip().isdigit():
            raise SrtParseError(pos + 1, f"expected a block index, got {lines[pos]!r}")
        pos += 1
        if pos >= len(lines) or " --> " not in lines[pos]:
            raise SrtParseError(pos + 1, "expected a timecode range")
        start_text, _, end_text = lines[pos].partition(" --> ")
        start = parse_timecode(start_text.strip(), pos + 1)
        end = parse_timecode(end_text.strip(), pos + 1)
        pos += 1
        text_lines = []
        while pos < len(lines) and lines[pos].strip():
            text_lines.append(lines[pos])
            pos += 1
        if not text_lines:
            raise SrtParseError(pos + 1, "block has no text lines")
        if len(text_lines) > MAX_LINES_PER_BLOCK:
            raise SrtParseError(
                pos + 1, f"block has {len(text_lines)} lines (max {MAX_LINES_PER_BLOCK})"
            )
        blocks.append(
            SubtitleBlock(lines=tuple(text_lines), start_ms=start, end_ms=end)
        )
    return blocks


def _lines_of(block) -> Sequence[str]:
    return block.lines if isinstance(block, SubtitleBlock) else block


def cpl_conformity(blocks: Sequence, limit: int = CPL_LIMIT) -> float:
    """Percentage of lines at or under the per-line character limit."""
    lines = [line for block in blocks for line in _lines_of(block)]
    if not lines:
        raise MetricUndefinedError("no lines: CPL conformity is undefined")
    conforming = sum(1 for line in lines if len(line) <= limit)
    return 100.0 * conforming / len(lines)


def cps_conformity(blocks: Sequence[SubtitleBlock], limit: float = CPS_LIMIT) -> float:
    """Percentage of blocks whose reading speed is at or under the limit."""
    if not blocks:
        raise MetricUndefinedError("no blocks: CPS conformity is undefined")
    conforming = 0
    for block in blocks:
        if block.duration_s <= 0:
            raise ValueError(f"block {block.lines!r} has non-positive duration")
        if block.char_count / block.duration_s <= limit:
            conforming += 1
    return 100.0 * conforming / len(blocks)


def conformity_report(blocks: Sequence[SubtitleBlock]) -> dict:
    return {
        "cpl_pct": cpl_conformity(blocks),
        "cps_pct": cps_conformity(blocks),
        "line_count": sum(len(b.lines) for b in blocks),
        "block_count": len(blocks),
    }
