"""In-process message bus that records every delivery as a transcript."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional

# (index, entry) -> replacement bytes, or None to deliver unchanged
TamperHook = Callable[[int, "TranscriptEntry"], Optional[bytes]]


@dataclass(frozen=True)
class TranscriptEntry:
    direction: str  # "request" or "response"
    src: str
    dst: str
    name: str
    data: bytes

    def line(self) -> str:
        return f"{self.direction} {self.src}→{self.dst} {self.data.hex()}"


class MessageBus:
    def __init__(self, tamper: Optional[TamperHook] = None):
        self.transcript: List[TranscriptEntry] = []
        self.tamper = tamper

    def deliver(self, src: str, dst: str, name: str, data: bytes, direction: str = "request") -> bytes:
        entry = TranscriptEntry(direction, src, dst, name, bytes(data))
        if self.tamper is not None:
            replaced = self.tamper(len(self.transcript), entry)
            if replaced is not None:
                entry = TranscriptEntry(direction, src, dst, name, bytes(replaced))
        self.transcript.append(entry)
        return entry.data

    def mark(self) -> int:
        return len(self.transcript)

    def since(self, mark: int) -> List[TranscriptEntry]:
        return self.transcript[mark:]

    def inbound(self, actor: str) -> List[TranscriptEntry]:
        return [e for e in self.transcript if e.dst == actor]

    def dump(self, path, entries: Optional[List[TranscriptEntry]] = None) -> None:
        entries = self.transcript if entries is None else entries
        Path(path).write_text("".join(e.line() + "\n" for e in entries), encoding="utf-8")


def flip_bit(index: int, byte_offset: int, bit: int = 0) -> TamperHook:
    """Tamper hook flipping one bit of the ``index``-th delivered message."""

    def hook(i, entry):
        if i != index:
            return None
        data = bytearray(entry.data)
        data[byte_offset % len(data)] ^= 1 << bit
        return bytes(data)

    return hook
