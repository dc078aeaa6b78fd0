"""Append-only negotiation transcript, one JSON object per line.

Every line carries ``tick, session_id, round, sender, msg_type, primitive,
payload_digest`` in that order. Marketplace bookkeeping (pipeline phase
markers, cancellations, executions) adds an ``event`` key and, where a
provider is addressed, a ``peer`` key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from ..contract import AgreementDocument, digest
from .messages import NegotiationMessage

__all__ = ["Clock", "TranscriptRecord", "Transcript"]


@dataclass
class Clock:
    """Logical time; every message costs one tick."""

    now: int = 0

    def tick(self) -> int:
        self.now += 1
        return self.now

    def advance_to(self, t: int) -> None:
        self.now = max(self.now, t)


@dataclass(frozen=True)
class TranscriptRecord:
    tick: int
    session_id: str
    round: int
    sender: str
    msg_type: str | None
    primitive: str | None
    payload_digest: str
    event: str | None = None
    peer: str | None = None

    def to_json(self) -> str:
        d = {
            "tick": self.tick,
            "session_id": self.session_id,
            "round": self.round,
            "sender": self.sender,
            "msg_type": self.msg_type,
            "primitive": self.primitive,
            "payload_digest": self.payload_digest,
        }
        if self.event is not None:
            d["event"] = self.event
        if self.peer is not None:
            d["peer"] = self.peer
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "TranscriptRecord":
        d = json.loads(line)
        return cls(**d)


@dataclass
class Transcript:
    clock: Clock = field(default_factory=Clock)
    records: list[TranscriptRecord] = field(default_factory=list)

    def message(self, msg: NegotiationMessage, *, peer: str | None = None) -> TranscriptRecord:
        rec = TranscriptRecord(
            tick=msg.tick,
            session_id=msg.session_id,
            round=msg.round,
            sender=msg.sender.value,
            msg_type=msg.msg_type.value,
            primitive=msg.primitive.value,
            payload_digest=digest(msg.payload),
            peer=peer,
        )
        self.clock.advance_to(msg.tick)
        self.records.append(rec)
        return rec

    def event(
        self,
        event: str,
        *,
        session_id: str,
        round: int = 0,
        sender: str = "consumer",
        payload: AgreementDocument | None = None,
        peer: str | None = None,
        msg_type: str | None = None,
        primitive: str | None = None,
    ) -> TranscriptRecord:
        rec = TranscriptRecord(
            tick=self.clock.tick(),
            session_id=session_id,
            round=round,
            sender=sender,
            msg_type=msg_type,
            primitive=primitive,
            payload_digest=digest(payload),
            event=event,
            peer=peer,
        )
        self.records.append(rec)
        return rec

    def fork(self) -> "Transcript":
        """A private buffer starting at the current tick, merged back with :meth:`join`."""
        return Transcript(clock=Clock(self.clock.now))

    def join(self, *parts: "Transcript") -> None:
        for p in parts:
            self.records.extend(p.records)
            self.clock.advance_to(p.clock.now)

    def __iter__(self) -> Iterator[TranscriptRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def dumps(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.dumps(), encoding="ascii")
        return path

    @classmethod
    def read(cls, path: str | Path) -> "Transcript":
        lines = Path(path).read_text(encoding="ascii").splitlines()
        records = [TranscriptRecord.from_json(line) for line in lines if line]
        return cls(Clock(max((r.tick for r in records), default=0)), records)
