"""
In-process simulated network with an optional adversary.

Messages pass through intermediate hosts before reaching their recipient, and
any of those hosts may read, alter or re-send them. The
adversary modes are:
    none                     deliver verbatim
    eavesdrop                deliver verbatim, keep a copy (the transcript is the copy)
    tamper:<msg>:<bit>       flip one bit of message <msg> (1-based) before delivery
    replay:<msg>             deliver message <msg>, then inject it a second time
"""

import logging
from dataclasses import dataclass, field

# Configure logging
logger = logging.getLogger(__name__)

ADVERSARY_KINDS = ("none", "eavesdrop", "tamper", "replay")


@dataclass(frozen=True)
class Adversary:
    kind: str = "none"
    message_index: int = 0
    bit_index: int = 0

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary {self.kind!r}")
        if self.kind in ("tamper", "replay") and self.message_index < 1:
            raise ValueError("message indices are 1-based")
        if self.bit_index < 0:
            raise ValueError("bit index must be non-negative")

    def describe(self):
        if self.kind == "tamper":
            return f"tamper:{self.message_index}:{self.bit_index}"
        if self.kind == "replay":
            return f"replay:{self.message_index}"
        return self.kind


def parse_adversary(spec):
    """Parse 'none', 'eavesdrop', 'tamper:<msg>:<bit>' or 'replay:<msg>'."""
    parts = spec.strip().split(":")
    kind = parts[0]
    try:
        if kind in ("none", "eavesdrop") and len(parts) == 1:
            return Adversary(kind)
        if kind == "tamper" and len(parts) == 3:
            return Adversary(kind, int(parts[1]), int(parts[2]))
        if kind == "replay" and len(parts) == 2:
            return Adversary(kind, int(parts[1]))
    except ValueError as e:
        raise ValueError(f"bad adversary spec {spec!r}: {e}") from e
    raise ValueError(f"bad adversary spec {spec!r}; expected none|eavesdrop|tamper:<msg>:<bit>|replay:<msg>")


@dataclass
class Hop:
    index: int
    sender: str
    recipient: str
    label: str
    length: int
    tampered: bool = False
    replayed: bool = False


@dataclass
class SimNetwork:
    """Append-only transcript of every delivered message, verbatim as delivered."""

    adversary: Adversary = field(default_factory=Adversary)
    transcript: list = field(default_factory=list)
    hops: list = field(default_factory=list)
    sent_count: int = 0

    def deliver(self, sender, recipient, payload, label=""):
        """Send ``payload``; returns the bytes the recipient actually receives."""
        self.sent_count += 1
        index = self.sent_count
        data = bytes(payload)
        tampered = False
        if self.adversary.kind == "tamper" and self.adversary.message_index == index and data:
            bit = self.adversary.bit_index % (len(data) * 8)
            flipped = bytearray(data)
            flipped[bit // 8] ^= 0x80 >> (bit % 8)
            data = bytes(flipped)
            tampered = True
            logger.debug(f"Adversary flipped bit {bit} of message {index} ({label})")
        self.transcript.append(data)
        self.hops.append(Hop(index, sender, recipient, label, len(data), tampered=tampered))
        return data

    def wants_replay(self, index):
        return self.adversary.kind == "replay" and self.adversary.message_index == index

    def replay(self, index):
        """Re-inject the bytes delivered as message ``index``; the copy is appended to the transcript."""
        original = self.hops[index - 1]
        data = self.transcript[index - 1]
        self.transcript.append(data)
        self.hops.append(Hop(index, original.sender, original.recipient, original.label, len(data), replayed=True))
        logger.debug(f"Adversary replayed message {index} ({original.label})")
        return data
