"""
Length-prefixed field encoding shared by certificates, envelopes, handshake
messages and SET payloads.

Every field is written as [4-byte big-endian length][payload]. Integers are
carried as their minimal big-endian bytes unless a fixed width is requested.
"""

import struct

from crypto_utils.errors import MalformedMessage

MAX_FIELD_LENGTH = 0xFFFFFFFF


def pack_field(payload):
    """Return ``payload`` prefixed with its 4-byte big-endian length."""
    payload = bytes(payload)
    if len(payload) > MAX_FIELD_LENGTH:
        raise MalformedMessage(f"field of {len(payload)} bytes cannot be length-prefixed")
    return struct.pack(">I", len(payload)) + payload


def pack_fields(*payloads):
    return b"".join(pack_field(p) for p in payloads)


def pack_u64(value):
    if not 0 <= value < 1 << 64:
        raise MalformedMessage(f"value {value} does not fit in 64 bits")
    return struct.pack(">Q", value)


def unpack_u64(data):
    if len(data) != 8:
        raise MalformedMessage(f"expected 8 bytes for a 64-bit field, got {len(data)}")
    return struct.unpack(">Q", data)[0]


class FieldReader:
    """Sequential reader over a length-prefixed byte string."""

    def __init__(self, data, offset=0):
        self.data = bytes(data)
        self.offset = offset

    def read_raw(self, length):
        end = self.offset + length
        if end > len(self.data):
            raise MalformedMessage(
                f"truncated message: need {length} bytes at offset {self.offset}, have {len(self.data) - self.offset}"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def read_field(self):
        (length,) = struct.unpack(">I", self.read_raw(4))
        return self.read_raw(length)

    def read_text(self):
        try:
            return self.read_field().decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedMessage(f"field is not valid UTF-8: {e}") from e

    def read_u64_field(self):
        return unpack_u64(self.read_field())

    def expect_magic(self, magic):
        found = self.read_raw(len(magic))
        if found != magic:
            raise MalformedMessage(f"bad magic {found!r}, expected {magic!r}")

    def finish(self):
        """Require that every byte has been consumed."""
        if self.offset != len(self.data):
            raise MalformedMessage(f"{len(self.data) - self.offset} trailing bytes after message")
