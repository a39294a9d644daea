"""
DES and Triple-DES (TDEA) block cipher

This module provides:
1. DES block encryption/decryption per FIPS 46-3 (16 Feistel rounds, standard tables)
2. TDEA key bundles applied in E-D-E order with k1 first
3. Cipher-block chaining with pad-to-block padding for arbitrary-length messages
4. A length-prefixed CBC-MAC for message integrity

Blocks and raw keys are 64-bit integers; bit 1 of the standard is the most
significant bit. The permutations are precomputed into per-byte lookup tables
and the S-boxes are fused with the P permutation, which keeps a pure-Python
key search tolerable.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

from config import LOG_LEVEL
from crypto_utils.errors import MalformedCiphertext, PaddingError

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

BLOCK_SIZE = 8
MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF

# Bits 8, 16, ..., 64 of a key are parity positions; PC-1 never reads them.
PARITY_MASK = 0x0101010101010101
EFFECTIVE_KEY_BITS = 56
# Exactly 72,057,594,037,927,936 effective keys.
KEYSPACE_SIZE = 1 << EFFECTIVE_KEY_BITS

# FIPS 46-3 tables (1-based bit positions)
IP = [
    58, 50, 42, 34, 26, 18, 10, 2,
    60, 52, 44, 36, 28, 20, 12, 4,
    62, 54, 46, 38, 30, 22, 14, 6,
    64, 56, 48, 40, 32, 24, 16, 8,
    57, 49, 41, 33, 25, 17, 9, 1,
    59, 51, 43, 35, 27, 19, 11, 3,
    61, 53, 45, 37, 29, 21, 13, 5,
    63, 55, 47, 39, 31, 23, 15, 7,
]

FP = [
    40, 8, 48, 16, 56, 24, 64, 32,
    39, 7, 47, 15, 55, 23, 63, 31,
    38, 6, 46, 14, 54, 22, 62, 30,
    37, 5, 45, 13, 53, 21, 61, 29,
    36, 4, 44, 12, 52, 20, 60, 28,
    35, 3, 43, 11, 51, 19, 59, 27,
    34, 2, 42, 10, 50, 18, 58, 26,
    33, 1, 41, 9, 49, 17, 57, 25,
]

E = [
    32, 1, 2, 3, 4, 5,
    4, 5, 6, 7, 8, 9,
    8, 9, 10, 11, 12, 13,
    12, 13, 14, 15, 16, 17,
    16, 17, 18, 19, 20, 21,
    20, 21, 22, 23, 24, 25,
    24, 25, 26, 27, 28, 29,
    28, 29, 30, 31, 32, 1,
]

P = [
    16, 7, 20, 21, 29, 12, 28, 17,
    1, 15, 23, 26, 5, 18, 31, 10,
    2, 8, 24, 14, 32, 27, 3, 9,
    19, 13, 30, 6, 22, 11, 4, 25,
]

PC1 = [
    57, 49, 41, 33, 25, 17, 9,
    1, 58, 50, 42, 34, 26, 18,
    10, 2, 59, 51, 43, 35, 27,
    19, 11, 3, 60, 52, 44, 36,
    63, 55, 47, 39, 31, 23, 15,
    7, 62, 54, 46, 38, 30, 22,
    14, 6, 61, 53, 45, 37, 29,
    21, 13, 5, 28, 20, 12, 4,
]

PC2 = [
    14, 17, 11, 24, 1, 5,
    3, 28, 15, 6, 21, 10,
    23, 19, 12, 4, 26, 8,
    16, 7, 27, 20, 13, 2,
    41, 52, 31, 37, 47, 55,
    30, 40, 51, 45, 33, 48,
    44, 49, 39, 56, 34, 53,
    46, 42, 50, 36, 29, 32,
]

KEY_SHIFTS = [1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1]

SBOXES = [
    [14, 4, 13, 1, 2, 15, 11, 8, 3, 10, 6, 12, 5, 9, 0, 7,
     0, 15, 7, 4, 14, 2, 13, 1, 10, 6, 12, 11, 9, 5, 3, 8,
     4, 1, 14, 8, 13, 6, 2, 11, 15, 12, 9, 7, 3, 10, 5, 0,
     15, 12, 8, 2, 4, 9, 1, 7, 5, 11, 3, 14, 10, 0, 6, 13],
    [15, 1, 8, 14, 6, 11, 3, 4, 9, 7, 2, 13, 12, 0, 5, 10,
     3, 13, 4, 7, 15, 2, 8, 14, 12, 0, 1, 10, 6, 9, 11, 5,
     0, 14, 7, 11, 10, 4, 13, 1, 5, 8, 12, 6, 9, 3, 2, 15,
     13, 8, 10, 1, 3, 15, 4, 2, 11, 6, 7, 12, 0, 5, 14, 9],
    [10, 0, 9, 14, 6, 3, 15, 5, 1, 13, 12, 7, 11, 4, 2, 8,
     13, 7, 0, 9, 3, 4, 6, 10, 2, 8, 5, 14, 12, 11, 15, 1,
     13, 6, 4, 9, 8, 15, 3, 0, 11, 1, 2, 12, 5, 10, 14, 7,
     1, 10, 13, 0, 6, 9, 8, 7, 4, 15, 14, 3, 11, 5, 2, 12],
    [7, 13, 14, 3, 0, 6, 9, 10, 1, 2, 8, 5, 11, 12, 4, 15,
     13, 8, 11, 5, 6, 15, 0, 3, 4, 7, 2, 12, 1, 10, 14, 9,
     10, 6, 9, 0, 12, 11, 7, 13, 15, 1, 3, 14, 5, 2, 8, 4,
     3, 15, 0, 6, 10, 1, 13, 8, 9, 4, 5, 11, 12, 7, 2, 14],
    [2, 12, 4, 1, 7, 10, 11, 6, 8, 5, 3, 15, 13, 0, 14, 9,
     14, 11, 2, 12, 4, 7, 13, 1, 5, 0, 15, 10, 3, 9, 8, 6,
     4, 2, 1, 11, 10, 13, 7, 8, 15, 9, 12, 5, 6, 3, 0, 14,
     11, 8, 12, 7, 1, 14, 2, 13, 6, 15, 0, 9, 10, 4, 5, 3],
    [12, 1, 10, 15, 9, 2, 6, 8, 0, 13, 3, 4, 14, 7, 5, 11,
     10, 15, 4, 2, 7, 12, 9, 5, 6, 1, 13, 14, 0, 11, 3, 8,
     9, 14, 15, 5, 2, 8, 12, 3, 7, 0, 4, 10, 1, 13, 11, 6,
     4, 3, 2, 12, 9, 5, 15, 10, 11, 14, 1, 7, 6, 0, 8, 13],
    [4, 11, 2, 14, 15, 0, 8, 13, 3, 12, 9, 7, 5, 10, 6, 1,
     13, 0, 11, 7, 4, 9, 1, 10, 14, 3, 5, 12, 2, 15, 8, 6,
     1, 4, 11, 13, 12, 3, 7, 14, 10, 15, 6, 8, 0, 5, 9, 2,
     6, 11, 13, 8, 1, 4, 10, 7, 9, 5, 0, 15, 14, 2, 3, 12],
    [13, 2, 8, 4, 6, 15, 11, 1, 10, 9, 3, 14, 5, 0, 12, 7,
     1, 15, 13, 8, 10, 3, 7, 4, 12, 5, 6, 11, 0, 14, 9, 2,
     7, 11, 4, 1, 9, 12, 14, 2, 0, 6, 10, 13, 15, 3, 5, 8,
     2, 1, 14, 7, 4, 10, 8, 13, 15, 12, 9, 0, 3, 5, 6, 11],
]


def _permute_bits(value, table, in_bits):
    """Straightforward bit permutation; only used to build the lookup tables."""
    out = 0
    for position in table:
        out = (out << 1) | ((value >> (in_bits - position)) & 1)
    return out


def _byte_tables(table, in_bits):
    """One 256-entry table per input byte; OR-ing the lookups applies ``table``."""
    in_bytes = in_bits // 8
    tables = []
    for j in range(in_bytes):
        shift = in_bits - 8 * (j + 1)
        tables.append(tuple(_permute_bits(v << shift, table, in_bits) for v in range(256)))
    return tuple(tables)


def _sp_tables():
    """S-box outputs already routed through P, one 64-entry table per box."""
    tables = []
    for box, sbox in enumerate(SBOXES):
        entries = []
        for v in range(64):
            row = ((v >> 4) & 0b10) | (v & 1)
            col = (v >> 1) & 0xF
            entries.append(_permute_bits(sbox[row * 16 + col] << (28 - 4 * box), P, 32))
        tables.append(tuple(entries))
    return tuple(tables)


_IP0, _IP1, _IP2, _IP3, _IP4, _IP5, _IP6, _IP7 = _byte_tables(IP, 64)
_FP0, _FP1, _FP2, _FP3, _FP4, _FP5, _FP6, _FP7 = _byte_tables(FP, 64)
_E0, _E1, _E2, _E3 = _byte_tables(E, 32)
_SP0, _SP1, _SP2, _SP3, _SP4, _SP5, _SP6, _SP7 = _sp_tables()
_PC1_TABLES = _byte_tables(PC1, 64)
_PC2_TABLES = _byte_tables(PC2, 56)


def _apply(tables, value, in_bytes):
    out = 0
    shift = 8 * (in_bytes - 1)
    for table in tables:
        out |= table[(value >> shift) & 0xFF]
        shift -= 8
    return out


def key_schedule(raw_key):
    """Sixteen 48-bit round subkeys for a raw 64-bit key (parity bits are ignored by PC-1)."""
    cd = _apply(_PC1_TABLES, raw_key, 8)
    c = cd >> 28
    d = cd & 0xFFFFFFF
    subkeys = []
    for shift in KEY_SHIFTS:
        c = ((c << shift) | (c >> (28 - shift))) & 0xFFFFFFF
        d = ((d << shift) | (d >> (28 - shift))) & 0xFFFFFFF
        subkeys.append(_apply(_PC2_TABLES, (c << 28) | d, 7))
    return tuple(subkeys)


def crypt_with_schedule(block, subkeys):
    """Run the 16 Feistel rounds with ``subkeys`` in the given order (reverse them to decrypt)."""
    x = (_IP0[block >> 56] | _IP1[(block >> 48) & 0xFF] | _IP2[(block >> 40) & 0xFF]
         | _IP3[(block >> 32) & 0xFF] | _IP4[(block >> 24) & 0xFF] | _IP5[(block >> 16) & 0xFF]
         | _IP6[(block >> 8) & 0xFF] | _IP7[block & 0xFF])
    left = x >> 32
    right = x & MASK32
    for k in subkeys:
        t = (_E0[right >> 24] | _E1[(right >> 16) & 0xFF] | _E2[(right >> 8) & 0xFF]
             | _E3[right & 0xFF]) ^ k
        left, right = right, left ^ (
            _SP0[t >> 42] | _SP1[(t >> 36) & 0x3F] | _SP2[(t >> 30) & 0x3F] | _SP3[(t >> 24) & 0x3F]
            | _SP4[(t >> 18) & 0x3F] | _SP5[(t >> 12) & 0x3F] | _SP6[(t >> 6) & 0x3F] | _SP7[t & 0x3F])
    y = (right << 32) | left
    return (_FP0[y >> 56] | _FP1[(y >> 48) & 0xFF] | _FP2[(y >> 40) & 0xFF]
            | _FP3[(y >> 32) & 0xFF] | _FP4[(y >> 24) & 0xFF] | _FP5[(y >> 16) & 0xFF]
            | _FP6[(y >> 8) & 0xFF] | _FP7[y & 0xFF])


@dataclass(frozen=True)
class DesKey:
    """64-bit DES key: 56 effective bits plus 8 parity positions that are ignored."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw <= MASK64:
            raise ValueError(f"DES key must fit in 64 bits, got {self.raw:#x}")

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 8:
            raise ValueError(f"DES key must be 8 bytes, got {len(data)}")
        return cls(int.from_bytes(data, "big"))

    def to_bytes(self):
        return self.raw.to_bytes(8, "big")

    @property
    def effective(self):
        return self.raw & ~PARITY_MASK & MASK64

    @cached_property
    def subkeys(self):
        return key_schedule(self.raw)

    @cached_property
    def reversed_subkeys(self):
        return self.subkeys[::-1]


@dataclass(frozen=True)
class KeyBundle:
    """Ordered TDEA key triple (168 key bits). Equal members degrade to single DES."""

    k1: DesKey
    k2: DesKey
    k3: DesKey

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 24:
            raise ValueError(f"key bundle must be 24 bytes, got {len(data)}")
        return cls(DesKey.from_bytes(data[0:8]), DesKey.from_bytes(data[8:16]), DesKey.from_bytes(data[16:24]))

    @classmethod
    def single(cls, key):
        return cls(key, key, key)

    def to_bytes(self):
        return self.k1.to_bytes() + self.k2.to_bytes() + self.k3.to_bytes()


def _check_block(block):
    if not 0 <= block <= MASK64:
        raise ValueError(f"block must fit in 64 bits, got {block:#x}")


def des_encrypt_block(p, k):
    _check_block(p)
    return crypt_with_schedule(p, k.subkeys)


def des_decrypt_block(c, k):
    _check_block(c)
    return crypt_with_schedule(c, k.reversed_subkeys)


def tdea_encrypt_block(p, b):
    """E_k3(D_k2(E_k1(p)))"""
    _check_block(p)
    x = crypt_with_schedule(p, b.k1.subkeys)
    x = crypt_with_schedule(x, b.k2.reversed_subkeys)
    return crypt_with_schedule(x, b.k3.subkeys)


def tdea_decrypt_block(c, b):
    """D_k1(E_k2(D_k3(c)))"""
    _check_block(c)
    x = crypt_with_schedule(c, b.k3.reversed_subkeys)
    x = crypt_with_schedule(x, b.k2.subkeys)
    return crypt_with_schedule(x, b.k1.reversed_subkeys)


def pad(msg):
    k = BLOCK_SIZE - len(msg) % BLOCK_SIZE
    return msg + bytes([k]) * k


def unpad(data):
    if not data or len(data) % BLOCK_SIZE:
        raise PaddingError("padded data must be a positive multiple of the block size")
    k = data[-1]
    if not 1 <= k <= BLOCK_SIZE or data[-k:] != bytes([k]) * k:
        raise PaddingError("final block carries invalid padding")
    return data[:-k]


def cbc_seal(msg, b, iv):
    """TDEA-CBC encryption; always appends 1..8 bytes of padding."""
    _check_block(iv)
    data = pad(bytes(msg))
    out = bytearray()
    prev = iv
    for i in range(0, len(data), BLOCK_SIZE):
        prev = tdea_encrypt_block(int.from_bytes(data[i:i + BLOCK_SIZE], "big") ^ prev, b)
        out += prev.to_bytes(BLOCK_SIZE, "big")
    logger.debug(f"CBC sealed {len(msg)} bytes into {len(out)} bytes")
    return bytes(out)


def cbc_open(ct, b, iv):
    _check_block(iv)
    if not ct or len(ct) % BLOCK_SIZE:
        raise MalformedCiphertext(f"CBC ciphertext length {len(ct)} is not a positive multiple of {BLOCK_SIZE}")
    out = bytearray()
    prev = iv
    for i in range(0, len(ct), BLOCK_SIZE):
        block = int.from_bytes(ct[i:i + BLOCK_SIZE], "big")
        out += (tdea_decrypt_block(block, b) ^ prev).to_bytes(BLOCK_SIZE, "big")
        prev = block
    return unpad(bytes(out))


def cbc_mac(msg, b):
    """Length-prefixed CBC-MAC with a zero IV.

    Plain CBC-MAC lets an attacker splice two tagged messages into a third with a
    known tag when message lengths vary; binding the length into the first block
    closes that forgery.
    """
    data = len(msg).to_bytes(8, "big") + bytes(msg)
    if len(data) % BLOCK_SIZE:
        data += bytes(BLOCK_SIZE - len(data) % BLOCK_SIZE)
    state = 0
    for i in range(0, len(data), BLOCK_SIZE):
        state = tdea_encrypt_block(int.from_bytes(data[i:i + BLOCK_SIZE], "big") ^ state, b)
    return state
