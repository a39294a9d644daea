"""
Number theory primitives for the RSA cryptosystem.

This module provides:
1. A seeded SplitMix64 generator so every key, witness and session key is reproducible
2. Modular exponentiation and modular inversion (extended Euclid)
3. Miller-Rabin probable-prime testing and random prime generation

Python's ``int`` plays the role of the arbitrary-precision unsigned integer.
All byte <-> integer conversions are big-endian.
"""

import logging

from config import LOG_LEVEL, PRIME_CONFIG
from crypto_utils.errors import NotInvertible, ZeroModulus

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

MASK64 = (1 << 64) - 1


class SeededRng:
    """SplitMix64 stream. Identical seeds give bit-identical output on every platform.

    Single owner: never share an instance between threads.
    """

    GOLDEN_GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + self.GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbits(self, k):
        """Return a uniform integer with ``k`` random bits (high words first)."""
        if k <= 0:
            return 0
        value = 0
        produced = 0
        while produced < k:
            value = (value << 64) | self.next_u64()
            produced += 64
        return value >> (produced - k)

    def randbelow(self, bound):
        """Uniform integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        k = bound.bit_length()
        while True:
            candidate = self.randbits(k)
            if candidate < bound:
                return candidate

    def randrange(self, low, high):
        """Uniform integer in [low, high)."""
        if high <= low:
            raise ValueError(f"empty range [{low}, {high})")
        return low + self.randbelow(high - low)

    def random_bytes(self, count):
        out = bytearray()
        while len(out) < count:
            out += self.next_u64().to_bytes(8, "big")
        return bytes(out[:count])


def int_to_bytes(value, length=None):
    """Big-endian encoding; minimal length (zero encodes as one 0x00 byte) unless ``length`` is given."""
    if value < 0:
        raise ValueError("unsigned values only")
    if length is None:
        length = max(1, (value.bit_length() + 7) // 8)
    return value.to_bytes(length, "big")


def bytes_to_int(data):
    return int.from_bytes(data, "big")


def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def mod_pow(base, exponent, modulus):
    """Return base**exponent mod modulus (square-and-multiply via the builtin three-argument pow)."""
    if modulus == 0:
        raise ZeroModulus("modulus must be at least 1")
    if base < 0 or exponent < 0 or modulus < 0:
        raise ValueError("unsigned operands only")
    return pow(base, exponent, modulus)


def mod_inverse(a, m):
    """Return x in [1, m) with a*x = 1 (mod m) using the extended Euclidean algorithm."""
    if m == 0:
        raise ZeroModulus("modulus must be at least 2")
    if m == 1:
        raise NotInvertible("nothing is invertible modulo 1")
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise NotInvertible(f"gcd({a}, {m}) = {old_r}")
    return old_s % m


def is_probable_prime(n, rounds, rng):
    """Miller-Rabin test with witnesses drawn uniformly from [2, n-2].

    A composite survives with probability at most 4**(-rounds).
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False

    # n - 1 = 2**r * d with d odd
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1

    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_prime(bits, rng, rounds=None):
    """Random ``bits``-bit probable prime: odd candidate with the top bit forced, retried until it passes."""
    if bits < 4:
        raise ValueError("bits must be at least 4")
    rounds = rounds or PRIME_CONFIG['miller_rabin_rounds']
    attempts = 0
    while True:
        attempts += 1
        candidate = rng.randbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(candidate, rounds, rng):
            logger.debug(f"Found {bits}-bit prime after {attempts} candidates")
            return candidate
