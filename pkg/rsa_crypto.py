"""
Textbook RSA

This module provides:
1. Key generation from two random primes (and deterministic fixtures from given primes)
2. The encryption path (public key encrypts, private key decrypts)
3. The authentication path (private key signs, public key recovers the message)
4. A block scheme that extends both paths to byte strings of any length
5. The combined sign-then-encrypt scenario with its non-repudiation check

No padding scheme is applied. Textbook RSA is multiplicative,
E(a)*E(b) = E(a*b) mod n, which is why deployed systems pad; the toolkit keeps
the weakness visible instead of hiding it.
"""

import logging
import math
from dataclasses import dataclass

from config import LOG_LEVEL, PRIME_CONFIG, RSA_CONFIG
from crypto_utils.errors import (
    AuthenticationFailed,
    BadParameters,
    MalformedCiphertext,
    MessageTooLarge,
    NotInvertible,
)
from numtheory import SeededRng, gcd, gen_prime, is_probable_prime, mod_inverse, mod_pow

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

# A block carries [1-byte length][payload][zero fill], so the length byte caps the payload.
MAX_BLOCK_PAYLOAD = 255


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int

    def __post_init__(self):
        if not 1 < self.e < self.n or self.e % 2 == 0:
            raise BadParameters("public exponent must be odd with 1 < e < n")

    @property
    def byte_length(self):
        return (self.n.bit_length() + 7) // 8


@dataclass(frozen=True)
class RsaPrivateKey:
    n: int
    d: int
    p: int
    q: int

    def __post_init__(self):
        if self.p * self.q != self.n or self.p == self.q:
            raise BadParameters("private key requires n = p*q with p != q")
        # d inverts an odd e modulo an even phi, so it is odd too
        if self.d % 2 == 0:
            raise BadParameters(f"private exponent must be odd, got {self.d}")

    @property
    def byte_length(self):
        return (self.n.bit_length() + 7) // 8


@dataclass(frozen=True)
class RsaKeyPair:
    public: RsaPublicKey
    private: RsaPrivateKey


def key_bits_for_digits(digits):
    """Modulus size in bits for a decimal-digit length, e.g. 154 digits -> 512 bits."""
    if digits < 1:
        raise BadParameters("digit count must be positive")
    bits = math.ceil(digits * math.log2(10))
    return bits + (bits % 2)


def _build_keypair(p, q, e):
    phi = (p - 1) * (q - 1)
    d = mod_inverse(e, phi)
    n = p * q
    return RsaKeyPair(public=RsaPublicKey(n=n, e=e), private=RsaPrivateKey(n=n, d=d, p=p, q=q))


def generate_keypair(bits=None, e=None, rng=None):
    """Generate a keypair whose modulus has ``bits`` or ``bits - 1`` bits."""
    bits = bits or RSA_CONFIG['default_bits']
    e = e or RSA_CONFIG['public_exponent']
    if rng is None:
        raise BadParameters("generate_keypair needs a SeededRng")
    if bits < RSA_CONFIG['min_bits'] or bits > RSA_CONFIG['max_bits'] or bits % 2:
        raise BadParameters(f"key size must be even and within "
                            f"[{RSA_CONFIG['min_bits']}, {RSA_CONFIG['max_bits']}], got {bits}")
    if e < 3 or e % 2 == 0:
        raise BadParameters(f"public exponent must be odd and at least 3, got {e}")

    half = bits // 2
    attempts = 0
    while True:
        attempts += 1
        p = gen_prime(half, rng)
        q = gen_prime(half, rng)
        if p == q:
            continue
        if gcd(e, (p - 1) * (q - 1)) != 1:
            continue
        if p * q <= e:
            continue
        keypair = _build_keypair(p, q, e)
        logger.info(f"Generated {keypair.public.n.bit_length()}-bit RSA keypair (e={e}) after {attempts} prime pair(s)")
        return keypair


def keypair_from_primes(p, q, e):
    """Deterministic keypair from caller-chosen primes; every precondition failure is BadParameters."""
    if p == q:
        raise BadParameters("p and q must differ")
    checker = SeededRng(p ^ (q << 1))
    rounds = PRIME_CONFIG['keypair_check_rounds']
    if not (is_probable_prime(p, rounds, checker) and is_probable_prime(q, rounds, checker)):
        raise BadParameters("p and q must both be prime")
    if e < 3 or e % 2 == 0 or e >= p * q:
        raise BadParameters(f"public exponent {e} must be odd with 3 <= e < n")
    try:
        return _build_keypair(p, q, e)
    except NotInvertible as err:
        raise BadParameters(f"e={e} shares a factor with (p-1)(q-1)") from err


def public_from_private(key):
    """Recover the paired public key (e = d^-1 mod (p-1)(q-1))."""
    e = mod_inverse(key.d, (key.p - 1) * (key.q - 1))
    return RsaPublicKey(n=key.n, e=e)


def _check_residue(value, n):
    if value < 0 or value >= n:
        raise MessageTooLarge(f"residue must lie in [0, n); n has {n.bit_length()} bits")


def encrypt_residue(m, key):
    """Encryption path: m^e mod n."""
    _check_residue(m, key.n)
    return mod_pow(m, key.e, key.n)


def decrypt_residue(c, key):
    _check_residue(c, key.n)
    return mod_pow(c, key.d, key.n)


def sign_residue(m, key):
    """Authentication path: m^d mod n."""
    _check_residue(m, key.n)
    return mod_pow(m, key.d, key.n)


def verify_residue(s, key):
    """Return s^e mod n; the signature is genuine when this recovers the signed message."""
    _check_residue(s, key.n)
    return mod_pow(s, key.e, key.n)


def block_capacity(n):
    """Payload bytes per block for modulus ``n``."""
    k = (n.bit_length() + 7) // 8
    capacity = min(k - 2, MAX_BLOCK_PAYLOAD)
    if capacity < 1:
        raise BadParameters(f"a {n.bit_length()}-bit modulus is too small for the block scheme")
    return capacity


def _blockwise_transform(data, n, exponent):
    """Split ``data`` into [length][payload][zero fill] blocks and exponentiate each one."""
    k = (n.bit_length() + 7) // 8
    capacity = block_capacity(n)
    out = bytearray()
    for start in range(0, len(data), capacity):
        chunk = data[start:start + capacity]
        encoded = bytes([len(chunk)]) + chunk + bytes(capacity - len(chunk))
        # k - 1 bytes always encode a value below n
        residue = int.from_bytes(encoded.ljust(k - 1, b"\x00"), "big")
        out += mod_pow(residue, exponent, n).to_bytes(k, "big")
    return bytes(out)


def _blockwise_recover(data, n, exponent):
    """Invert _blockwise_transform, rejecting anything that is not a well-formed block sequence."""
    k = (n.bit_length() + 7) // 8
    capacity = block_capacity(n)
    if len(data) % k:
        raise MalformedCiphertext(f"ciphertext length {len(data)} is not a multiple of the {k}-byte block")
    out = bytearray()
    count = len(data) // k
    for index in range(count):
        value = int.from_bytes(data[index * k:(index + 1) * k], "big")
        if value >= n:
            raise MalformedCiphertext(f"block {index} is not a residue mod n")
        residue = mod_pow(value, exponent, n)
        if residue >> (8 * (k - 1)):
            raise MalformedCiphertext(f"block {index} decodes outside the block domain")
        encoded = residue.to_bytes(k - 1, "big")
        length = encoded[0]
        last = index == count - 1
        if length > capacity or length == 0 or (not last and length != capacity):
            raise MalformedCiphertext(f"block {index} carries invalid length byte {length}")
        if any(encoded[1 + length:]):
            raise MalformedCiphertext(f"block {index} has non-zero fill")
        out += encoded[1:1 + length]
    return bytes(out)


def encrypt_message(data, key):
    return _blockwise_transform(bytes(data), key.n, key.e)


def decrypt_message(data, key):
    return _blockwise_recover(bytes(data), key.n, key.d)


def sign_message(data, key):
    """Blockwise authentication path with message recovery (no digest)."""
    return _blockwise_transform(bytes(data), key.n, key.d)


def recover_message(signed, key):
    """Strip a blockwise signature with the signer's public key; MalformedCiphertext if it does not verify."""
    return _blockwise_recover(bytes(signed), key.n, key.e)


def sign_then_encrypt(msg, sender, recipient):
    """Encrypt for the recipient's public key, then sign the ciphertext bytes with the sender's private key."""
    inner = encrypt_message(msg, recipient)
    return sign_message(inner, sender)


def decrypt_then_verify(blob, recipient, sender):
    """Strip the sender's signature first, then decrypt with the recipient's private key."""
    try:
        inner = recover_message(blob, sender)
    except MalformedCiphertext as err:
        raise AuthenticationFailed(f"outer signature layer does not verify: {err}") from err
    try:
        return decrypt_message(inner, recipient)
    except MalformedCiphertext as err:
        raise AuthenticationFailed(f"inner blocks malformed after stripping the signature: {err}") from err
