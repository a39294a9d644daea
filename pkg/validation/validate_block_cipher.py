#!/usr/bin/env python3
"""
Block Cipher Validation Script

This script validates the table-driven DES in block_cipher.py against the
straight-line transcription in des_reference.py and reports the avalanche
behaviour of the optimized cipher.

Usage:
    python validation/validate_block_cipher.py [--cases N] [--seed S]

The script will:
1. Check the pinned known-answer vectors
2. Compare encryption and decryption against the reference on N random (block, key) pairs
3. Check the complementation property and TDEA with equal keys
4. Flip single plaintext and key bits and report how many ciphertext bits change
"""

import argparse
import logging
import os
import sys

import numpy as np

# Add parent directory to path so we can import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("block_cipher_validation")

from block_cipher import DesKey, KeyBundle, des_decrypt_block, des_encrypt_block, tdea_encrypt_block  # noqa: E402
from numtheory import SeededRng  # noqa: E402
import des_reference  # noqa: E402

MASK64 = (1 << 64) - 1

KNOWN_ANSWERS = [
    # (plaintext, key, ciphertext)
    (0x0123456789ABCDEF, 0x133457799BBCDFF1, 0x85E813540F0AB405),
    (0x0000000000000000, 0x0000000000000000, 0x8CA64DE9C1B123A7),
    (0x8787878787878787, 0x0E329232EA6D0D73, 0x0000000000000000),
]


def check_known_answers():
    failures = 0
    for plaintext, key, expected in KNOWN_ANSWERS:
        fast = des_encrypt_block(plaintext, DesKey(key))
        slow = des_reference.encrypt(plaintext, key)
        if fast != expected or slow != expected:
            logger.error(f"KAT failed for key {key:016X}: fast {fast:016X}, reference {slow:016X}, "
                         f"expected {expected:016X}")
            failures += 1
    logger.info(f"Known-answer vectors: {len(KNOWN_ANSWERS) - failures}/{len(KNOWN_ANSWERS)} passed")
    return failures


def compare_with_reference(cases, rng):
    failures = 0
    for _ in range(cases):
        block, key = rng.next_u64(), rng.next_u64()
        ct = des_encrypt_block(block, DesKey(key))
        if ct != des_reference.encrypt(block, key) or des_decrypt_block(ct, DesKey(key)) != block:
            logger.error(f"Mismatch for block {block:016X} key {key:016X}")
            failures += 1
    logger.info(f"Reference comparison: {cases - failures}/{cases} cases agree")
    return failures


def check_properties(cases, rng):
    failures = 0
    for _ in range(cases):
        block, key = rng.next_u64(), rng.next_u64()
        ct = des_encrypt_block(block, DesKey(key))
        if des_encrypt_block(block ^ MASK64, DesKey(key ^ MASK64)) != ct ^ MASK64:
            logger.error(f"Complementation property fails for key {key:016X}")
            failures += 1
        if tdea_encrypt_block(block, KeyBundle.single(DesKey(key))) != ct:
            logger.error(f"TDEA with equal keys differs from DES for key {key:016X}")
            failures += 1
    logger.info(f"Complementation and TDEA(k,k,k) checks: {failures} failures over {cases} cases")
    return failures


def avalanche_report(cases, rng):
    """Mean and spread of ciphertext bits flipped by a single input bit change."""
    plaintext_flips = []
    key_flips = []
    for _ in range(cases):
        block, key = rng.next_u64(), rng.next_u64()
        ct = des_encrypt_block(block, DesKey(key))
        bit = rng.randbelow(64)
        plaintext_flips.append(bin(ct ^ des_encrypt_block(block ^ (1 << bit), DesKey(key))).count("1"))
        # parity positions are ignored, so flip one of the 56 effective key bits
        key_bit = rng.randbelow(56)
        key_bit = (key_bit // 7) * 8 + (key_bit % 7) + 1
        key_flips.append(bin(ct ^ des_encrypt_block(block, DesKey(key ^ (1 << key_bit)))).count("1"))

    for label, flips in (("plaintext", plaintext_flips), ("key", key_flips)):
        values = np.array(flips, dtype=float)
        logger.info(f"Avalanche ({label} bit): mean {values.mean():.2f} of 64 bits, "
                    f"std {values.std():.2f}, min {values.min():.0f}, max {values.max():.0f}")
    return float(np.mean(plaintext_flips)), float(np.mean(key_flips))


def main():
    parser = argparse.ArgumentParser(description="Validate block_cipher.py against the reference DES")
    parser.add_argument("--cases", type=int, default=200, help="random cases per check")
    parser.add_argument("--seed", type=lambda x: int(x, 0), default=0xDE5, help="seed for the random cases")
    args = parser.parse_args()

    rng = SeededRng(args.seed)
    failures = check_known_answers()
    failures += compare_with_reference(args.cases, rng)
    failures += check_properties(args.cases, rng)
    plaintext_mean, key_mean = avalanche_report(args.cases, rng)
    if not (24 <= plaintext_mean <= 40 and 24 <= key_mean <= 40):
        logger.warning("Average avalanche is far from 32 bits")

    if failures:
        logger.error(f"Validation failed with {failures} failures")
        return 1
    logger.info("Validation complete: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
