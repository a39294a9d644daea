"""
Test module for SET digital envelopes.
"""

import sys
import os
import unittest
from dataclasses import replace

# Add parent directory to path to import envelope
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from crypto_utils.errors import (
    EnvelopeError,
    MalformedEnvelope,
    PaddingError,
    SetForgeError,
    SignatureInvalid,
    WrongRecipient,
)
from envelope import open_envelope, parse_envelope, seal_envelope, serialize_envelope
from numtheory import SeededRng
from pki import create_certification_authority, issue_certificate
from rsa_crypto import decrypt_message, generate_keypair


class TestEnvelope(unittest.TestCase):
    """Test cases for seal_envelope / open_envelope."""

    @classmethod
    def setUpClass(cls):
        rng = SeededRng(0xE7E)
        cls.ca = create_certification_authority("Envelope CA", rng, bits=384)
        cls.alice = generate_keypair(384, rng=rng)
        cls.bob = generate_keypair(384, rng=rng)
        cls.carol = generate_keypair(384, rng=rng)
        cls.alice_cert = issue_certificate(cls.ca, "Alice", cls.alice.public)
        cls.bob_cert = issue_certificate(cls.ca, "Bob", cls.bob.public)
        cls.carol_cert = issue_certificate(cls.ca, "Carol", cls.carol.public)

    def setUp(self):
        """Set up test fixtures."""
        self.rng = SeededRng(0x5EA1)
        self.message = b"ORDER: 2 books; MARKER-7f3a; total 4999 cents"

    def seal(self, message=None):
        return seal_envelope(message if message is not None else self.message, "Alice",
                             self.alice.private, self.bob_cert, self.rng)

    def test_roundtrip(self):
        env = self.seal()
        self.assertEqual(open_envelope(env, self.bob.private, self.alice_cert), self.message)

    def test_empty_and_long_messages(self):
        for message in (b"", bytes(range(256)) * 4):
            env = self.seal(message)
            self.assertEqual(open_envelope(env, self.bob.private, self.alice_cert), message)

    def test_body_hides_plaintext(self):
        data = serialize_envelope(self.seal())
        self.assertNotIn(b"MARKER-7f3a", data)

    def test_fresh_key_per_envelope(self):
        first, second = self.seal(), self.seal()
        self.assertNotEqual(first.wrapped_key, second.wrapped_key)
        self.assertNotEqual(first.body, second.body)

    def test_wrong_recipient(self):
        with self.assertRaises(WrongRecipient):
            open_envelope(self.seal(), self.carol.private, self.alice_cert)

    def test_wrong_sender_certificate(self):
        with self.assertRaises(SignatureInvalid):
            open_envelope(self.seal(), self.bob.private, self.carol_cert)

    def test_forged_sender_name(self):
        env = seal_envelope(self.message, "Alice", self.carol.private, self.bob_cert, self.rng)
        with self.assertRaises(SignatureInvalid):
            open_envelope(env, self.bob.private, self.alice_cert)

    def test_tampered_body_rejected(self):
        env = self.seal()
        for position in (0, len(env.body) // 2, len(env.body) - 1):
            body = bytearray(env.body)
            body[position] ^= 0x01
            with self.assertRaises((PaddingError, SignatureInvalid)):
                open_envelope(replace(env, body=bytes(body)), self.bob.private, self.alice_cert)

    def test_every_length_roundtrips(self):
        for length in range(0, 1001):
            message = self.rng.random_bytes(length)
            env = self.seal(message)
            self.assertEqual(open_envelope(env, self.bob.private, self.alice_cert), message, length)

    def test_same_seed_same_envelope(self):
        first = seal_envelope(self.message, "Alice", self.alice.private, self.bob_cert, SeededRng(7))
        second = seal_envelope(self.message, "Alice", self.alice.private, self.bob_cert, SeededRng(7))
        other = seal_envelope(self.message, "Alice", self.alice.private, self.bob_cert, SeededRng(8))
        self.assertEqual(serialize_envelope(first), serialize_envelope(second))
        self.assertNotEqual(serialize_envelope(first), serialize_envelope(other))

    def test_secrets_absent_from_wire(self):
        for _ in range(100):
            env = self.seal()
            data = serialize_envelope(env)
            key_block = decrypt_message(env.wrapped_key, self.bob.private)
            self.assertTrue(key_block.startswith(b"SK"))
            self.assertNotIn(b"MARKER-7f3a", data)
            self.assertNotIn(key_block, data)
            self.assertNotIn(key_block[2:26], data)

    def test_wrong_recipient_repeated(self):
        for _ in range(100):
            with self.assertRaises(WrongRecipient):
                open_envelope(self.seal(), self.carol.private, self.alice_cert)

    def test_random_body_tampering(self):
        for _ in range(100):
            env = self.seal()
            bit = self.rng.randbelow(len(env.body) * 8)
            body = bytearray(env.body)
            body[bit // 8] ^= 0x80 >> (bit % 8)
            with self.assertRaises((PaddingError, SignatureInvalid), msg=f"bit {bit}"):
                open_envelope(replace(env, body=bytes(body)), self.bob.private, self.alice_cert)

    def test_tampered_iv_rejected(self):
        env = self.seal()
        with self.assertRaises(WrongRecipient):
            open_envelope(replace(env, iv=env.iv ^ 1), self.bob.private, self.alice_cert)

    def test_every_serialized_bit_flip_is_rejected(self):
        data = serialize_envelope(self.seal(b"short"))
        for bit in range(0, len(data) * 8, 7):
            flipped = bytearray(data)
            flipped[bit // 8] ^= 0x80 >> (bit % 8)
            with self.assertRaises(SetForgeError):
                open_envelope(parse_envelope(bytes(flipped)), self.bob.private, self.alice_cert)

    def test_serialization(self):
        env = self.seal()
        data = serialize_envelope(env)
        self.assertTrue(data.startswith(b"ENV1"))
        self.assertEqual(parse_envelope(data), env)

    def test_malformed_serialization(self):
        data = serialize_envelope(self.seal())
        for bad in (b"", b"ENV2" + data[4:], data[:-3], data + b"\x00"):
            with self.assertRaises(MalformedEnvelope):
                parse_envelope(bad)
        self.assertTrue(issubclass(MalformedEnvelope, EnvelopeError))


if __name__ == '__main__':
    unittest.main()
