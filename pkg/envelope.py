"""
SET digital envelope

Cardholder side (seal):
1. Sign the message with the sender's private key (blockwise, message recovery)
2. Encrypt the signed payload with a fresh TDEA key bundle in CBC mode
3. Wrap the bundle for the recipient's public key, creating the envelope

Merchant side (open):
1. Unwrap the key block with the recipient's private key (only the intended recipient can)
2. Decrypt the body with the recovered bundle
3. Check the sender's signature with the public key from the sender's certificate

The bulk data only ever sees symmetric work for confidentiality; RSA is spent on
the key block and on the signature.
"""

import logging
from dataclasses import dataclass

from block_cipher import BLOCK_SIZE, KeyBundle, cbc_open, cbc_seal
from config import LOG_LEVEL
from crypto_utils.errors import (
    MalformedCiphertext,
    MalformedEnvelope,
    MalformedMessage,
    SignatureInvalid,
    WrongRecipient,
)
from crypto_utils.wire_format import FieldReader, pack_field
from rsa_crypto import decrypt_message, encrypt_message, recover_message, sign_message

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

ENVELOPE_MAGIC = b"ENV1"
KEY_BLOCK_MAGIC = b"SK"
# "SK" + 24 bundle bytes + 8 IV-check bytes
KEY_BLOCK_LENGTH = len(KEY_BLOCK_MAGIC) + 24 + BLOCK_SIZE


@dataclass(frozen=True)
class Envelope:
    sender_name: str
    wrapped_key: bytes
    iv: int
    body: bytes


def seal_envelope(msg, sender_name, sender_key, recipient_cert, rng):
    """Sign ``msg`` with ``sender_key`` and seal it for the subject of ``recipient_cert``.

    The caller is expected to have verified ``recipient_cert`` already.
    """
    payload = sign_message(bytes(msg), sender_key)
    bundle = KeyBundle.from_bytes(rng.random_bytes(24))
    iv = rng.next_u64()
    body = cbc_seal(payload, bundle, iv)
    key_block = KEY_BLOCK_MAGIC + bundle.to_bytes() + iv.to_bytes(BLOCK_SIZE, "big")
    wrapped_key = encrypt_message(key_block, recipient_cert.subject_public_key)
    logger.debug(f"Sealed {len(msg)} bytes from {sender_name!r} to {recipient_cert.subject_name!r}")
    return Envelope(sender_name=sender_name, wrapped_key=wrapped_key, iv=iv, body=body)


def open_envelope(env, recipient_priv, sender_cert):
    """Unwrap, decrypt and verify an envelope; returns the sender's original message."""
    try:
        key_block = decrypt_message(env.wrapped_key, recipient_priv)
    except MalformedCiphertext as e:
        raise WrongRecipient(f"key block does not open under this private key: {e}") from e
    if (len(key_block) != KEY_BLOCK_LENGTH or not key_block.startswith(KEY_BLOCK_MAGIC)
            or key_block[-BLOCK_SIZE:] != env.iv.to_bytes(BLOCK_SIZE, "big")):
        raise WrongRecipient("key block magic or IV check failed")

    bundle = KeyBundle.from_bytes(key_block[len(KEY_BLOCK_MAGIC):len(KEY_BLOCK_MAGIC) + 24])
    # PaddingError / MalformedCiphertext propagate from the CBC layer
    payload = cbc_open(env.body, bundle, env.iv)

    if env.sender_name != sender_cert.subject_name:
        raise SignatureInvalid(
            f"envelope names sender {env.sender_name!r} but the certificate is for {sender_cert.subject_name!r}")
    try:
        return recover_message(payload, sender_cert.subject_public_key)
    except MalformedCiphertext as e:
        raise SignatureInvalid(f"payload does not verify under {sender_cert.subject_name!r}: {e}") from e


def serialize_envelope(env):
    """ENV1, then [len]sender_name, [len]wrapped_key, iv (8 bytes, no prefix), [len]body."""
    return (ENVELOPE_MAGIC + pack_field(env.sender_name.encode("utf-8")) + pack_field(env.wrapped_key)
            + env.iv.to_bytes(BLOCK_SIZE, "big") + pack_field(env.body))


def parse_envelope(data):
    reader = FieldReader(data)
    try:
        reader.expect_magic(ENVELOPE_MAGIC)
        sender_name = reader.read_text()
        wrapped_key = reader.read_field()
        iv = int.from_bytes(reader.read_raw(BLOCK_SIZE), "big")
        body = reader.read_field()
        reader.finish()
    except MalformedMessage as e:
        raise MalformedEnvelope(f"not a valid envelope: {e}") from e
    if not body or len(body) % BLOCK_SIZE:
        raise MalformedEnvelope(f"envelope body length {len(body)} is not a positive multiple of {BLOCK_SIZE}")
    return Envelope(sender_name=sender_name, wrapped_key=wrapped_key, iv=iv, body=body)
