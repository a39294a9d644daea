"""
Toy certification authority

A certificate binds a subject name to an RSA public key and carries the
issuing CA's blockwise signature over the canonical certificate bytes. There
is a single level of trust: one CA signs subjects directly, with no chains,
expiry, serials or revocation.
"""

import logging
import struct
from dataclasses import dataclass

from config import LOG_LEVEL, RSA_CONFIG
from crypto_utils.errors import (
    BadParameters,
    CertificateFormatError,
    EmptyField,
    FieldTooLong,
    MalformedCiphertext,
    MalformedMessage,
)
from crypto_utils.wire_format import FieldReader, pack_field
from numtheory import bytes_to_int, int_to_bytes
from rsa_crypto import RsaKeyPair, RsaPublicKey, generate_keypair, recover_message, sign_message

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

CERT_MAGIC = b"SFC1"
MAX_NAME_BYTES = 255


@dataclass(frozen=True)
class Certificate:
    subject_name: str
    subject_public_key: RsaPublicKey
    issuer_name: str
    signature: bytes


@dataclass(frozen=True)
class CertificationAuthority:
    name: str
    keypair: RsaKeyPair

    def __post_init__(self):
        if not self.name:
            raise EmptyField("CA name must not be empty")

    @property
    def public(self):
        return self.keypair.public


def create_certification_authority(name, rng, bits=None):
    ca = CertificationAuthority(name=name, keypair=generate_keypair(bits or RSA_CONFIG['default_bits'], rng=rng))
    logger.info(f"Created certification authority {name!r}")
    return ca


def _encode_name(label, name):
    raw = name.encode("utf-8")
    if not raw:
        raise EmptyField(f"{label} must not be empty")
    if len(raw) > MAX_NAME_BYTES:
        raise FieldTooLong(f"{label} is {len(raw)} bytes; the limit is {MAX_NAME_BYTES}")
    return raw


def canonical_cert_bytes(subject_name, subject_public_key, issuer_name):
    """[len][subject][len][issuer][len][n][len][e], every length 4-byte big-endian."""
    subject = _encode_name("subject name", subject_name)
    issuer = _encode_name("issuer name", issuer_name)
    return (pack_field(subject) + pack_field(issuer)
            + pack_field(int_to_bytes(subject_public_key.n)) + pack_field(int_to_bytes(subject_public_key.e)))


def issue_certificate(ca, subject_name, subject_public_key):
    body = canonical_cert_bytes(subject_name, subject_public_key, ca.name)
    signature = sign_message(body, ca.keypair.private)
    logger.info(f"{ca.name!r} issued certificate for {subject_name!r}")
    return Certificate(subject_name=subject_name, subject_public_key=subject_public_key,
                       issuer_name=ca.name, signature=signature)


def verify_certificate(cert, issuer_public):
    """True iff the signature recovers exactly the canonical bytes. Never raises."""
    try:
        expected = canonical_cert_bytes(cert.subject_name, cert.subject_public_key, cert.issuer_name)
        recovered = recover_message(cert.signature, issuer_public)
    except (MalformedCiphertext, EmptyField, FieldTooLong, BadParameters) as e:
        logger.debug(f"Certificate for {cert.subject_name!r} rejected: {e}")
        return False
    return recovered == expected


def serialize_certificate(cert):
    """SFC1 file: magic, canonical bytes, then [4-byte length][signature]."""
    body = canonical_cert_bytes(cert.subject_name, cert.subject_public_key, cert.issuer_name)
    return CERT_MAGIC + body + pack_field(cert.signature)


def parse_certificate(data):
    reader = FieldReader(data)
    try:
        reader.expect_magic(CERT_MAGIC)
        subject = reader.read_text()
        issuer = reader.read_text()
        n = bytes_to_int(reader.read_field())
        e = bytes_to_int(reader.read_field())
        signature = reader.read_field()
        reader.finish()
        key = RsaPublicKey(n=n, e=e)
    except (MalformedMessage, BadParameters, struct.error) as err:
        raise CertificateFormatError(f"not a valid certificate file: {err}") from err
    return Certificate(subject_name=subject, subject_public_key=key, issuer_name=issuer, signature=signature)
