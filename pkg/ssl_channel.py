"""
SSL-style secure channel

The handshake provides:
1. Server authentication - the client checks the server's certificate against a trusted CA
2. Encryption - a 40-bit or 128-bit session key, wrapped under the certified public key,
   keys a TDEA-CBC record layer
3. Integrity - every record carries a CBC-MAC over (seq, iv, ciphertext)

Message sequence (each message is length-prefixed fields):
    1 client -> server  ClientHello      [allowed strengths]
    2 server -> client  ServerHello      [chosen strength][certificate]
    3 client -> server  KeyExchange      [session key under the server's public key]
    4 client -> server  ClientFinished   [CBC-MAC of messages 1-3]
    5 server -> client  ServerFinished   [CBC-MAC of messages 1-4]

Session keys carry exactly their nominal entropy, so an export session can be
searched in 2**40 steps no matter how strong the derived TDEA bundles look.
Client authentication is not implemented.
"""

import logging
from dataclasses import dataclass, field

from block_cipher import BLOCK_SIZE, DesKey, KeyBundle, cbc_mac, cbc_open, cbc_seal
from config import CHANNEL_CONFIG, LOG_LEVEL
from crypto_utils.errors import (
    BadLength,
    BadPolicy,
    CertificateRejected,
    HandshakeFailed,
    MacFailure,
    MalformedCiphertext,
    MalformedMessage,
    NoCommonStrength,
    PaddingError,
    ReplayOrReorder,
)
from crypto_utils.sim_network import SimNetwork
from crypto_utils.wire_format import FieldReader, pack_field, pack_fields, pack_u64
from pki import parse_certificate, serialize_certificate, verify_certificate
from rsa_crypto import decrypt_message, encrypt_message

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

SUPPORTED_STRENGTHS = frozenset({40, 128})
JURISDICTIONS = ("export", "domestic")
MATERIAL_LENGTH = 16
_ZERO_BUNDLE = KeyBundle.single(DesKey(0))


@dataclass(frozen=True)
class StrengthPolicy:
    allowed: frozenset
    jurisdiction: str

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(self.allowed))
        if self.jurisdiction not in JURISDICTIONS:
            raise BadPolicy(f"jurisdiction must be export or domestic, got {self.jurisdiction!r}")
        if not self.allowed <= SUPPORTED_STRENGTHS:
            raise BadPolicy(f"unsupported strengths {sorted(self.allowed - SUPPORTED_STRENGTHS)}")
        # Outside the US and Canada only 40-bit session keys were permitted
        if self.jurisdiction == "export" and not self.allowed <= {40}:
            raise BadPolicy("export jurisdiction allows 40-bit session keys only")


def export_policy():
    return StrengthPolicy(frozenset(CHANNEL_CONFIG['export_strengths']), "export")


def domestic_policy():
    return StrengthPolicy(frozenset(CHANNEL_CONFIG['domestic_strengths']), "domestic")


@dataclass(frozen=True)
class ClientConfig:
    trusted_ca_public: object
    allowed: frozenset = frozenset(CHANNEL_CONFIG['client_strengths'])
    name: str = "client"


@dataclass(frozen=True)
class ServerConfig:
    cert: object
    keypair: object
    policy: StrengthPolicy


@dataclass
class SessionState:
    """Single-owner: sequence counters mutate on every record."""

    strength: int
    enc_bundle: KeyBundle
    mac_bundle: KeyBundle
    peer_name: str
    session_key: bytes = field(repr=False, default=b"")
    send_seq: int = 0
    recv_seq: int = 0


@dataclass(frozen=True)
class Record:
    seq: int
    iv: int
    ct: bytes
    mac: int

    def to_bytes(self):
        """[8-byte seq][8-byte iv][4-byte length][ct][8-byte mac]"""
        return (pack_u64(self.seq) + self.iv.to_bytes(BLOCK_SIZE, "big") + pack_field(self.ct)
                + self.mac.to_bytes(BLOCK_SIZE, "big"))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        seq = int.from_bytes(reader.read_raw(8), "big")
        iv = int.from_bytes(reader.read_raw(BLOCK_SIZE), "big")
        ct = reader.read_field()
        mac = int.from_bytes(reader.read_raw(BLOCK_SIZE), "big")
        reader.finish()
        return cls(seq=seq, iv=iv, ct=ct, mac=mac)


def keyspace_ratio(strong_bits, weak_bits):
    """How many times larger the strong session keyspace is (128 vs 40 bits: 2**88)."""
    return 2 ** (strong_bits - weak_bits)


def negotiate(client_allowed, server_policy):
    """Strongest strength both sides allow."""
    common = frozenset(client_allowed) & server_policy.allowed
    if not common:
        raise NoCommonStrength(
            f"client offers {sorted(client_allowed)}, {server_policy.jurisdiction} server allows {sorted(server_policy.allowed)}")
    return max(common)


def derive_bundles(session_key, strength):
    """Derive (enc_bundle, mac_bundle) from a session key.

    material = key zero-extended to 16 bytes; key i is the CBC-MAC of
    material || label i || key length under the all-zero bundle, labels 1-3 for
    encryption and 4-6 for the MAC. The length byte keeps a 40-bit key apart from
    a 128-bit key that happens to share its prefix.
    """
    if strength not in SUPPORTED_STRENGTHS or len(session_key) != strength // 8:
        raise BadLength(f"{strength}-bit strength needs a {strength // 8}-byte session key, got {len(session_key)}")
    material = bytes(session_key).ljust(MATERIAL_LENGTH, b"\x00")
    keys = [DesKey(cbc_mac(material + bytes([label, len(session_key)]), _ZERO_BUNDLE)) for label in range(1, 7)]
    return KeyBundle(*keys[0:3]), KeyBundle(*keys[3:6])


def _finished_mac(mac_bundle, messages):
    return cbc_mac(b"".join(pack_field(m) for m in messages), mac_bundle).to_bytes(BLOCK_SIZE, "big")


def perform_handshake(client, server, rng, network=None):
    """Run the handshake; returns mirror-image (client_state, server_state)."""
    network = network or SimNetwork()
    server_name = server.cert.subject_name
    sent = []

    # 1. ClientHello
    hello = pack_field(bytes(sorted(client.allowed)))
    sent.append(hello)
    received = network.deliver(client.name, server_name, hello, "ClientHello")
    try:
        offered = frozenset(FieldReader(received).read_field())
    except MalformedMessage as e:
        raise HandshakeFailed(f"server could not parse ClientHello: {e}") from e
    strength = negotiate(offered, server.policy)
    server_seen = [received]

    # 2. ServerHello with the certificate
    server_hello = pack_fields(bytes([strength]), serialize_certificate(server.cert))
    server_seen.append(server_hello)
    received = network.deliver(server_name, client.name, server_hello, "ServerHello")
    sent.append(received)
    try:
        reader = FieldReader(received)
        chosen = reader.read_field()
        cert = parse_certificate(reader.read_field())
        reader.finish()
    except MalformedMessage as e:
        raise HandshakeFailed(f"client could not parse ServerHello: {e}") from e
    if not verify_certificate(cert, client.trusted_ca_public):
        raise CertificateRejected(f"certificate for {cert.subject_name!r} does not verify under the trusted CA")
    if len(chosen) != 1 or chosen[0] not in client.allowed:
        raise HandshakeFailed(f"server chose a strength the client never offered: {chosen.hex()}")
    strength = chosen[0]

    # 3. Client draws the session key and wraps it for the certified key
    session_key = rng.random_bytes(strength // 8)
    key_exchange = pack_field(encrypt_message(session_key, cert.subject_public_key))
    sent.append(key_exchange)
    received = network.deliver(client.name, server_name, key_exchange, "KeyExchange")
    server_seen.append(received)
    try:
        server_key = decrypt_message(FieldReader(received).read_field(), server.keypair.private)
        server_enc, server_mac = derive_bundles(server_key, strength)
    except (MalformedMessage, MalformedCiphertext, BadLength) as e:
        raise HandshakeFailed(f"server could not recover the session key: {e}") from e
    client_enc, client_mac = derive_bundles(session_key, strength)

    # 4/5. Finished messages prove both sides hold the same keys and saw the same messages
    client_finished = pack_field(_finished_mac(client_mac, sent))
    sent.append(client_finished)
    received = network.deliver(client.name, server_name, client_finished, "ClientFinished")
    if received != pack_field(_finished_mac(server_mac, server_seen)):
        raise HandshakeFailed("client finished message does not match the server's transcript")
    server_seen.append(received)

    server_finished = pack_field(_finished_mac(server_mac, server_seen))
    received = network.deliver(server_name, client.name, server_finished, "ServerFinished")
    if received != pack_field(_finished_mac(client_mac, sent)):
        raise HandshakeFailed("server finished message does not match the client's transcript")

    logger.info(f"Handshake with {server_name!r} complete at {strength}-bit strength")
    client_state = SessionState(strength=strength, enc_bundle=client_enc, mac_bundle=client_mac,
                                peer_name=server_name, session_key=session_key)
    server_state = SessionState(strength=strength, enc_bundle=server_enc, mac_bundle=server_mac,
                                peer_name=client.name, session_key=server_key)
    return client_state, server_state


def _record_mac(state, seq, iv, ct):
    return cbc_mac(pack_u64(seq) + iv.to_bytes(BLOCK_SIZE, "big") + ct, state.mac_bundle)


def seal_record(s, msg, rng):
    iv = rng.next_u64()
    ct = cbc_seal(bytes(msg), s.enc_bundle, iv)
    record = Record(seq=s.send_seq, iv=iv, ct=ct, mac=_record_mac(s, s.send_seq, iv, ct))
    s.send_seq += 1
    return record


def open_record(s, r):
    """Check the MAC, then require the exact next sequence number."""
    if not 0 <= r.seq < 1 << 64 or _record_mac(s, r.seq, r.iv, r.ct) != r.mac:
        raise MacFailure(f"record {r.seq} failed its integrity check")
    if r.seq != s.recv_seq:
        raise ReplayOrReorder(f"expected record {s.recv_seq}, got {r.seq}")
    try:
        plaintext = cbc_open(r.ct, s.enc_bundle, r.iv)
    except (PaddingError, MalformedCiphertext) as e:
        raise MacFailure(f"record {r.seq} decrypted to invalid padding: {e}") from e
    s.recv_seq += 1
    return plaintext
