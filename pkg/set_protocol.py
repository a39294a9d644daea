"""
SET three-party purchase: cardholder, merchant and payment gateway.

The cardholder seals the order for the merchant and the card details for the
gateway, so the merchant can only open the order information and passes the
card details on unopened for verification. Every later hop is also an
envelope, so no wire message can be altered without detection:

    1 cardholder -> merchant    PurchaseRequest  (order envelope + payment envelope)
    2 merchant   -> gateway     AuthRequest      (sealed by the merchant)
    3 gateway    -> merchant    AuthResponse     (sealed by the gateway)
    4 merchant   -> cardholder  PurchaseResponse (sealed by the merchant)

Amount consistency stands in for SET's dual signature: the amount and order id
travel inside both envelopes and the gateway compares them with the merchant's
claim.
"""

import logging
from dataclasses import dataclass, field

from block_cipher import KeyBundle, cbc_mac
from config import LOG_LEVEL, RSA_CONFIG, SET_CONFIG
from crypto_utils.card_utils import CARD_PATTERN, luhn_valid, mask_card_number, parse_expiry
from crypto_utils.errors import (
    AmountDisagreement,
    AmountMismatch,
    CardExpired,
    CardUnknown,
    CertificateRejected,
    DuplicateAuthorization,
    DuplicateName,
    DuplicateOrder,
    InsufficientFunds,
    InvalidOrder,
    MalformedCard,
    OrderIdMismatch,
    SetForgeError,
    SignatureInvalid,
    UnexpectedResponse,
)
from crypto_utils.sim_network import SimNetwork
from crypto_utils.wire_format import FieldReader, pack_fields, pack_u64
from envelope import open_envelope, parse_envelope, seal_envelope, serialize_envelope
from pki import issue_certificate, verify_certificate
from rsa_crypto import generate_keypair

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

ROLES = ("cardholder", "merchant", "gateway")
MESSAGE_LABELS = ("PurchaseRequest", "AuthRequest", "AuthResponse", "PurchaseResponse")


@dataclass(frozen=True)
class Participant:
    role: str
    name: str
    keypair: object
    cert: object


@dataclass(frozen=True)
class OrderInfo:
    order_id: str
    description: str
    amount: int

    def __post_init__(self):
        if not self.order_id:
            raise InvalidOrder("order_id must not be empty")
        if self.amount < 0:
            raise InvalidOrder(f"amount must be non-negative, got {self.amount}")

    def to_bytes(self):
        return pack_fields(self.order_id.encode("utf-8"), self.description.encode("utf-8"), pack_u64(self.amount))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        order_id = reader.read_text()
        description = reader.read_text()
        amount = reader.read_u64_field()
        reader.finish()
        return cls(order_id=order_id, description=description, amount=amount)


@dataclass(frozen=True)
class PaymentInfo:
    """Card details for the gateway. The Luhn checksum is verified by the gateway, not here."""

    card_number: str
    expiry: str
    amount: int
    order_id: str

    def __post_init__(self):
        if not CARD_PATTERN.fullmatch(self.card_number):
            raise MalformedCard("card number must be 12-19 digits")
        if self.amount < 0:
            raise InvalidOrder(f"amount must be non-negative, got {self.amount}")

    def to_bytes(self):
        return pack_fields(self.card_number.encode("ascii"), self.expiry.encode("ascii"),
                           pack_u64(self.amount), self.order_id.encode("utf-8"))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        card_number = reader.read_text()
        expiry = reader.read_text()
        amount = reader.read_u64_field()
        order_id = reader.read_text()
        reader.finish()
        return cls(card_number=card_number, expiry=expiry, amount=amount, order_id=order_id)


@dataclass(frozen=True)
class PurchaseRequest:
    order_env: object
    payment_env: object

    def to_bytes(self):
        return pack_fields(serialize_envelope(self.order_env), serialize_envelope(self.payment_env))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        order_env = parse_envelope(reader.read_field())
        payment_env = parse_envelope(reader.read_field())
        reader.finish()
        return cls(order_env=order_env, payment_env=payment_env)


@dataclass(frozen=True)
class AuthRequest:
    merchant_name: str
    order_id: str
    amount: int
    payment_env: object

    def to_bytes(self):
        return pack_fields(self.merchant_name.encode("utf-8"), self.order_id.encode("utf-8"),
                           pack_u64(self.amount), serialize_envelope(self.payment_env))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        merchant_name = reader.read_text()
        order_id = reader.read_text()
        amount = reader.read_u64_field()
        payment_env = parse_envelope(reader.read_field())
        reader.finish()
        return cls(merchant_name=merchant_name, order_id=order_id, amount=amount, payment_env=payment_env)


@dataclass(frozen=True)
class AuthResponse:
    """Gateway approval, forwarded by the merchant to the cardholder. auth_code is a 64-bit CBC-MAC."""

    order_id: str
    approved: bool
    amount: int
    auth_code: int

    def to_bytes(self):
        return pack_fields(self.order_id.encode("utf-8"), bytes([1 if self.approved else 0]),
                           pack_u64(self.amount), pack_u64(self.auth_code))

    @classmethod
    def from_bytes(cls, data):
        reader = FieldReader(data)
        order_id = reader.read_text()
        flag = reader.read_field()
        amount = reader.read_u64_field()
        auth_code = reader.read_u64_field()
        reader.finish()
        if flag not in (b"\x00", b"\x01"):
            raise UnexpectedResponse(f"approval flag must be 0 or 1, got {flag.hex()}")
        return cls(order_id=order_id, approved=flag == b"\x01", amount=amount, auth_code=auth_code)


@dataclass
class Merchant:
    participant: Participant
    pending_orders: dict = field(default_factory=dict)
    completed_orders: dict = field(default_factory=dict)
    # everything the merchant has decrypted, kept to audit that card data never shows up
    opened_plaintexts: list = field(default_factory=list)

    @property
    def name(self):
        return self.participant.name


@dataclass
class PaymentGateway:
    participant: Participant
    mac_bundle: KeyBundle
    authorized: dict = field(default_factory=dict)
    voided: set = field(default_factory=set)

    @classmethod
    def create(cls, participant, rng):
        return cls(participant=participant, mac_bundle=KeyBundle.from_bytes(rng.random_bytes(24)))

    @property
    def name(self):
        return self.participant.name


@dataclass
class Outcome:
    approved: bool
    error: str = None
    failed_step: int = None
    auth_code: int = None
    replay_error: str = None
    transcript: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def initialize_participants(ca, names, rng, bits=None):
    """Cardholder, merchant and gateway, each with a fresh keypair and a CA-issued certificate."""
    names = tuple(names)
    if len(names) != len(ROLES):
        raise ValueError(f"expected {len(ROLES)} names, got {len(names)}")
    if len(set(names)) != len(names):
        raise DuplicateName(f"participant names must be distinct: {names}")
    bits = bits or RSA_CONFIG['default_bits']
    participants = []
    for role, name in zip(ROLES, names):
        keypair = generate_keypair(bits, rng=rng)
        cert = issue_certificate(ca, name, keypair.public)
        participants.append(Participant(role=role, name=name, keypair=keypair, cert=cert))
        logger.info(f"Initialized {role} {name!r}")
    return tuple(participants)


def create_purchase_request(cardholder, order, payment, merchant_cert, gateway_cert, rng):
    """Seal the order for the merchant and the payment details for the gateway."""
    if payment.amount != order.amount:
        raise AmountMismatch(f"payment amount {payment.amount} != order amount {order.amount}")
    if payment.order_id != order.order_id:
        raise OrderIdMismatch(f"payment order {payment.order_id!r} != order {order.order_id!r}")
    private = cardholder.keypair.private
    order_env = seal_envelope(order.to_bytes(), cardholder.name, private, merchant_cert, rng)
    payment_env = seal_envelope(payment.to_bytes(), cardholder.name, private, gateway_cert, rng)
    logger.info(f"{cardholder.name!r} created purchase request for order {order.order_id!r}")
    return PurchaseRequest(order_env=order_env, payment_env=payment_env)


def merchant_process(merchant, req, cardholder_cert):
    """Open the order, record it as pending and forward the payment envelope unopened."""
    plaintext = open_envelope(req.order_env, merchant.participant.keypair.private, cardholder_cert)
    merchant.opened_plaintexts.append(plaintext)
    order = OrderInfo.from_bytes(plaintext)
    if req.payment_env.sender_name != req.order_env.sender_name:
        raise SignatureInvalid("order and payment envelopes name different senders")
    if order.order_id in merchant.pending_orders or order.order_id in merchant.completed_orders:
        raise DuplicateOrder(f"order {order.order_id!r} was already received")
    merchant.pending_orders[order.order_id] = order
    logger.info(f"{merchant.name!r} accepted order {order.order_id!r} for {order.amount} cents")
    return order, AuthRequest(merchant_name=merchant.name, order_id=order.order_id,
                              amount=order.amount, payment_env=req.payment_env)


def gateway_authorize(gateway, auth_req, cardholder_cert, issuer_db, current_period=None):
    """Verify the card and the merchant's claim, then debit the issuer account."""
    current_period = current_period or SET_CONFIG['current_period']
    plaintext = open_envelope(auth_req.payment_env, gateway.participant.keypair.private, cardholder_cert)
    payment = PaymentInfo.from_bytes(plaintext)
    masked = mask_card_number(payment.card_number)

    if not luhn_valid(payment.card_number):
        raise MalformedCard(f"card {masked} fails the Luhn check")
    expiry = parse_expiry(payment.expiry)
    if expiry is None:
        raise MalformedCard(f"card {masked} has malformed expiry {payment.expiry!r}")
    if expiry < current_period:
        raise CardExpired(f"card {masked} expired {payment.expiry}")
    if payment.card_number not in issuer_db:
        raise CardUnknown(f"card {masked} is not known to the issuer")
    if payment.amount != auth_req.amount:
        raise AmountDisagreement(f"merchant claims {auth_req.amount} cents, cardholder authorized {payment.amount}")
    if payment.order_id != auth_req.order_id:
        raise OrderIdMismatch(f"merchant claims order {auth_req.order_id!r}, cardholder paid for {payment.order_id!r}")
    if payment.order_id in gateway.authorized:
        raise DuplicateAuthorization(f"order {payment.order_id!r} was already authorized")
    if issuer_db[payment.card_number] < payment.amount:
        raise InsufficientFunds(f"card {masked} cannot cover {payment.amount} cents")

    issuer_db[payment.card_number] -= payment.amount
    gateway.authorized[payment.order_id] = (payment.card_number, payment.amount)
    auth_code = cbc_mac(payment.order_id.encode("utf-8") + pack_u64(payment.amount), gateway.mac_bundle)
    logger.info(f"{gateway.name!r} approved order {payment.order_id!r} on card {masked}")
    return AuthResponse(order_id=payment.order_id, approved=True, amount=payment.amount, auth_code=auth_code)


def gateway_void(gateway, order_id, issuer_db):
    """Reverse an authorization whose response never completed; the order id stays burned."""
    if order_id not in gateway.authorized or order_id in gateway.voided:
        return False
    card_number, amount = gateway.authorized[order_id]
    issuer_db[card_number] += amount
    gateway.voided.add(order_id)
    logger.info(f"{gateway.name!r} voided authorization for order {order_id!r}")
    return True


def merchant_complete(merchant, response):
    if response.order_id not in merchant.pending_orders:
        raise UnexpectedResponse(f"no pending order {response.order_id!r}")
    order = merchant.pending_orders[response.order_id]
    if not response.approved or response.amount != order.amount:
        raise UnexpectedResponse(f"response for {response.order_id!r} does not approve the pending amount")
    del merchant.pending_orders[response.order_id]
    merchant.completed_orders[response.order_id] = response
    return order


def _check_cardholder_response(response, order, already_completed):
    if already_completed:
        raise UnexpectedResponse("purchase already completed")
    if response.order_id != order.order_id or response.amount != order.amount or not response.approved:
        raise UnexpectedResponse(f"response does not approve order {order.order_id!r}")


def _check_certificates(ca, certs):
    for cert in certs:
        if not verify_certificate(cert, ca.public):
            raise CertificateRejected(f"certificate for {cert.subject_name!r} is not signed by {ca.name!r}")


def run_purchase(network, ca, actors, order, payment, issuer_db, rng,
                 current_period=None, merchant_state=None, gateway_state=None):
    """Drive one purchase through the simulated network; never raises for protocol errors."""
    network = network or SimNetwork()
    cardholder, merchant_p, gateway_p = actors
    merchant = merchant_state or Merchant(merchant_p)
    gateway = gateway_state or PaymentGateway.create(gateway_p, rng)
    outcome = Outcome(approved=False, transcript=network.transcript)
    trace = outcome.trace
    step = 0
    authorized = False
    cardholder_done = False

    def replay_if_wanted(index, handler):
        if not network.wants_replay(index):
            return
        data = network.replay(index)
        try:
            handler(data)
        except SetForgeError as e:
            outcome.replay_error = e.name
            trace.append(f"  replay of message {index} rejected: {e.name}")
        else:
            trace.append(f"  replay of message {index} was ACCEPTED")

    try:
        step = 0
        _check_certificates(ca, (cardholder.cert, merchant_p.cert, gateway_p.cert))
        trace.append("0. all certificates verify under the CA")

        # Cardholder steps 1-3, twice: order for the merchant, card details for the gateway
        step = 1
        request = create_purchase_request(cardholder, order, payment, merchant_p.cert, gateway_p.cert, rng)
        wire = network.deliver(cardholder.name, merchant_p.name, request.to_bytes(), MESSAGE_LABELS[0])
        trace.append(f"1. {cardholder.name} -> {merchant_p.name}: {MESSAGE_LABELS[0]} ({len(wire)} bytes)")

        def merchant_receive(data):
            return merchant_process(merchant, PurchaseRequest.from_bytes(data), cardholder.cert)

        opened_order, auth_req = merchant_receive(wire)
        trace.append(f"   merchant opened order {opened_order.order_id} ({opened_order.amount} cents); card details stay sealed")
        replay_if_wanted(1, merchant_receive)

        step = 2
        sealed = seal_envelope(auth_req.to_bytes(), merchant.name, merchant_p.keypair.private, gateway_p.cert, rng)
        wire = network.deliver(merchant.name, gateway.name, serialize_envelope(sealed), MESSAGE_LABELS[1])
        trace.append(f"2. {merchant.name} -> {gateway.name}: {MESSAGE_LABELS[1]} ({len(wire)} bytes)")

        def gateway_receive(data):
            plaintext = open_envelope(parse_envelope(data), gateway_p.keypair.private, merchant_p.cert)
            return gateway_authorize(gateway, AuthRequest.from_bytes(plaintext), cardholder.cert,
                                     issuer_db, current_period)

        response = gateway_receive(wire)
        authorized = True
        trace.append(f"   gateway approved order {response.order_id}, auth code {response.auth_code:016x}")
        replay_if_wanted(2, gateway_receive)

        step = 3
        sealed = seal_envelope(response.to_bytes(), gateway.name, gateway_p.keypair.private, merchant_p.cert, rng)
        wire = network.deliver(gateway.name, merchant.name, serialize_envelope(sealed), MESSAGE_LABELS[2])
        trace.append(f"3. {gateway.name} -> {merchant.name}: {MESSAGE_LABELS[2]} ({len(wire)} bytes)")

        def merchant_receive_response(data):
            plaintext = open_envelope(parse_envelope(data), merchant_p.keypair.private, gateway_p.cert)
            merchant.opened_plaintexts.append(plaintext)
            received = AuthResponse.from_bytes(plaintext)
            merchant_complete(merchant, received)
            return received

        forwarded = merchant_receive_response(wire)
        trace.append(f"   merchant recorded approval for order {forwarded.order_id}")
        replay_if_wanted(3, merchant_receive_response)

        step = 4
        sealed = seal_envelope(forwarded.to_bytes(), merchant.name, merchant_p.keypair.private, cardholder.cert, rng)
        wire = network.deliver(merchant.name, cardholder.name, serialize_envelope(sealed), MESSAGE_LABELS[3])
        trace.append(f"4. {merchant.name} -> {cardholder.name}: {MESSAGE_LABELS[3]} ({len(wire)} bytes)")

        def cardholder_receive(data):
            plaintext = open_envelope(parse_envelope(data), cardholder.keypair.private, merchant_p.cert)
            final = AuthResponse.from_bytes(plaintext)
            _check_cardholder_response(final, order, cardholder_done)
            return final

        final = cardholder_receive(wire)
        cardholder_done = True
        trace.append(f"   cardholder confirmed order {final.order_id}")
        replay_if_wanted(4, cardholder_receive)

        outcome.approved = True
        outcome.auth_code = final.auth_code
        logger.info(f"Purchase {order.order_id!r} approved")
    except SetForgeError as e:
        outcome.error = e.name
        outcome.failed_step = step
        trace.append(f"   step {step} rejected: {e.name}: {e}")
        logger.warning(f"Purchase {order.order_id!r} rejected at step {step}: {e.name}: {e}")
        if authorized:
            gateway_void(gateway, order.order_id, issuer_db)
            trace.append(f"   gateway voided authorization for order {order.order_id}")
    return outcome
