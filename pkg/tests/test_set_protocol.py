"""
Test module for the SET three-party purchase.

Participants use 384-bit keys to keep the tamper matrix fast; the flow is
identical at the default 512 bits.
"""

import sys
import os
import unittest
from dataclasses import replace

# Add parent directory to path to import set_protocol
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from crypto_utils.errors import (
    AmountDisagreement,
    AmountMismatch,
    DuplicateAuthorization,
    DuplicateName,
    DuplicateOrder,
    InvalidOrder,
    MalformedCard,
    OrderIdMismatch,
    WrongRecipient,
)
from crypto_utils.card_utils import luhn_check_digit
from crypto_utils.sim_network import Adversary, SimNetwork
from envelope import open_envelope
from numtheory import SeededRng
from pki import create_certification_authority, verify_certificate
from set_protocol import (
    Merchant,
    OrderInfo,
    PaymentGateway,
    PaymentInfo,
    PurchaseRequest,
    create_purchase_request,
    gateway_authorize,
    gateway_void,
    initialize_participants,
    merchant_process,
    run_purchase,
)

CARD = "4539578763621486"
BAD_CHECK_DIGIT_CARD = CARD[:-1] + str((int(luhn_check_digit(CARD[:-1])) + 1) % 10)
NAMES = ("Alice Cardholder", "Bob Books", "Acme Payment Gateway")
INTEGRITY_ERRORS = {"MalformedMessage", "MalformedEnvelope", "WrongRecipient", "SignatureInvalid", "PaddingError"}


class TestSetProtocol(unittest.TestCase):
    """Test cases for the purchase flow and its participants."""

    @classmethod
    def setUpClass(cls):
        rng = SeededRng(0x5E7)
        cls.ca = create_certification_authority("SET Test CA", rng, bits=384)
        cls.actors = initialize_participants(cls.ca, NAMES, rng, bits=384)
        cls.cardholder, cls.merchant_p, cls.gateway_p = cls.actors

    def setUp(self):
        """Set up test fixtures."""
        self.rng = SeededRng(0xBEEF)
        self.issuer_db = {CARD: 100_00}
        self.order = OrderInfo("ORD-0001", "Applied Cryptography", 25_00)
        self.payment = PaymentInfo(CARD, "202812", 25_00, "ORD-0001")

    def purchase(self, adversary=None, payment=None, issuer_db=None, current_period=202610, **states):
        network = SimNetwork(adversary or Adversary())
        outcome = run_purchase(network, self.ca, self.actors, self.order, payment or self.payment,
                               self.issuer_db if issuer_db is None else issuer_db, self.rng,
                               current_period=current_period, **states)
        return outcome, network

    def request(self):
        return create_purchase_request(self.cardholder, self.order, self.payment, self.merchant_p.cert,
                                       self.gateway_p.cert, self.rng)

    # participants

    def test_participants_are_certified(self):
        self.assertEqual([p.role for p in self.actors], ["cardholder", "merchant", "gateway"])
        for participant in self.actors:
            self.assertTrue(verify_certificate(participant.cert, self.ca.public))
            self.assertEqual(participant.cert.subject_name, participant.name)

    def test_participants_reproducible(self):
        first = initialize_participants(self.ca, NAMES, SeededRng(4), bits=256)
        second = initialize_participants(self.ca, NAMES, SeededRng(4), bits=256)
        self.assertEqual(first, second)

    def test_duplicate_names(self):
        with self.assertRaises(DuplicateName):
            initialize_participants(self.ca, ("A", "B", "A"), self.rng, bits=256)

    def test_order_and_payment_invariants(self):
        with self.assertRaises(InvalidOrder):
            OrderInfo("", "x", 1)
        with self.assertRaises(InvalidOrder):
            OrderInfo("ORD", "x", -1)
        with self.assertRaises(MalformedCard):
            PaymentInfo("12345", "202812", 1, "ORD")

    # request construction and merchant

    def test_mismatched_request(self):
        with self.assertRaises(AmountMismatch):
            create_purchase_request(self.cardholder, self.order, replace(self.payment, amount=1),
                                    self.merchant_p.cert, self.gateway_p.cert, self.rng)
        with self.assertRaises(OrderIdMismatch):
            create_purchase_request(self.cardholder, self.order, replace(self.payment, order_id="ORD-9"),
                                    self.merchant_p.cert, self.gateway_p.cert, self.rng)

    def test_merchant_cannot_open_payment(self):
        req = self.request()
        with self.assertRaises(WrongRecipient):
            open_envelope(req.payment_env, self.merchant_p.keypair.private, self.cardholder.cert)

    def test_gateway_recovers_payment(self):
        req = self.request()
        plaintext = open_envelope(req.payment_env, self.gateway_p.keypair.private, self.cardholder.cert)
        self.assertEqual(PaymentInfo.from_bytes(plaintext), self.payment)

    def test_merchant_process(self):
        merchant = Merchant(self.merchant_p)
        order, auth_req = merchant_process(merchant, self.request(), self.cardholder.cert)
        self.assertEqual(order, self.order)
        self.assertEqual(auth_req.amount, 25_00)
        self.assertEqual(auth_req.order_id, "ORD-0001")
        self.assertIn("ORD-0001", merchant.pending_orders)
        with self.assertRaises(DuplicateOrder):
            merchant_process(merchant, self.request(), self.cardholder.cert)

    def test_tampered_order_envelope_never_accepted(self):
        wire = self.request().to_bytes()
        rng = SeededRng(0x0F)
        for _ in range(100):
            bit = rng.randbelow(len(wire) * 8)
            flipped = bytearray(wire)
            flipped[bit // 8] ^= 0x80 >> (bit % 8)
            merchant = Merchant(self.merchant_p)
            try:
                order, _ = merchant_process(merchant, PurchaseRequest.from_bytes(bytes(flipped)), self.cardholder.cert)
            except Exception as e:
                self.assertIn(type(e).__name__, INTEGRITY_ERRORS)
            else:
                # flips inside the still-sealed payment envelope are the gateway's to catch
                self.assertEqual(order, self.order)

    # gateway

    def authorize(self, gateway, auth_req, **kwargs):
        return gateway_authorize(gateway, auth_req, self.cardholder.cert, self.issuer_db, 202610, **kwargs)

    def test_gateway_approves_and_debits(self):
        gateway = PaymentGateway.create(self.gateway_p, self.rng)
        _, auth_req = merchant_process(Merchant(self.merchant_p), self.request(), self.cardholder.cert)
        response = self.authorize(gateway, auth_req)
        self.assertTrue(response.approved)
        self.assertEqual(self.issuer_db[CARD], 75_00)
        self.assertLess(response.auth_code, 1 << 64)
        with self.assertRaises(DuplicateAuthorization):
            self.authorize(gateway, auth_req)
        self.assertEqual(self.issuer_db[CARD], 75_00)

    def test_inflated_claim_rejected(self):
        gateway = PaymentGateway.create(self.gateway_p, self.rng)
        _, auth_req = merchant_process(Merchant(self.merchant_p), self.request(), self.cardholder.cert)
        with self.assertRaises(AmountDisagreement):
            self.authorize(gateway, replace(auth_req, amount=99_00))
        self.assertEqual(self.issuer_db[CARD], 100_00)

    def test_void_restores_funds_once(self):
        gateway = PaymentGateway.create(self.gateway_p, self.rng)
        _, auth_req = merchant_process(Merchant(self.merchant_p), self.request(), self.cardholder.cert)
        self.authorize(gateway, auth_req)
        self.assertTrue(gateway_void(gateway, "ORD-0001", self.issuer_db))
        self.assertEqual(self.issuer_db[CARD], 100_00)
        self.assertFalse(gateway_void(gateway, "ORD-0001", self.issuer_db))
        self.assertEqual(self.issuer_db[CARD], 100_00)

    # end to end

    def test_honest_purchase(self):
        merchant = Merchant(self.merchant_p)
        outcome, network = self.purchase(merchant_state=merchant)
        self.assertTrue(outcome.approved, outcome.trace)
        self.assertIsNone(outcome.error)
        self.assertEqual(self.issuer_db[CARD], 75_00)
        self.assertEqual([h.label for h in network.hops],
                         ["PurchaseRequest", "AuthRequest", "AuthResponse", "PurchaseResponse"])
        self.assertIn("ORD-0001", merchant.completed_orders)
        self.assertTrue(all(CARD.encode() not in p for p in merchant.opened_plaintexts))

    def test_eavesdropper_never_sees_card(self):
        outcome, network = self.purchase(Adversary("eavesdrop"))
        self.assertTrue(outcome.approved)
        self.assertEqual(len(network.transcript), 4)
        self.assertTrue(all(CARD.encode() not in m for m in network.transcript))

    def test_seeded_runs_are_reproducible(self):
        first, _ = self.purchase()
        self.rng = SeededRng(0xBEEF)
        self.issuer_db = {CARD: 100_00}
        second, _ = self.purchase()
        self.assertEqual(first.transcript, second.transcript)
        self.assertEqual(first.auth_code, second.auth_code)

    def test_tamper_matrix(self):
        _, honest = self.purchase(issuer_db={CARD: 100_00})
        positions = SeededRng(0x7A3)
        for index in range(1, 5):
            total_bits = honest.hops[index - 1].length * 8
            bits = [0, total_bits - 1] + [positions.randbelow(total_bits) for _ in range(14)]
            for bit in bits:
                issuer_db = {CARD: 100_00}
                self.rng = SeededRng(index * 7919 + bit)
                outcome, network = self.purchase(Adversary("tamper", index, bit), issuer_db=issuer_db)
                label = f"message {index} bit {bit} of {total_bits}"
                self.assertFalse(outcome.approved, label)
                self.assertIn(outcome.error, INTEGRITY_ERRORS, label)
                # the payment envelope inside message 1 is only opened by the gateway
                self.assertIn(outcome.failed_step, (index, 2) if index == 1 else (index,), label)
                self.assertEqual(issuer_db[CARD], 100_00, label)
                self.assertTrue(network.hops[index - 1].tampered)

    def test_replays_are_rejected(self):
        expected = {1: "DuplicateOrder", 2: "DuplicateAuthorization", 3: "UnexpectedResponse",
                    4: "UnexpectedResponse"}
        for index, error in expected.items():
            issuer_db = {CARD: 100_00}
            outcome, network = self.purchase(Adversary("replay", index), issuer_db=issuer_db)
            self.assertTrue(outcome.approved)
            self.assertEqual(outcome.replay_error, error)
            self.assertEqual(issuer_db[CARD], 75_00)
            self.assertEqual(len(network.transcript), 5)

    def test_replayed_purchase_rejected_by_gateway(self):
        gateway = PaymentGateway.create(self.gateway_p, self.rng)
        first, _ = self.purchase(gateway_state=gateway)
        self.assertTrue(first.approved)
        # a fresh merchant session cannot get the same order authorized twice
        second, _ = self.purchase(gateway_state=gateway)
        self.assertFalse(second.approved)
        self.assertEqual(second.error, "DuplicateAuthorization")
        self.assertEqual(self.issuer_db[CARD], 75_00)

    def test_declines(self):
        cases = [
            ({CARD: 10_00}, self.payment, 202610, "InsufficientFunds"),
            ({}, self.payment, 202610, "CardUnknown"),
            ({CARD: 100_00}, self.payment, 202901, "CardExpired"),
            ({CARD: 100_00}, replace(self.payment, card_number=BAD_CHECK_DIGIT_CARD), 202610, "MalformedCard"),
        ]
        for issuer_db, payment, period, error in cases:
            before = dict(issuer_db)
            outcome, _ = self.purchase(payment=payment, issuer_db=issuer_db, current_period=period)
            self.assertFalse(outcome.approved)
            self.assertEqual(outcome.error, error)
            self.assertEqual(outcome.failed_step, 2)
            self.assertEqual(issuer_db, before)


if __name__ == '__main__':
    unittest.main()
