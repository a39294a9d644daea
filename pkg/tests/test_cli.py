"""
Test module for the setforge command-line interface.
"""

import sys
import os
import io
import json
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import pandas as pd

# Add parent directory to path to import setforge
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from setforge import run

INTEGRITY_ERRORS = {"MalformedMessage", "MalformedEnvelope", "WrongRecipient", "SignatureInvalid", "PaddingError"}


class TestCli(unittest.TestCase):
    """Test cases for setforge.run."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.mkdtemp(prefix="setforge-test-")

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def invoke(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = run(list(argv))
        return code, out.getvalue()

    def write(self, name, data):
        with open(self.path(name), "wb") as f:
            f.write(data)
        return self.path(name)

    def read(self, name):
        with open(self.path(name), "rb") as f:
            return f.read()

    def keygen(self, name, bits="256", seed="1"):
        code, _ = self.invoke("--seed", seed, "keygen", "--bits", bits, "--out", self.path(name + ".key"),
                              "--pub-out", self.path(name + ".pub"))
        self.assertEqual(code, 0)

    # keys and RSA files

    def test_keygen_512_encrypt_decrypt(self):
        self.keygen("k", bits="512")
        message = b"The quick brown fox jumps over the lazy dog, twice over: " * 3
        self.write("msg", message)
        self.assertEqual(self.invoke("encrypt", "--key", self.path("k.pub"), "--in", self.path("msg"),
                                     "--out", self.path("ct"))[0], 0)
        self.assertEqual(self.invoke("decrypt", "--key", self.path("k.key"), "--in", self.path("ct"),
                                     "--out", self.path("pt"))[0], 0)
        self.assertEqual(self.read("pt"), message)

    def test_keygen_by_digits(self):
        code, out = self.invoke("keygen", "--digits", "40", "--out", self.path("d.key"))
        self.assertEqual(code, 0)
        self.assertIn("RSA keypair", out)

    def test_sign_and_verify(self):
        self.keygen("k")
        self.write("msg", b"I agree to pay 25.00")
        self.assertEqual(self.invoke("sign", "--key", self.path("k.key"), "--in", self.path("msg"),
                                     "--out", self.path("sig"))[0], 0)
        code, _ = self.invoke("verify", "--key", self.path("k.pub"), "--in", self.path("sig"),
                              "--out", self.path("recovered"))
        self.assertEqual(code, 0)
        self.assertEqual(self.read("recovered"), b"I agree to pay 25.00")

    def test_export_public_matches_keygen(self):
        self.keygen("k")
        self.assertEqual(self.invoke("export-public", "--key", self.path("k.key"),
                                     "--out", self.path("exported.pub"))[0], 0)
        self.assertEqual(self.read("exported.pub"), self.read("k.pub"))

    def test_decrypt_with_wrong_key(self):
        self.keygen("a", seed="1")
        self.keygen("b", seed="2")
        self.write("msg", b"secret")
        self.invoke("encrypt", "--key", self.path("a.pub"), "--in", self.path("msg"), "--out", self.path("ct"))
        code, out = self.invoke("decrypt", "--key", self.path("b.key"), "--in", self.path("ct"),
                                "--out", self.path("pt"))
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "MalformedCiphertext")
        self.assertFalse(os.path.exists(self.path("pt")))

    def test_decrypt_needs_private_key(self):
        self.keygen("k")
        self.write("ct", b"\x00" * 32)
        code, out = self.invoke("decrypt", "--key", self.path("k.pub"), "--in", self.path("ct"),
                                "--out", self.path("pt"))
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "KeyFileError")

    def test_keygen_into_missing_directory(self):
        target = os.path.join(self.tmp, "no-such-dir", "k.key")
        code, out = self.invoke("keygen", "--bits", "256", "--out", target)
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.keygen("k")
        code, _ = self.invoke("export-public", "--key", self.path("k.key"), "--out", target)
        self.assertEqual(code, 2)

    def test_unreadable_key_file(self):
        self.write("msg", b"hello")
        self.write("garbage.key", bytes(range(128, 256)))
        for key in (self.path("garbage.key"), self.tmp):
            code, out = self.invoke("encrypt", "--key", key, "--in", self.path("msg"), "--out", self.path("ct"))
            self.assertEqual(code, 1)
            self.assertEqual(out.strip(), "KeyFileError")

    # certificates and envelopes

    def test_certify_and_verify(self):
        self.keygen("ca", seed="10")
        self.keygen("rogue", seed="11")
        self.keygen("shop", seed="12")
        code, _ = self.invoke("certify", "--ca", self.path("ca.key"), "--subject", "Bob Books",
                              "--key", self.path("shop.pub"), "--out", self.path("shop.cert"))
        self.assertEqual(code, 0)
        self.assertTrue(self.read("shop.cert").startswith(b"SFC1"))
        self.assertEqual(self.invoke("verify-cert", "--cert", self.path("shop.cert"),
                                     "--ca", self.path("ca.pub"))[0], 0)
        code, out = self.invoke("verify-cert", "--cert", self.path("shop.cert"), "--ca", self.path("rogue.pub"))
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "CertificateRejected")

    def test_seal_and_open(self):
        self.keygen("ca", seed="20")
        self.keygen("alice", seed="21")
        self.keygen("bob", seed="22")
        for name, subject in (("alice", "Alice"), ("bob", "Bob")):
            self.invoke("certify", "--ca", self.path("ca.key"), "--subject", subject,
                        "--key", self.path(name + ".pub"), "--out", self.path(name + ".cert"))
        self.write("order", b"one book, 25.00")
        code, _ = self.invoke("seal", "--key", self.path("alice.key"), "--sender", "Alice",
                              "--to", self.path("bob.cert"), "--ca", self.path("ca.pub"),
                              "--in", self.path("order"), "--out", self.path("env"))
        self.assertEqual(code, 0)
        code, _ = self.invoke("open", "--key", self.path("bob.key"), "--from", self.path("alice.cert"),
                              "--in", self.path("env"), "--out", self.path("opened"))
        self.assertEqual(code, 0)
        self.assertEqual(self.read("opened"), b"one book, 25.00")
        code, out = self.invoke("open", "--key", self.path("alice.key"), "--from", self.path("alice.cert"),
                                "--in", self.path("env"), "--out", self.path("opened2"))
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "WrongRecipient")

    # demos

    def test_handshake_demo(self):
        code, out = self.invoke("handshake-demo")
        self.assertEqual(code, 0)
        self.assertIn("negotiated 128-bit session key", out)
        self.assertIn("eavesdropper saw plaintext: no", out)
        self.assertIn("replayed record rejected: ReplayOrReorder", out)
        code, out = self.invoke("handshake-demo", "--export")
        self.assertEqual(code, 0)
        self.assertIn("negotiated 40-bit session key", out)

    def test_set_demo_approves(self):
        code, out = self.invoke("set-demo")
        self.assertEqual(code, 0)
        self.assertIn("APPROVED", out)
        self.assertIn("cardholder balance after: 7500 cents", out)

    def test_set_demo_is_reproducible(self):
        self.assertEqual(self.invoke("--seed", "7", "set-demo"), self.invoke("--seed", "7", "set-demo"))

    def test_set_demo_tampered(self):
        code, out = self.invoke("set-demo", "--adversary", "tamper:2:7")
        self.assertEqual(code, 1)
        self.assertIn(out.strip().splitlines()[-1], INTEGRITY_ERRORS)
        self.assertIn("cardholder balance after: 10000 cents", out)

    def test_set_demo_replay(self):
        code, out = self.invoke("set-demo", "--adversary", "replay:1")
        self.assertEqual(code, 0)
        self.assertIn("replay rejected: DuplicateOrder", out)

    def test_set_demo_insufficient_funds(self):
        code, out = self.invoke("set-demo", "--funds", "1000")
        self.assertEqual(code, 1)
        self.assertEqual(out.strip().splitlines()[-1], "InsufficientFunds")

    # cracker

    def test_crack(self):
        code, out = self.invoke("crack", "--bits", "10", "--workers", "1", "--index", "77",
                                "--csv", self.path("crack.csv"))
        self.assertEqual(code, 0)
        self.assertIn("found index 77", out)
        frame = pd.read_csv(self.path("crack.csv"))
        self.assertEqual(list(frame.columns),
                         ["bits", "keys_tried", "elapsed_s", "keys_per_sec", "projected_56bit_worst_s"])
        self.assertEqual(int(frame["keys_tried"][0]), 78)

    def test_crack_guard(self):
        code, out = self.invoke("crack", "--bits", "30", "--workers", "1")
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "KeySpaceTooLarge")

    def test_project_cost_estimates(self):
        code, out = self.invoke("project", "--table2")
        self.assertEqual(code, 0)
        for stated in ("38.0 years", "556.0 days", "3.0 hours", "6.0 minutes", "12.0 seconds"):
            self.assertIn(stated, out)

    def test_project_rate_json(self):
        code, out = self.invoke("project", "--rate", "1e9", "--json", self.path("p.json"))
        self.assertEqual(code, 0)
        self.assertIn("56-bit keyspace", out)
        with open(self.path("p.json")) as f:
            rows = json.load(f)
        self.assertEqual(rows[0]["bits"], 56)
        self.assertAlmostEqual(rows[0]["elapsed_s"], 2 ** 56 / 1e9)

    def test_project_history(self):
        code, out = self.invoke("project", "--history")
        self.assertEqual(code, 0)
        self.assertIn("22 hours and 15 minutes", out)
        self.assertIn("120 workstations", out)

    def test_project_bad_rate(self):
        code, out = self.invoke("project", "--rate", "0")
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), "BadRate")

    def test_bench(self):
        code, out = self.invoke("bench", "--bits-list", "8,10", "--csv", self.path("bench.csv"),
                                "--plot", self.path("bench.html"))
        self.assertEqual(code, 0)
        self.assertEqual(len(pd.read_csv(self.path("bench.csv"))), 2)
        self.assertTrue(os.path.getsize(self.path("bench.html")) > 0)

    # usage errors

    def test_usage_errors(self):
        self.assertEqual(self.invoke()[0], 2)
        self.assertEqual(self.invoke("frobnicate")[0], 2)
        self.assertEqual(self.invoke("keygen", "--out", self.path("k"), "--colour", "red")[0], 2)
        self.assertEqual(self.invoke("set-demo", "--adversary", "tamper:x")[0], 2)
        self.assertEqual(self.invoke("project")[0], 2)
        self.assertEqual(self.invoke("bench", "--bits-list", "a,b")[0], 2)
        self.assertEqual(self.invoke("encrypt", "--key", self.path("missing"), "--in", self.path("missing"),
                                     "--out", self.path("x"))[0], 1)
        self.assertEqual(self.invoke("--seed", "banana", "set-demo")[0], 2)


if __name__ == '__main__':
    unittest.main()
