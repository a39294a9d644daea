#!/usr/bin/env python3
"""
SetForge command-line interface

Usage:
    python setforge.py [--seed S] <command> [options]

Commands:
    keygen          generate an RSA keypair (--bits N or --digits D)
    export-public   write the public half of a private key file
    certify         issue a certificate with a CA key
    verify-cert     check a certificate against a CA key
    encrypt/decrypt RSA blockwise encryption of a file
    sign/verify     RSA blockwise signature with message recovery
    seal/open       SET digital envelopes
    handshake-demo  SSL-style handshake and record exchange over a simulated network
    set-demo        SET three-party purchase, optionally under attack
    crack           brute-force a planted reduced-keyspace DES key
    project         crack-time projections and the published DES estimates
    bench           scaling experiment across key sizes

Exit status: 0 on success, 1 on a domain error (its name is printed on
stdout), 2 on a usage error.
"""

import argparse
import logging
import sys

import pandas as pd

from block_cipher import des_encrypt_block
from config import CHANNEL_CONFIG, CLI_CONFIG, CRACKER_CONFIG, DEFAULT_SEED, LOG_LEVEL, SET_CONFIG
from crypto_utils.errors import CertificateRejected, KeyFileError, SetForgeError
from crypto_utils.key_files import load_key, save_key
from crypto_utils.report_export import (
    export_frame,
    format_table,
    projection_frame,
    reports_to_frame,
    cost_estimates_frame,
    write_scaling_plot,
)
from crypto_utils.sim_network import SimNetwork, parse_adversary
from envelope import open_envelope, parse_envelope, seal_envelope, serialize_envelope
from key_cracker import (
    FACTORING_NOTES,
    HISTORICAL_NOTES,
    DES_CHALLENGE_RESULTS,
    KnownPair,
    ReducedKeySpec,
    brute_force,
    fit_scaling_law,
    format_duration,
    key_from_index,
    scaling_experiment,
    time_to_crack,
)
from numtheory import SeededRng
from pki import (
    CertificationAuthority,
    create_certification_authority,
    issue_certificate,
    parse_certificate,
    serialize_certificate,
    verify_certificate,
)
from rsa_crypto import (
    RsaKeyPair,
    RsaPrivateKey,
    RsaPublicKey,
    decrypt_message,
    encrypt_message,
    generate_keypair,
    key_bits_for_digits,
    public_from_private,
    recover_message,
    sign_message,
)
from set_protocol import OrderInfo, PaymentInfo, initialize_participants, run_purchase
from ssl_channel import (
    ClientConfig,
    Record,
    ServerConfig,
    domestic_policy,
    export_policy,
    keyspace_ratio,
    open_record,
    perform_handshake,
    seal_record,
)

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)


class UsageError(Exception):
    """Bad invocation detected after argument parsing (exit status 2)."""


def _read_bytes(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def _write_bytes(path, data):
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from e


def _save_key(path, key):
    try:
        save_key(path, key)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from e


def _public_key(key):
    if isinstance(key, RsaPublicKey):
        return key
    return public_from_private(key)


def _private_key(key, role="key"):
    if not isinstance(key, RsaPrivateKey):
        raise KeyFileError(f"{role} must be a private key file")
    return key


def _load_certificate(path):
    return parse_certificate(_read_bytes(path))


def cmd_keygen(args, rng):
    bits = key_bits_for_digits(args.digits) if args.digits else args.bits
    keypair = generate_keypair(bits, e=args.e, rng=rng)
    _save_key(args.out, keypair.private)
    if args.pub_out:
        _save_key(args.pub_out, keypair.public)
    n = keypair.public.n
    print(f"generated {n.bit_length()}-bit RSA keypair ({len(str(n))} digits), e={keypair.public.e}")
    print(f"private key: {args.out}")
    if args.pub_out:
        print(f"public key:  {args.pub_out}")
    return 0


def cmd_export_public(args, rng):
    private = _private_key(load_key(args.key))
    _save_key(args.out, public_from_private(private))
    print(f"public key: {args.out}")
    return 0


def cmd_certify(args, rng):
    ca_private = _private_key(load_key(args.ca), "CA key")
    ca = CertificationAuthority(name=args.issuer,
                                keypair=RsaKeyPair(public=public_from_private(ca_private), private=ca_private))
    cert = issue_certificate(ca, args.subject, _public_key(load_key(args.key)))
    _write_bytes(args.out, serialize_certificate(cert))
    print(f"certificate for {cert.subject_name!r} issued by {cert.issuer_name!r}: {args.out}")
    return 0


def cmd_verify_cert(args, rng):
    cert = _load_certificate(args.cert)
    if not verify_certificate(cert, _public_key(load_key(args.ca))):
        raise CertificateRejected(f"certificate for {cert.subject_name!r} does not verify under {args.ca}")
    print(f"valid: {cert.subject_name!r} issued by {cert.issuer_name!r}")
    return 0


def cmd_encrypt(args, rng):
    _write_bytes(args.out, encrypt_message(_read_bytes(args.input), _public_key(load_key(args.key))))
    return 0


def cmd_decrypt(args, rng):
    _write_bytes(args.out, decrypt_message(_read_bytes(args.input), _private_key(load_key(args.key))))
    return 0


def cmd_sign(args, rng):
    _write_bytes(args.out, sign_message(_read_bytes(args.input), _private_key(load_key(args.key))))
    return 0


def cmd_verify(args, rng):
    recovered = recover_message(_read_bytes(args.input), _public_key(load_key(args.key)))
    _write_bytes(args.out, recovered)
    print(f"signature valid, recovered {len(recovered)} bytes")
    return 0


def cmd_seal(args, rng):
    sender_key = _private_key(load_key(args.key), "sender key")
    recipient_cert = _load_certificate(args.to)
    if args.ca and not verify_certificate(recipient_cert, _public_key(load_key(args.ca))):
        raise CertificateRejected(f"recipient certificate for {recipient_cert.subject_name!r} does not verify")
    env = seal_envelope(_read_bytes(args.input), args.sender, sender_key, recipient_cert, rng)
    _write_bytes(args.out, serialize_envelope(env))
    print(f"sealed for {recipient_cert.subject_name!r}: {args.out}")
    return 0


def cmd_open(args, rng):
    env = parse_envelope(_read_bytes(args.input))
    sender_cert = _load_certificate(args.sender_cert)
    message = open_envelope(env, _private_key(load_key(args.key), "recipient key"), sender_cert)
    _write_bytes(args.out, message)
    print(f"opened envelope from {env.sender_name!r}, {len(message)} bytes")
    return 0


def cmd_handshake_demo(args, rng):
    ca = create_certification_authority(SET_CONFIG['ca_name'], rng)
    server_name = CLI_CONFIG['handshake_server_name']
    server_keys = generate_keypair(rng=rng)
    server = ServerConfig(cert=issue_certificate(ca, server_name, server_keys.public), keypair=server_keys,
                          policy=export_policy() if args.export else domestic_policy())
    client = ClientConfig(trusted_ca_public=ca.public, allowed=frozenset(CHANNEL_CONFIG['client_strengths']))
    network = SimNetwork(parse_adversary("eavesdrop"))

    print(f"server {server_name!r} ({server.policy.jurisdiction}), allows {sorted(server.policy.allowed)} bits")
    client_state, server_state = perform_handshake(client, server, rng, network)
    for hop in network.hops:
        print(f"  {hop.index}. {hop.sender} -> {hop.recipient}: {hop.label} ({hop.length} bytes)")
    print(f"negotiated {client_state.strength}-bit session key")
    print(f"a 128-bit session keyspace is {keyspace_ratio(128, 40):,} times larger than a 40-bit one")

    message = args.message.encode("utf-8")
    record = seal_record(client_state, message, rng)
    wire = network.deliver(client.name, server_name, record.to_bytes(), "Record")
    received = open_record(server_state, Record.from_bytes(wire))
    print(f"record {record.seq}: server received {received.decode('utf-8')!r}")
    leaked = any(message in m for m in network.transcript)
    print(f"eavesdropper saw plaintext: {'yes' if leaked else 'no'}")
    try:
        open_record(server_state, Record.from_bytes(wire))
    except SetForgeError as e:
        print(f"replayed record rejected: {e.name}")
    return 0


def cmd_set_demo(args, rng):
    try:
        adversary = parse_adversary(args.adversary)
    except ValueError as e:
        raise UsageError(str(e)) from e

    ca = create_certification_authority(SET_CONFIG['ca_name'], rng)
    names = (SET_CONFIG['cardholder_name'], SET_CONFIG['merchant_name'], SET_CONFIG['gateway_name'])
    actors = initialize_participants(ca, names, rng)
    card = SET_CONFIG['demo_card_number']
    issuer_db = {card: args.funds}
    order = OrderInfo(SET_CONFIG['demo_order_id'], SET_CONFIG['demo_description'], args.amount)
    payment = PaymentInfo(card, SET_CONFIG['demo_card_expiry'], args.amount, order.order_id)
    network = SimNetwork(adversary)

    print(f"adversary: {adversary.describe()}")
    print(f"cardholder balance before: {issuer_db[card]} cents")
    outcome = run_purchase(network, ca, actors, order, payment, issuer_db, rng)
    for line in outcome.trace:
        print(line)
    print("wire messages:")
    for hop in network.hops:
        flags = " [tampered]" if hop.tampered else " [replayed]" if hop.replayed else ""
        print(f"  {hop.index}. {hop.sender} -> {hop.recipient}: {hop.label} ({hop.length} bytes){flags}")
    print(f"cardholder balance after: {issuer_db[card]} cents")
    if outcome.replay_error:
        print(f"replay rejected: {outcome.replay_error}")
    if not outcome.approved:
        print(outcome.error)
        return 1
    print(f"APPROVED, auth code {outcome.auth_code:016x}")
    return 0


def _export(args, frame):
    success, message = export_frame(frame, csv_path=args.csv, json_path=getattr(args, "json", None))
    if not success:
        raise UsageError(message)


def cmd_crack(args, rng):
    spec = ReducedKeySpec(args.bits)
    planted = args.index if args.index is not None else rng.randbelow(spec.size)
    plaintext = rng.next_u64()
    pair = KnownPair(plaintext, des_encrypt_block(plaintext, key_from_index(planted, spec)))
    report = brute_force(pair, spec, workers=args.workers, full_scan=args.full_scan, max_bits=args.max_bits)
    frame = reports_to_frame([report])
    print(format_table(frame))
    print(f"planted index {planted}, found index {report.found_index} with {report.workers} worker(s)")
    projection = report.projection()
    print(f"56-bit keyspace at this rate: worst {format_duration(projection.worst)}, "
          f"expected {format_duration(projection.expected)}")
    _export(args, frame)
    return 0


def cmd_project(args, rng):
    if args.rate is None and not (args.table2 or args.history):
        raise UsageError("project needs --rate, --table2 or --history")
    frames = []
    if args.rate is not None:
        projection = time_to_crack(args.bits, args.rate)
        print(f"{args.bits}-bit keyspace at {args.rate:g} keys/s: worst {format_duration(projection.worst)}, "
              f"expected {format_duration(projection.expected)}")
        frames.append(projection_frame(args.bits, args.rate))
    if args.table2:
        table = cost_estimates_frame()
        print("Estimates of breaking 56-bit DES (rates derived from the stated times):")
        print(format_table(table[["attacker", "budget_usd", "stated", "keys_per_sec", "worst", "expected"]]))
        frames.extend(projection_frame(56, rate) for rate in table["keys_per_sec"])
    if args.history:
        print("DES-breaking contests (56-bit key):")
        for row in DES_CHALLENGE_RESULTS:
            print(f"  {row.date:<14} {row.stated_time:<24} {row.winner}")
        for label, bits, seconds, note in HISTORICAL_NOTES:
            rate = (1 << bits) / seconds
            print(f"{label}: {note}; about {rate:,.0f} keys/s, "
                  f"which would need {format_duration(time_to_crack(56, rate).worst)} for 56 bits")
        billion = time_to_crack(56, 1e9)
        print(f"at a billion keys a second a 56-bit key falls in {format_duration(billion.expected)} "
              f"on average ({format_duration(billion.worst)} worst case)")
        print("RSA factoring milestones (not reimplemented):")
        for note in FACTORING_NOTES:
            print(f"  {note}")
    if frames:
        _export(args, pd.concat(frames, ignore_index=True))
    return 0


def cmd_bench(args, rng):
    try:
        bits_list = [int(b) for b in args.bits_list.split(",") if b.strip()]
    except ValueError as e:
        raise UsageError(f"--bits-list must be comma-separated integers: {e}") from e
    if not bits_list:
        raise UsageError("--bits-list is empty")
    reports = scaling_experiment(bits_list, workers=args.workers, rng=rng)
    frame = reports_to_frame(reports)
    print(format_table(frame))
    for previous, current in zip(reports, reports[1:]):
        print(f"{previous.bits} -> {current.bits} bits: time x{current.elapsed / previous.elapsed:.2f}")
    if len(set(bits_list)) >= 2:
        slope, _ = fit_scaling_law(reports)
        print(f"fitted law: time doubles every {1 / slope:.2f} bits" if slope > 0 else
              f"fitted slope {slope:.2f} is not positive; increase the key sizes")
    _export(args, frame)
    if args.plot:
        write_scaling_plot(reports, args.plot)
        print(f"chart: {args.plot}")
    return 0


def _io_arguments(parser):
    parser.add_argument("--key", required=True, help="key file")
    parser.add_argument("--in", dest="input", required=True, help="input file")
    parser.add_argument("--out", required=True, help="output file")


def build_parser():
    parser = argparse.ArgumentParser(prog="setforge", description="Educational secure-transaction toolkit")
    parser.add_argument("--seed", type=lambda x: int(x, 0), default=DEFAULT_SEED,
                        help="seed for all randomness (default 0xC0FFEE)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate an RSA keypair")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--bits", type=int, default=None, help="modulus size in bits (default 512)")
    size.add_argument("--digits", type=int, default=None, help="modulus size in decimal digits")
    p.add_argument("--e", type=int, default=None, help="public exponent (default 17)")
    p.add_argument("--out", required=True, help="private key file")
    p.add_argument("--pub-out", default=None, help="public key file")
    p.set_defaults(handler=cmd_keygen)

    p = sub.add_parser("export-public", help="write the public key of a private key file")
    p.add_argument("--key", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export_public)

    p = sub.add_parser("certify", help="issue a certificate")
    p.add_argument("--ca", required=True, help="CA private key file")
    p.add_argument("--subject", required=True)
    p.add_argument("--key", required=True, help="subject key file")
    p.add_argument("--out", required=True)
    p.add_argument("--issuer", default=CLI_CONFIG['issuer_name'], help="CA name written into the certificate")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("verify-cert", help="verify a certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--ca", required=True, help="CA key file")
    p.set_defaults(handler=cmd_verify_cert)

    for name, handler in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt),
                          ("sign", cmd_sign), ("verify", cmd_verify)):
        p = sub.add_parser(name, help=f"RSA {name}")
        _io_arguments(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("seal", help="seal a digital envelope")
    _io_arguments(p)
    p.add_argument("--sender", required=True, help="sender name, must match the sender's certificate")
    p.add_argument("--to", required=True, help="recipient certificate")
    p.add_argument("--ca", default=None, help="verify the recipient certificate with this CA key first")
    p.set_defaults(handler=cmd_seal)

    p = sub.add_parser("open", help="open a digital envelope")
    _io_arguments(p)
    p.add_argument("--from", dest="sender_cert", required=True, help="sender certificate")
    p.set_defaults(handler=cmd_open)

    p = sub.add_parser("handshake-demo", help="SSL-style handshake over a simulated network")
    p.add_argument("--export", action="store_true", help="server limited to 40-bit session keys")
    p.add_argument("--message", default="GET /orders/ORD-0001", help="application data to send")
    p.set_defaults(handler=cmd_handshake_demo)

    p = sub.add_parser("set-demo", help="SET purchase over a simulated network")
    p.add_argument("--adversary", default="none", help="none | eavesdrop | tamper:<msg>:<bit> | replay:<msg>")
    p.add_argument("--amount", type=int, default=SET_CONFIG['demo_amount_cents'], help="amount in cents")
    p.add_argument("--funds", type=int, default=SET_CONFIG['demo_funds_cents'], help="card balance in cents")
    p.set_defaults(handler=cmd_set_demo)

    p = sub.add_parser("crack", help="brute-force a planted reduced-keyspace DES key")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--workers", type=int, default=CRACKER_CONFIG['default_workers'])
    p.add_argument("--index", type=int, default=None, help="plant this index instead of a random one")
    p.add_argument("--full-scan", action="store_true", help="scan the whole keyspace")
    p.add_argument("--max-bits", type=int, default=CRACKER_CONFIG['max_bits'], help="desk-scale guard")
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_crack)

    p = sub.add_parser("project", help="crack-time projections")
    p.add_argument("--rate", type=float, default=None, help="keys per second")
    p.add_argument("--bits", type=int, default=56)
    p.add_argument("--table2", action="store_true", help="recompute the published 56-bit DES estimates")
    p.add_argument("--history", action="store_true", help="print historical cracking results")
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("bench", help="full-scan scaling experiment")
    p.add_argument("--bits-list", default=",".join(str(b) for b in CRACKER_CONFIG['default_bits_list']))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.add_argument("--plot", default=None, help="write an HTML chart to this path")
    p.set_defaults(handler=cmd_bench)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2

    rng = SeededRng(args.seed)
    try:
        return args.handler(args, rng)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SetForgeError as e:
        logger.debug(f"{args.command} failed: {e.name}: {e}")
        print(e.name)
        print(f"{e.name}: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
