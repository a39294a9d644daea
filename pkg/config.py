"""
Centralized configuration for the SetForge secure-transaction toolkit.
This module provides consistent configuration values across all components.
"""

import os
from dotenv import load_dotenv

from crypto_utils.card_utils import luhn_check_digit

# Load environment variables
load_dotenv()

# Seed for every SeededRng created by the CLI and demos
DEFAULT_SEED = int(os.getenv("SETFORGE_SEED", "0xC0FFEE"), 0)

# Logging level shared by all module loggers (logs go to stderr only)
LOG_LEVEL = os.getenv("SETFORGE_LOG_LEVEL", "INFO").upper()


def get_default_workers():
    # Check if SETFORGE_WORKERS is defined in environment variables
    env_workers = os.getenv("SETFORGE_WORKERS")
    if env_workers:
        return max(1, int(env_workers))
    return os.cpu_count() or 1


# RSA configuration
RSA_CONFIG = {
    'default_bits': 512,     # about 154 decimal digits
    'public_exponent': 17,
    'min_bits': 16,
    'max_bits': 4096,
}

# Prime generation configuration
PRIME_CONFIG = {
    'miller_rabin_rounds': 40,
    'keypair_check_rounds': 20,  # used when validating caller-supplied primes
}

# SSL-style channel configuration
CHANNEL_CONFIG = {
    'client_strengths': (40, 128),
    'export_strengths': (40,),
    'domestic_strengths': (40, 128),
}

# Demo card without its Luhn check digit
DEMO_CARD_PREFIX = os.getenv("SETFORGE_CARD_PREFIX", "453957876362148")

# SET purchase configuration
SET_CONFIG = {
    'ca_name': 'SetForge Root CA',
    'cardholder_name': 'Alice Cardholder',
    'merchant_name': 'Bob Books',
    'gateway_name': 'Acme Payment Gateway',
    'current_period': 202610,        # YYYYMM, compared against card expiry
    'demo_card_number': DEMO_CARD_PREFIX + luhn_check_digit(DEMO_CARD_PREFIX),
    'demo_card_expiry': '202812',
    'demo_funds_cents': 100_00,
    'demo_amount_cents': 25_00,
    'demo_order_id': 'ORD-0001',
    'demo_description': 'Applied Cryptography, 2nd edition',
}

# Brute-force cracker configuration
CRACKER_CONFIG = {
    'max_bits': 28,               # desk-scale guard for brute_force
    'scaling_max_bits': 24,       # upper bound for scaling_experiment
    'default_workers': get_default_workers(),
    'check_interval': 4096,       # keys scanned between best-index checks
    'seconds_per_year': 3.156e7,
    'default_bits_list': (12, 14, 16),
}

# CLI configuration
CLI_CONFIG = {
    'issuer_name': SET_CONFIG['ca_name'],
    'handshake_server_name': 'shop.example.com',
}
