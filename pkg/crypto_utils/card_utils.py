"""
Utility functions for payment card numbers and expiry periods.
"""

import re
import logging

# Configure logging
logger = logging.getLogger(__name__)

CARD_PATTERN = re.compile(r"\d{12,19}")
EXPIRY_PATTERN = re.compile(r"(\d{4})(0[1-9]|1[0-2])")


def luhn_valid(card_number):
    """
    Check the Luhn checksum of a card number.

    Args:
        card_number (str): Digit string of 12-19 digits

    Returns:
        bool: True if the number is well formed and its checksum is valid
    """
    if not CARD_PATTERN.fullmatch(card_number or ""):
        return False
    total = 0
    for position, char in enumerate(reversed(card_number)):
        digit = int(char)
        if position % 2 == 1:
            digit *= 2
            if digit > 9:
                digit -= 9
        total += digit
    return total % 10 == 0


def luhn_check_digit(partial_number):
    """Digit that makes ``partial_number`` + digit pass the Luhn check."""
    for digit in "0123456789":
        if luhn_valid(partial_number + digit):
            return digit
    raise ValueError(f"no check digit for {partial_number!r}")


def parse_expiry(expiry):
    """Return YYYYMM as an integer, or None when malformed."""
    match = EXPIRY_PATTERN.fullmatch(expiry or "")
    if not match:
        logger.debug(f"Malformed expiry {expiry!r}")
        return None
    return int(expiry)


def mask_card_number(card_number):
    """Show only the last four digits, e.g. for trace output."""
    if len(card_number) <= 4:
        return card_number
    return "*" * (len(card_number) - 4) + card_number[-4:]
