"""
Utility functions for reading and writing RSA key files.

Format (text, LF line endings):
    setforge-key v1
    kind=public|private
    n=<lowercase hex>
    e=<hex>                      (public)
    d=<hex> p=<hex> q=<hex>      (private, one per line)
Unknown or repeated lines are rejected.
"""

import logging

from crypto_utils.errors import BadParameters, KeyFileError
from rsa_crypto import RsaPrivateKey, RsaPublicKey

# Configure logging
logger = logging.getLogger(__name__)

HEADER = "setforge-key v1"
FIELDS = {
    "public": ("n", "e"),
    "private": ("n", "d", "p", "q"),
}


def format_key(key):
    """Render a public or private key in the text key format."""
    if isinstance(key, RsaPublicKey):
        kind = "public"
    elif isinstance(key, RsaPrivateKey):
        kind = "private"
    else:
        raise KeyFileError(f"cannot serialize {type(key).__name__}")
    lines = [HEADER, f"kind={kind}"]
    for field in FIELDS[kind]:
        lines.append(f"{field}={getattr(key, field):x}")
    return "\n".join(lines) + "\n"


def parse_key(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise KeyFileError("missing 'setforge-key v1' header")
    if len(lines) < 2 or not lines[1].startswith("kind="):
        raise KeyFileError("second line must be kind=public|private")
    kind = lines[1][len("kind="):]
    if kind not in FIELDS:
        raise KeyFileError(f"unknown key kind {kind!r}")

    values = {}
    for line in lines[2:]:
        name, sep, raw = line.partition("=")
        if not sep or name not in FIELDS[kind]:
            raise KeyFileError(f"unexpected line in {kind} key file: {line!r}")
        if name in values:
            raise KeyFileError(f"field {name} appears twice")
        if not raw or raw != raw.lower():
            raise KeyFileError(f"field {name} must be lowercase hex")
        try:
            values[name] = int(raw, 16)
        except ValueError as e:
            raise KeyFileError(f"field {name} is not hex: {raw!r}") from e

    missing = [f for f in FIELDS[kind] if f not in values]
    if missing:
        raise KeyFileError(f"{kind} key file is missing {', '.join(missing)}")
    try:
        if kind == "public":
            return RsaPublicKey(**values)
        return RsaPrivateKey(**values)
    except BadParameters as e:
        raise KeyFileError(f"inconsistent key parameters: {e}") from e


def save_key(path, key):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(format_key(key))
    logger.debug(f"Wrote {type(key).__name__} to {path}")


def load_key(path):
    try:
        with open(path, "r", encoding="ascii", newline="") as f:
            text = f.read()
    except FileNotFoundError as e:
        raise KeyFileError(f"key file not found: {path}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise KeyFileError(f"cannot read key file {path}: {e}") from e
    return parse_key(text)
