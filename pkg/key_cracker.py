"""
Brute-force DES key search over reduced keyspaces

A ReducedKeySpec with effective_bits k enumerates 2**k keys by index; the
search finds the smallest index whose key maps a known plaintext to its
ciphertext. Workers split the index range into contiguous chunks and share a
single best-index cell, so the result never depends on the worker count.

Desk-scale searches (k <= 28) demonstrate the exponential law; time_to_crack
extrapolates the measured rate to the full 56-bit keyspace and reproduces the
arithmetic of the published cost estimates for breaking DES.
"""

import logging
import math
import multiprocessing
import time
from dataclasses import dataclass

import numpy as np

from block_cipher import EFFECTIVE_KEY_BITS, DesKey, crypt_with_schedule, des_encrypt_block, key_schedule
from config import CRACKER_CONFIG, DEFAULT_SEED, LOG_LEVEL
from crypto_utils.errors import BadRate, IndexOutOfRange, KeySpaceTooLarge, NotFound
from numtheory import SeededRng

# Configure logging
logger = logging.getLogger(__name__)
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
logger.setLevel(LOG_LEVEL)

SECONDS_PER_UNIT = {
    'years': CRACKER_CONFIG['seconds_per_year'],
    'days': 86400.0,
    'hours': 3600.0,
    'minutes': 60.0,
    'seconds': 1.0,
}

# Sentinel for "no match yet" in the shared best-index cell
_NO_MATCH = (1 << 63) - 1

_best_index = None


@dataclass(frozen=True)
class ReducedKeySpec:
    effective_bits: int

    def __post_init__(self):
        if not 1 <= self.effective_bits <= EFFECTIVE_KEY_BITS:
            raise IndexOutOfRange(f"effective_bits must be in 1..{EFFECTIVE_KEY_BITS}, got {self.effective_bits}")

    @property
    def size(self):
        return 1 << self.effective_bits


@dataclass(frozen=True)
class KnownPair:
    plaintext: int
    ciphertext: int


@dataclass(frozen=True)
class Projection:
    worst: float
    expected: float


@dataclass(frozen=True)
class CrackReport:
    bits: int
    found_index: int
    keys_tried: int
    elapsed: float
    keys_per_sec: float
    workers: int = 1
    full_scan: bool = False

    def projection(self, bits=EFFECTIVE_KEY_BITS):
        """Time to search a ``bits``-bit keyspace at this report's measured rate."""
        return time_to_crack(bits, self.keys_per_sec)


@dataclass(frozen=True)
class CostEstimate:
    attacker: str
    budget_usd: int
    stated_time: float
    unit: str

    @property
    def seconds(self):
        return self.stated_time * SECONDS_PER_UNIT[self.unit]

    @property
    def derived_rate(self):
        """Keys per second implied by reading the stated time as a full 56-bit sweep."""
        return (1 << EFFECTIVE_KEY_BITS) / self.seconds


@dataclass(frozen=True)
class ContestRow:
    date: str
    winner: str
    stated_time: str
    seconds: float


# Estimates of breaking 56-bit DES, by attacker budget
DES_COST_ESTIMATES = (
    CostEstimate("Pedestrian hacker", 400, 38, 'years'),
    CostEstimate("Small business", 10_000, 556, 'days'),
    CostEstimate("Corporate department", 300_000, 3, 'hours'),
    CostEstimate("Large company", 10_000_000, 6, 'minutes'),
    CostEstimate("Intelligence agency", 300_000_000, 12, 'seconds'),
)

# DES-breaking contest results; the last mixes special hardware with ~100,000 PCs,
# so no per-machine rate is derived from any of them
DES_CHALLENGE_RESULTS = (
    ContestRow("January 1997", "Team led by Rocke Verser, Loveland, Colorado", "96 days", 96 * 86400.0),
    ContestRow("February 1998", "Distributed.Net", "41 days", 41 * 86400.0),
    ContestRow("July 1998", "Electronic Frontier Foundation (EFF)", "56 hours", 56 * 3600.0),
    ContestRow("January 1999", "EFF Deep Crack with nearly 100,000 PCs", "22 hours and 15 minutes",
               22 * 3600.0 + 15 * 60.0),
)

HISTORICAL_NOTES = (
    ("40-bit export session key", 40, 8 * 86400.0,
     "broken by brute force in 8 days using 120 workstations and several large computers (September 1995)"),
)

FACTORING_NOTES = (
    "1980s: a Cray 1S factored 70-digit numbers in under ten hours",
    "1988: a 100-digit number was factored on a network of 50 small computers",
    "1994: a 129-digit number was factored by 1,600 computers over the Internet",
)


def key_from_index(i, spec):
    """DesKey whose 56-bit pattern has low bits ``i``, parity positions zero.

    The 56-bit pattern is split into eight 7-bit groups, most significant first,
    and each group fills the top seven bits of one key byte.
    """
    if not 0 <= i < spec.size:
        raise IndexOutOfRange(f"index {i} outside [0, 2**{spec.effective_bits})")
    return DesKey(_raw_key(i))


def _raw_key(i):
    raw = 0
    for group in range(8):
        raw |= ((i >> (7 * group)) & 0x7F) << (8 * group + 1)
    return raw


def _init_worker(best_index):
    global _best_index
    _best_index = best_index


def _scan_chunk(task):
    """Scan [start, stop) in ascending order; returns (first match or None, keys tried)."""
    plaintext, ciphertext, start, stop, full_scan, check_interval = task
    best = _best_index
    tried = 0
    found = None
    for i in range(start, stop):
        if not full_scan and tried % check_interval == 0 and best.value < i:
            break
        tried += 1
        if crypt_with_schedule(plaintext, key_schedule(_raw_key(i))) == ciphertext:
            if found is None:
                found = i
                with best.get_lock():
                    if i < best.value:
                        best.value = i
            if not full_scan:
                break
    return found, tried


def _partition(size, workers):
    """Contiguous [start, stop) chunks covering [0, size)."""
    step, extra = divmod(size, workers)
    chunks = []
    start = 0
    for w in range(workers):
        stop = start + step + (1 if w < extra else 0)
        chunks.append((start, stop))
        start = stop
    return chunks


def brute_force(pair, spec, workers=1, full_scan=False, max_bits=None):
    """Find the smallest index whose key encrypts pair.plaintext to pair.ciphertext."""
    max_bits = max_bits or CRACKER_CONFIG['max_bits']
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if spec.effective_bits > max_bits:
        raise KeySpaceTooLarge(f"{spec.effective_bits}-bit search exceeds the {max_bits}-bit desk-scale guard")

    workers = min(workers, spec.size)
    best = multiprocessing.Value('q', _NO_MATCH)
    tasks = [(pair.plaintext, pair.ciphertext, start, stop, full_scan, CRACKER_CONFIG['check_interval'])
             for start, stop in _partition(spec.size, workers)]

    start_time = time.perf_counter()
    if workers == 1:
        _init_worker(best)
        results = [_scan_chunk(tasks[0])]
    else:
        with multiprocessing.Pool(processes=workers, initializer=_init_worker, initargs=(best,)) as pool:
            results = pool.map(_scan_chunk, tasks)
    elapsed = max(time.perf_counter() - start_time, 1e-9)

    matches = [found for found, _ in results if found is not None]
    keys_tried = sum(tried for _, tried in results)
    if not matches:
        raise NotFound(f"no key in the {spec.effective_bits}-bit space maps the plaintext to the ciphertext")
    report = CrackReport(bits=spec.effective_bits, found_index=min(matches), keys_tried=keys_tried,
                         elapsed=elapsed, keys_per_sec=keys_tried / elapsed, workers=workers, full_scan=full_scan)
    logger.info(f"Cracked {spec.effective_bits}-bit key at index {report.found_index}: "
                f"{keys_tried} keys in {elapsed:.3f}s ({report.keys_per_sec:,.0f} keys/s, {workers} workers)")
    return report


def time_to_crack(bits, keys_per_sec):
    if not (keys_per_sec > 0 and math.isfinite(keys_per_sec)):
        raise BadRate(f"keys_per_sec must be a positive finite rate, got {keys_per_sec}")
    expected = math.ldexp(1.0, bits - 1) / keys_per_sec
    return Projection(worst=2 * expected, expected=expected)


def scaling_experiment(bits_list, workers=1, rng=None):
    """Full-scan searches for planted keys at each size in ``bits_list``."""
    rng = rng or SeededRng(DEFAULT_SEED)
    limit = CRACKER_CONFIG['scaling_max_bits']
    reports = []
    for bits in bits_list:
        if bits > limit:
            raise KeySpaceTooLarge(f"scaling runs are limited to {limit} bits, got {bits}")
        spec = ReducedKeySpec(bits)
        planted = rng.randbelow(spec.size)
        plaintext = rng.next_u64()
        pair = KnownPair(plaintext, des_encrypt_block(plaintext, key_from_index(planted, spec)))
        report = brute_force(pair, spec, workers=workers, full_scan=True)
        logger.debug(f"Planted index {planted}, found {report.found_index}")
        reports.append(report)
    return reports


def fit_scaling_law(reports):
    """Least-squares slope and intercept of log2(elapsed) against key bits (nominal slope 1)."""
    bits = np.array([r.bits for r in reports], dtype=float)
    if len(np.unique(bits)) < 2:
        raise ValueError("need reports for at least two different key sizes")
    elapsed = np.array([r.elapsed for r in reports], dtype=float)
    slope, intercept = np.polyfit(bits, np.log2(elapsed), 1)
    return float(slope), float(intercept)


def format_in_unit(seconds, unit):
    return f"{seconds / SECONDS_PER_UNIT[unit]:,.1f} {unit}"


def format_duration(seconds):
    """Render a duration in the largest unit that keeps the value >= 1."""
    for unit in ('years', 'days', 'hours', 'minutes'):
        if seconds >= SECONDS_PER_UNIT[unit]:
            return format_in_unit(seconds, unit)
    if seconds >= 1:
        return format_in_unit(seconds, 'seconds')
    return f"{seconds * 1000:.3f} ms"
