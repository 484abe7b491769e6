"""Segmented sieving and per-scenario prime streams.

All enumeration is bounded by the rational prime ``p``, never by the norm of
a prime of ``K``.  Windows are closed intervals ``[lo, hi]``.

Setting ``FROBDENS_CACHE_DIR`` caches ``sieve(hi)`` results on disk as
``primes_le_<hi>.bin``: a 16-byte header (``b"FDNS1\\0"``, two zero bytes,
little-endian u64 count) followed by the primes as little-endian u64.
"""
from __future__ import annotations

import logging
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import kernels
from .errors import BadInput, BoundTooLarge
from .fields import PrimeRecord, Scenario

log = logging.getLogger(__name__)

MAX_BOUND = 10**9
SEGMENT = 1 << 20
CACHE_MAGIC = b"FDNS1\0"
_HEADER = struct.Struct("<6s2xQ")


@dataclass(frozen=True)
class PrimeWindow:
    lo: int
    hi: int

    def __post_init__(self):
        if self.hi > MAX_BOUND:
            raise BoundTooLarge(f"window end {self.hi} exceeds {MAX_BOUND}")
        if self.lo > self.hi + 1:
            raise BadInput(f"bad window [{self.lo}, {self.hi}]")

    def split(self, parts: int) -> list["PrimeWindow"]:
        """Consecutive sub-windows covering exactly the same integers."""
        lo, hi = self.lo, self.hi
        if parts <= 1 or hi - lo < parts:
            return [self]
        step = (hi - lo + 1) // parts
        cuts = [lo + i * step for i in range(parts)] + [hi + 1]
        return [PrimeWindow(a, b - 1) for a, b in zip(cuts, cuts[1:])]


def _base(hi: int) -> np.ndarray:
    return kernels.base_primes(math.isqrt(max(hi, 4)) + 1)


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes in ``[lo, hi]`` by a segmented sieve."""
    if hi > MAX_BOUND:
        raise BoundTooLarge(f"{hi} exceeds {MAX_BOUND}")
    lo = max(int(lo), 2)
    hi = int(hi)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    base = _base(hi)
    chunks = []
    for a in range(lo, hi + 1, SEGMENT):
        b = min(a + SEGMENT, hi + 1)
        chunks.append(kernels.sieve_segment(a, b, base))
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def _cache_path(hi: int) -> Path | None:
    root = os.environ.get("FROBDENS_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"primes_le_{hi}.bin"


def read_prime_cache(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise BadInput(f"{path}: truncated header")
    magic, count = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise BadInput(f"{path}: bad magic {magic!r}")
    body = np.frombuffer(raw, dtype="<u8", offset=_HEADER.size)
    if body.shape[0] != count:
        raise BadInput(f"{path}: header says {count} primes, found {body.shape[0]}")
    return body.astype(np.int64)


def write_prime_cache(path: Path, primes: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, primes.shape[0]))
        fh.write(np.asarray(primes, dtype="<u8").tobytes())
    os.replace(tmp, path)


def sieve(hi: int) -> np.ndarray:
    """All primes ``<= hi`` in increasing order."""
    hi = int(hi)
    if hi > MAX_BOUND:
        raise BoundTooLarge(f"{hi} exceeds {MAX_BOUND}")
    path = _cache_path(hi)
    if path is not None and path.exists():
        try:
            return read_prime_cache(path)
        except BadInput as exc:
            log.warning("ignoring prime cache: %s", exc)
    primes = primes_between(2, hi)
    if path is not None:
        write_prime_cache(path, primes)
    return primes


def classify_window(scenario: Scenario, window: PrimeWindow) -> tuple[np.ndarray, np.ndarray]:
    """Unramified primes of the window with their Frobenius class indices."""
    primes = primes_between(window.lo, window.hi)
    primes = primes[~scenario.ramified_mask(primes)] if primes.size else primes
    return primes, scenario.classify(primes)


def classify_range(scenario: Scenario, lo: int, hi: int, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``classify_window`` over ``[lo, hi]``, fanned out over sub-windows.

    Results are concatenated in window order, so the output does not depend
    on ``threads``.
    """
    windows = PrimeWindow(lo, hi).split(max(1, threads) * 4 if threads > 1 else 1)
    if threads > 1 and len(windows) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: classify_window(scenario, w), windows))
    else:
        parts = [classify_window(scenario, w) for w in windows]
    primes = np.concatenate([p for p, _ in parts])
    classes = np.concatenate([c for _, c in parts])
    return primes, classes


def stream(scenario: Scenario, window: PrimeWindow, include_ramified: bool = False) -> Iterator[PrimeRecord]:
    """One ``PrimeRecord`` per prime of the window, in increasing order.

    Ramified primes are skipped unless ``include_ramified`` is set, in which
    case they come through flagged.
    """
    for p in primes_between(window.lo, window.hi):
        p = int(p)
        if scenario.is_ramified(p):
            if include_ramified:
                yield PrimeRecord(p, None, None, None, None, True)
            continue
        yield scenario.record(p)
