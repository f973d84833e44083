"""Prime enumeration and small factorization helpers shared by every module."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def sieve_mask(limit: int) -> np.ndarray:
    """Boolean primality mask for 0..limit (inclusive)."""
    if limit < 1:
        return np.zeros(max(limit + 1, 0), dtype=bool)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    mask[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if mask[p]:
            mask[p * p :: 2 * p] = False
    return mask


@lru_cache(maxsize=16)
def _primes_cached(limit: int) -> np.ndarray:
    out = np.flatnonzero(sieve_mask(limit)).astype(np.int64)
    out.setflags(write=False)
    return out


def primes_upto(limit: int) -> np.ndarray:
    """All primes p <= limit as a read-only int64 array."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return _primes_cached(int(limit))


def primes_in_range(lo: int, hi: int, segment: int = 1 << 21) -> np.ndarray:
    """Primes in [lo, hi) by a segmented sieve; memory is O(segment + sqrt(hi))."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    base = primes_upto(math.isqrt(hi - 1) + 1)
    chunks = []
    start = lo
    while start < hi:
        stop = min(start + segment, hi)
        mask = np.ones(stop - start, dtype=bool)
        for p in base.tolist():
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            mask[first - start :: p] = False
        chunks.append(np.flatnonzero(mask).astype(np.int64) + start)
        start = stop
    return np.concatenate(chunks)


def prime_pi(x: float) -> int:
    """Number of primes <= x."""
    x = int(math.floor(x))
    if x < 2:
        return 0
    if x <= 50_000_000:
        return int(primes_upto(x).size)
    return int(primes_in_range(2, x + 1).size)


def smallest_prime_factor(limit: int) -> np.ndarray:
    """spf[n] for 0 <= n <= limit (spf[0] = spf[1] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in primes_upto(math.isqrt(limit)).tolist():
        view = spf[p * p :: p]
        view[view == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (n is desk-scale)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    m = n
    for p in (2, 3):
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    d = 5
    while d * d <= m:
        for q in (d, d + 2):
            while m % q == 0:
                out[q] = out.get(q, 0) + 1
                m //= q
        d += 6
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def prime_divisors(n: int) -> frozenset[int]:
    return frozenset(factorize(abs(n))) if n else frozenset()


def radical(primes) -> int:
    return math.prod(primes)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())
