"""Exact truncated q-series arithmetic.

Series are plain Python lists of ints, index = power of q.  Products go
through Kronecker substitution: both operands are packed into one big
integer with a slot width large enough for every output coefficient, the
integers are multiplied by GMP, and the low slots are unpacked again.
Arbitrary precision means there is no fixed-width overflow to guard
against; the slot width is derived from a provable coefficient bound.
"""

from __future__ import annotations

import gmpy2
import numpy as np

from .primes import primes_upto

Series = list[int]


def _slot_bits(bound: int) -> int:
    bits = bound.bit_length() + 2
    return (bits + 7) // 8 * 8


def _offset(n: int, width: int) -> gmpy2.mpz:
    one_slot = (1 << (width - 1)).to_bytes(width // 8, "little")
    return gmpy2.mpz(int.from_bytes(one_slot * n, "little"))


def _pack(coeffs: Series, width: int) -> gmpy2.mpz:
    half = 1 << (width - 1)
    nbytes = width // 8
    raw = b"".join((c + half).to_bytes(nbytes, "little") for c in coeffs)
    return gmpy2.mpz(int.from_bytes(raw, "little")) - _offset(len(coeffs), width)


def _unpack(value: gmpy2.mpz, n: int, width: int) -> Series:
    value = (value + _offset(n, width)) & ((gmpy2.mpz(1) << (width * n)) - 1)
    nbytes = width // 8
    raw = int(value).to_bytes(nbytes * n, "little")
    half = 1 << (width - 1)
    return [
        int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half
        for i in range(n)
    ]


def mul(a: Series, b: Series, n: int) -> Series:
    """Product of two series truncated to n terms (powers 0..n-1)."""
    a = list(a[:n]) + [0] * max(0, n - len(a))
    b = list(b[:n]) + [0] * max(0, n - len(b))
    ma = max(map(abs, a), default=0)
    mb = max(map(abs, b), default=0)
    if ma == 0 or mb == 0:
        return [0] * n
    # every output coefficient is a sum of at most n products
    width = _slot_bits(n * ma * mb)
    return _unpack(_pack(a, width) * _pack(b, width), n, width)


def power(a: Series, e: int, n: int) -> Series:
    """a**e truncated to n terms, by repeated squaring."""
    if e < 0:
        raise ValueError("negative exponent")
    result: Series = [1] + [0] * (n - 1)
    base = list(a[:n])
    while e:
        if e & 1:
            result = mul(result, base, n)
        e >>= 1
        if e:
            base = mul(base, base, n)
    return result


def euler_product(n: int) -> Series:
    """prod_{m>=1} (1 - q^m) to n terms via the pentagonal number theorem."""
    out = [0] * n
    k = 0
    while True:
        placed = False
        for j in ((0,) if k == 0 else (k, -k)):
            e = j * (3 * j - 1) // 2
            if e < n:
                out[e] += -1 if j % 2 else 1
                placed = True
        if not placed and k > 0:
            break
        k += 1
    return out


def delta_series(n_max: int) -> Series:
    """Coefficients a(0..n_max) of q * prod (1 - q^m)^24; a(0) = 0, a(1) = 1."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    eta24 = power(euler_product(n_max), 24, n_max)
    return [0] + eta24


def sigma(n_max: int, k: int) -> Series:
    """Divisor power sums sigma_k(0..n_max) with sigma_k(0) = 0."""
    # sigma_k(n) <= zeta(k) n^k < 2 n^k for k >= 2
    if k >= 2 and 2 * n_max**k < 2**62:
        acc = np.zeros(n_max + 1, dtype=np.int64)
        for d in range(1, n_max + 1):
            acc[d::d] += d**k
        return [int(v) for v in acc]
    out = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dk = d**k
        for m in range(d, n_max + 1, d):
            out[m] += dk
    return out


def eisenstein_e4(n_max: int) -> Series:
    """E4 = 1 + 240 sum sigma_3(n) q^n, coefficients 0..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    s3 = sigma(n_max, 3)
    return [1] + [240 * s for s in s3[1:]]


def level1_newform_series(weight: int, n_max: int) -> Series:
    """The unique normalized level-1 cusp eigenform of weight 12, 16 or 20."""
    if weight not in (12, 16, 20):
        raise ValueError(f"weight {weight} not in {{12, 16, 20}}")
    f = delta_series(n_max)
    extra = (weight - 12) // 4
    if extra:
        e4 = eisenstein_e4(n_max)
        f = mul(f, power(e4, extra, n_max + 1), n_max + 1)
    return f


def prime_coefficients(series: Series) -> dict[int, int]:
    return {int(p): series[int(p)] for p in primes_upto(len(series) - 1)}
