"""Independent brute-force oracles; none of these share code with the package."""

from __future__ import annotations

import math
from functools import lru_cache

from scipy.integrate import quad


def primes_naive(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]


def curve_points_ap(f, p: int) -> int:
    """p - #{(x, y) in F_p^2 : y^2 = f(x)} by listing squares."""
    sq = [0] * p
    for y in range(p):
        sq[y * y % p] += 1
    return p - sum(sq[f(x) % p] for x in range(p))


def tau_naive(n_max: int) -> list[int]:
    """q prod (1 - q^n)^24 by schoolbook multiplication."""
    poly = [0] * (n_max + 1)
    poly[0] = 1
    for n in range(1, n_max + 1):
        for _ in range(24):
            for i in range(n_max, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly[:n_max]


def convolve_naive(a, b, n):
    out = [0] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        for j, y in enumerate(b[: n + 1 - i]):
            out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def _rho_at_int(k: int) -> float:
    if k <= 1:
        return 1.0
    return rho_quad(float(k))


def rho_quad(u: float) -> float:
    """Dickman rho by nested adaptive quadrature, unit interval at a time."""
    if u <= 1:
        return 1.0
    if u <= 2:
        return 1.0 - math.log(u)
    k = math.floor(u) if u != math.floor(u) else int(u) - 1
    val, _ = quad(lambda t: rho_quad(t - 1) / t, k, u, epsabs=1e-14, epsrel=1e-13, limit=200)
    return _rho_at_int(k) - val


def rho_double_integral(v: float) -> float:
    """rho(v) for 2 <= v <= 3 as 1 - log v + int_2^v log(t-1)/t dt."""
    val, _ = quad(lambda t: math.log(t - 1) / t, 2, v, epsabs=1e-14, epsrel=1e-13)
    return 1 - math.log(v) + val


def h_brute(y: float, X: int, bad=()) -> list[int]:
    """h_y(n) for n <= X by factoring every n."""
    out = [0] * (X + 1)
    for n in range(1, X + 1):
        m, v, p = n, 1, 2
        while m > 1 and v:
            if p * p > m:
                p = m
            if m % p == 0:
                m //= p
                if m % p == 0 or p in bad:
                    v = 0
                elif p * p <= y:
                    v *= 1
                elif p <= y:
                    v = 0
                else:
                    v *= -2
            p += 1
        out[n] = v
    return out
