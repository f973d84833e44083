"""Sign analytics over coefficient tables.

Zero is treated as having both signs ("relaxed" agreement).  At primes the
exact integer a(p) decides the sign; elsewhere normalized doubles with a
1e-12 dead zone are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chebst import U_eval, st_cdf
from .errors import BudgetExceeded
from .forms import ZERO_EPS, AngleTable, CoefficientTable
from .primes import prime_divisors, primes_upto

H_SUM_BUDGET = 30_000_000


@dataclass(frozen=True)
class SignSequence:
    primes: np.ndarray
    signs: np.ndarray
    label: str = ""
    zero_policy: str = "relaxed"

    def negated(self) -> SignSequence:
        return SignSequence(self.primes, -self.signs, f"-{self.label}")


def sign_sequence(table: CoefficientTable, x: float | None = None) -> SignSequence:
    ps, sg = table.prime_signs(table.p_max if x is None else x)
    return SignSequence(ps, sg, table.label)


def _as_signs(obj, x) -> SignSequence:
    seq = obj if isinstance(obj, SignSequence) else sign_sequence(obj, x)
    k = np.searchsorted(seq.primes, x, side="right")
    return SignSequence(seq.primes[:k], seq.signs[:k], seq.label)


@dataclass(frozen=True)
class FirstNegative:
    n_f: int | None
    prime: int | None


def first_negative(table: CoefficientTable, n_max: int | None = None) -> FirstNegative:
    n_max = table.n_max if n_max is None else min(n_max, table.n_max)
    lam = table.lam[: n_max + 1]
    neg = lam < -ZERO_EPS
    ps, sg = table.prime_signs(max(n_max, 1))
    neg[ps] = sg < 0
    hits = np.flatnonzero(neg)
    n_f = int(hits[0]) if hits.size else None
    ps_all, sg_all = table.prime_signs(table.p_max)
    pneg = ps_all[sg_all < 0]
    return FirstNegative(n_f, int(pneg[0]) if pneg.size else None)


@dataclass(frozen=True)
class Agreement:
    density: float
    disagreements: int
    n_primes: int


def sign_agreement(t1, t2, x: float) -> Agreement:
    """Fraction of common included primes p <= x where the relaxed signs agree."""
    s1, s2 = _as_signs(t1, x), _as_signs(t2, x)
    common, i1, i2 = np.intersect1d(s1.primes, s2.primes, return_indices=True)
    if common.size == 0:
        raise ValueError("no primes in range")
    prod = s1.signs[i1] * s2.signs[i2]
    bad = int(np.sum(prod < 0))
    return Agreement(1.0 - bad / common.size, bad, int(common.size))


@dataclass(frozen=True)
class SignDifference:
    n: int | None
    prime: int | None


def first_sign_difference(t1: CoefficientTable, t2: CoefficientTable,
                          n_max: int | None = None) -> SignDifference:
    """Least n (and least prime) where the two forms have strictly opposite signs."""
    n_max = min(t1.n_max, t2.n_max) if n_max is None else min(n_max, t1.n_max, t2.n_max)
    opp = (t1.lam[: n_max + 1] * t2.lam[: n_max + 1]) < -ZERO_EPS
    top = min(t1.p_max, t2.p_max)
    s1, s2 = _as_signs(t1, top), _as_signs(t2, top)
    common, i1, i2 = np.intersect1d(s1.primes, s2.primes, return_indices=True)
    prime_opp = s1.signs[i1] * s2.signs[i2] < 0
    small = common <= n_max
    opp[common[small]] = prime_opp[small]
    hits = np.flatnonzero(opp)
    phits = common[prime_opp]
    return SignDifference(int(hits[0]) if hits.size else None,
                          int(phits[0]) if phits.size else None)


@lru_cache(maxsize=8)
def squarefree_mask(n_max: int) -> np.ndarray:
    mask = np.ones(n_max + 1, dtype=bool)
    mask[0] = False
    for p in primes_upto(math.isqrt(n_max)).tolist():
        mask[p * p :: p * p] = False
    mask.setflags(write=False)
    return mask


def sum_S(table: CoefficientTable, x: float) -> float:
    """sum of lambda(n) over squarefree n <= x coprime to the excluded primes."""
    x = int(math.floor(x))
    if x > table.n_max:
        raise ValueError(f"x = {x} beyond table coverage {table.n_max}")
    lam = table.lam[: x + 1]
    keep = squarefree_mask(table.n_max)[: x + 1] & ~np.isnan(lam)
    return float(np.sum(lam[keep]))


# --- the auxiliary function h_y ------------------------------------------


def _bad_primes(N) -> frozenset[int]:
    if isinstance(N, (int, np.integer)):
        return prime_divisors(int(N))
    return frozenset(int(p) for p in N)


def _limit(y: float, u: float) -> int:
    return int(math.floor(y**u + 1e-9))


def h_value_at_prime(p: int, y: float, bad=frozenset()) -> int:
    if p in bad:
        return 0
    if p * p <= y:
        return 1
    if p <= y:
        return 0
    return -2


def count_squarefree_products(primes: list[int], X: int) -> int:
    """Number of squarefree n <= X built from the given sorted primes (n = 1 included)."""
    count = 0
    stack = [(1, 0)]
    while stack:
        d, i = stack.pop()
        count += 1
        for j in range(i, len(primes)):
            q = d * primes[j]
            if q > X:
                break
            stack.append((q, j + 1))
    return count


@dataclass(frozen=True)
class HSum:
    value: int
    smooth_count: int
    large_prime_pairs: int
    limit: int


def h_sum(y: float, u: float, N=1, budget: int = H_SUM_BUDGET) -> HSum:
    """Exact sum_{n <= y^u} h_y(n), split as (smooth count) - 2 * (large-prime correction)."""
    if u > 1.5:
        raise ValueError("the split needs u <= 3/2")
    X = _limit(y, u)
    if X > budget:
        raise BudgetExceeded(f"y^u = {X} exceeds budget {budget}")
    bad = _bad_primes(N)
    small = [p for p in primes_upto(math.isqrt(int(y))).tolist() if p * p <= y and p not in bad]
    smooth = count_squarefree_products(small, X)
    # every n = p m with p > y has m <= y^(u-1) <= sqrt(y), so h(m) = 1 on squarefree m
    ymax = int(math.floor(y))
    tmax = X // (ymax + 1) if X > ymax else 0
    corr = 0
    if tmax >= 1:
        sf = squarefree_mask(max(tmax, 1)).copy()
        for p in bad:
            sf[p::p] = False
        Q = np.cumsum(sf)
        big = primes_upto(X)
        big = big[big > y]
        if bad:
            big = big[~np.isin(big, list(bad))]
        corr = int(Q[X // big].sum())
    return HSum(smooth - 2 * corr, smooth, corr, X)


def h_values(y: float, X: int, N=1) -> np.ndarray:
    """h_y(n) for 0 <= n <= X by direct sieving over each n's factorization."""
    bad = _bad_primes(N)
    h = np.ones(X + 1, dtype=np.int64)
    h[0] = 0
    for p in primes_upto(X).tolist():
        v = h_value_at_prime(p, y, bad)
        if v != 1:
            h[p::p] *= v
        if p * p <= X:
            h[p * p :: p * p] = 0
    return h


def h_sum_direct(y: float, u: float, N=1) -> int:
    X = _limit(y, u)
    return int(h_values(y, X, N).sum())


@dataclass(frozen=True)
class LowerBoundReport:
    applicable: bool
    passed: bool | None
    g_margin: float | None
    sum_margin: float | None
    S: float | None
    h_total: int | None
    reason: str = ""


def verify_lower_bound_mechanics(table: CoefficientTable, y: float, u: float) -> LowerBoundReport:
    """Check g_y(p) = lambda(p) - h_y(p) >= 0 and S(f, y^u) >= sum h_y."""
    X = _limit(y, u)
    if X > table.n_max:
        raise ValueError(f"y^u = {X} beyond table coverage {table.n_max}")
    lam = table.lam[1 : int(math.floor(y)) + 1]
    lam = lam[~np.isnan(lam)]
    if np.any(lam < -ZERO_EPS):
        return LowerBoundReport(False, None, None, None, None, None,
                                "lambda(n) < 0 for some n <= y: hypothesis fails")
    bad = table.spec.excluded_primes
    ps, lp = table.lam_primes(X)
    hp = np.array([h_value_at_prime(int(p), y, bad) for p in ps], dtype=float)
    g_margin = float((lp - hp).min()) if ps.size else math.inf
    hs = h_sum(y, u, bad)
    S = sum_S(table, X)
    passed = bool(g_margin >= -1e-9 and S >= hs.value - 1e-6)
    return LowerBoundReport(True, passed, g_margin, S - hs.value, S, hs.value)


# --- Rankin-Selberg diagnostics and Sato-Tate ----------------------------


def rs_partial_sums(t1: CoefficientTable, t2: CoefficientTable, x: float, sigma: float = 1.0):
    """(sum l1 l2 p^-s, sum l1^2 p^-s, sum (l1 l2)^2 p^-s, sum p^-s) over common primes <= x."""
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    p1, l1 = t1.lam_primes(x)
    p2, l2 = t2.lam_primes(x)
    common, i1, i2 = np.intersect1d(p1, p2, return_indices=True)
    w = common.astype(float) ** (-sigma)
    a, b = l1[i1], l2[i2]
    return (float(np.sum(a * b * w)), float(np.sum(a * a * w)),
            float(np.sum((a * b) ** 2 * w)), float(np.sum(w)))


@dataclass(frozen=True)
class STHistogram:
    edges: np.ndarray
    counts: np.ndarray
    expected: np.ndarray
    discrepancy: float
    n: int


def ks_discrepancy(theta: np.ndarray) -> float:
    t = np.sort(np.asarray(theta, dtype=float))
    n = t.size
    F = st_cdf(t)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def st_histogram(angles: AngleTable, x: float, bins: int = 20) -> STHistogram:
    if bins < 2:
        raise ValueError("bins must be >= 2")
    theta = angles.theta[angles.primes <= x]
    if theta.size == 0:
        raise ValueError("no primes in range")
    edges = np.linspace(0.0, math.pi, bins + 1)
    counts, _ = np.histogram(theta, edges)
    expected = np.diff(st_cdf(edges)) * theta.size
    return STHistogram(edges, counts, expected, ks_discrepancy(theta), int(theta.size))


# --- counterexample sequences --------------------------------------------


def counterexample_x(ps) -> np.ndarray:
    ps = np.asarray(ps, dtype=np.int64)
    sgn = np.where(((ps - 1) // 4) % 2 == 0, 1.0, -1.0)
    return np.where(ps % 4 == 1, sgn * math.sqrt(2), 0.0)


def counterexample_y(ps) -> np.ndarray:
    ps = np.asarray(ps, dtype=np.int64)
    sgn = np.where(((ps - 3) // 4) % 2 == 0, 1.0, -1.0)
    return np.where(ps % 4 == 3, sgn * math.sqrt(2), 0.0)


def counterexample_moments(x: float, k_max: int = 6) -> dict:
    """Prime averages of U_k(x_p) and U_k(y_p), k = 1..k_max, plus raw sixth moments."""
    if x < 10:
        raise ValueError("x must be >= 10")
    ps = primes_upto(int(x))
    xs, ys = counterexample_x(ps), counterexample_y(ps)
    out = {"n_primes": int(ps.size),
           "x": {k: float(np.mean(U_eval(k, xs))) for k in range(1, k_max + 1)},
           "y": {k: float(np.mean(U_eval(k, ys))) for k in range(1, k_max + 1)},
           "raw6_x": float(np.mean(xs**6)), "raw6_y": float(np.mean(ys**6)),
           "max_abs_xy": float(np.max(np.abs(xs * ys)))}
    return out
