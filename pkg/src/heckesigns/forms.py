"""Exact Hecke eigenvalues for a small menu of constructible forms.

Three kinds are supported: the level-one cusp eigenforms of weight 12, 16
and 20 (Delta, Delta*E4, Delta*E4^2), the weight-4 Eisenstein series E4
in its eigenvalue normalization a(n) = sigma_3(n), and weight-2 forms
attached to elliptic curves y^2 = x^3 + a4 x + a6.  Curves carry no exact
conductor; instead every prime dividing 2*(4 a4^3 + 27 a6^2) is excluded
from all scans.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import qseries
from .errors import InvariantViolation
from .primes import factorize, is_prime, prime_divisors, primes_upto

LEVEL1 = "level1"
CURVE = "curve"
E4 = "e4"
SYNTHETIC = "synthetic"

ZERO_EPS = 1e-12


@dataclass(frozen=True)
class FormSpec:
    kind: str
    weight: int
    level: int = 1
    excluded_primes: frozenset[int] = frozenset()
    label: str = ""
    a4: int = 0
    a6: int = 0

    def __post_init__(self):
        if self.weight < 2 or self.weight % 2:
            raise ValueError(f"weight must be even and >= 2, got {self.weight}")
        if self.level < 1:
            raise ValueError("level must be positive")
        if self.kind == CURVE and curve_discriminant(self.a4, self.a6) == 0:
            raise ValueError(f"singular curve a4={self.a4}, a6={self.a6}")

    @property
    def analytic_conductor(self) -> int:
        return self.weight**2 * self.level

    @classmethod
    def level1(cls, weight: int) -> FormSpec:
        if weight not in (12, 16, 20):
            raise ValueError(f"no level-1 newform menu entry for weight {weight}")
        return cls(LEVEL1, weight, 1, frozenset(), f"level1_k{weight}")

    @classmethod
    def delta(cls) -> FormSpec:
        return cls.level1(12)

    @classmethod
    def e4(cls) -> FormSpec:
        return cls(E4, 4, 1, frozenset(), "e4")

    @classmethod
    def curve(cls, a4: int, a6: int) -> FormSpec:
        disc = curve_discriminant(a4, a6)
        if disc == 0:
            raise ValueError(f"singular curve a4={a4}, a6={a6}")
        bad = prime_divisors(2 * disc)
        # level proxy: radical of 2*disc (the exact conductor is not computed)
        return cls(CURVE, 2, math.prod(bad), bad, f"ec_{a4}_{a6}", a4, a6)

    @classmethod
    def torsion_curve(cls, a: int, b: int, c: int) -> FormSpec:
        """y^2 = (x-a)(x-b)(x-c) moved to short Weierstrass form."""
        a4, a6 = two_torsion_short_form(a, b, c)
        return cls.curve(a4, a6)

    @classmethod
    def synthetic(cls, label: str, weight: int = 2) -> FormSpec:
        return cls(SYNTHETIC, weight, 1, frozenset(), label)


def curve_discriminant(a4: int, a6: int) -> int:
    return 4 * a4**3 + 27 * a6**2


def two_torsion_short_form(a: int, b: int, c: int) -> tuple[int, int]:
    if len({a, b, c}) != 3:
        raise ValueError("roots must be distinct")
    # x^3 + s x^2 + t x + u
    s, t, u = -(a + b + c), a * b + b * c + c * a, -a * b * c
    if s % 3 == 0:
        sh = s // 3
        return t - 3 * sh * sh, 2 * sh**3 - sh * t + u
    # x -> X/9 - s/3, y -> Y/27
    return 81 * t - 27 * s * s, 54 * s**3 - 243 * s * t + 729 * u


# --- elliptic curve a(p) -------------------------------------------------


def ec_ap(a4: int, a6: int, p: int) -> int:
    """Trace of Frobenius -sum_x legendre(x^3 + a4 x + a6, p) by Euler's criterion.

    Bad odd primes are accepted; the value is then not a Hecke eigenvalue and
    callers must treat it as unreliable (see ``is_good_prime``).
    """
    if p == 2:
        raise ValueError("p = 2 is always excluded for short Weierstrass curves")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    e = (p - 1) // 2
    a4 %= p
    a6 %= p
    s = 0
    for x in range(p):
        v = (x * x * x + a4 * x + a6) % p
        if v:
            s += 1 if pow(v, e, p) == 1 else -1
    return -s


def is_good_prime(a4: int, a6: int, p: int) -> bool:
    return p != 2 and curve_discriminant(a4, a6) % p != 0


def _legendre_table(p: int) -> np.ndarray:
    chi = np.full(p, -1, dtype=np.int64)
    x = np.arange(p, dtype=np.int64)
    chi[x * x % p] = 1
    chi[0] = 0
    return chi


def ec_ap_batch(a4s, a6s, p: int, chunk_elems: int = 1 << 22) -> np.ndarray:
    """a(p) for many curves at one odd prime, via a quadratic-residue lookup."""
    a4s = np.asarray(a4s, dtype=np.int64) % p
    a6s = np.asarray(a6s, dtype=np.int64) % p
    chi = _legendre_table(p)
    x = np.arange(p, dtype=np.int64)
    x3 = x * x % p * x % p
    out = np.empty(a4s.size, dtype=np.int64)
    step = max(1, chunk_elems // p)
    for i in range(0, a4s.size, step):
        vals = (x3[None, :] + a4s[i : i + step, None] * x[None, :] + a6s[i : i + step, None]) % p
        out[i : i + step] = -chi[vals].sum(axis=1)
    return out


def ec_ap_upto(a4: int, a6: int, p_max: int) -> dict[int, int]:
    """a(p) for every odd prime p <= p_max (bad primes included)."""
    return {p: int(ec_ap_batch([a4], [a6], p)[0]) for p in primes_upto(p_max).tolist() if p > 2}


# --- tables --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Exact a(p) at primes plus normalized lambda(n) as doubles.

    ``lam[n]`` is NaN for n = 0 and for every n sharing a factor with the
    excluded primes.  ``primes``/``prime_lam`` cover included primes up to
    ``p_max`` (which may exceed ``n_max``).
    """

    spec: FormSpec
    prime_coeffs: dict[int, int]
    lam: np.ndarray
    primes: np.ndarray
    prime_lam: np.ndarray
    p_max: int
    n_max: int
    unreliable: frozenset[int] = field(default_factory=frozenset)

    @property
    def label(self) -> str:
        return self.spec.label

    def included_primes(self, x: float) -> np.ndarray:
        return self.primes[: np.searchsorted(self.primes, x, side="right")]

    def lam_primes(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        k = np.searchsorted(self.primes, x, side="right")
        return self.primes[:k], self.prime_lam[:k]

    def sign_at_prime(self, p: int) -> int:
        if p in self.prime_coeffs and self.spec.kind != SYNTHETIC:
            a = self.prime_coeffs[p]
            return (a > 0) - (a < 0)
        v = float(self.prime_lam[np.searchsorted(self.primes, p)])
        return 0 if abs(v) < ZERO_EPS else (1 if v > 0 else -1)

    def prime_signs(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Included primes <= x and their exact signs."""
        ps, lam = self.lam_primes(x)
        if self.spec.kind == SYNTHETIC or not self.prime_coeffs:
            sg = np.where(np.abs(lam) < ZERO_EPS, 0, np.sign(lam)).astype(np.int64)
        else:
            sg = np.array([self.sign_at_prime(int(p)) for p in ps], dtype=np.int64)
        return ps, sg

    def is_excluded(self, n: int) -> bool:
        return any(n % p == 0 for p in self.spec.excluded_primes)


def _prime_power_values(spec: FormSpec, p: int, a_p: int, n_max: int) -> list[float]:
    """Normalized lambda(p^j) for j = 0.. while p^j <= n_max, from the exact recurrence."""
    k1 = spec.weight - 1
    pk1 = p**k1
    exact = [1, a_p]
    pj = p * p
    while pj <= n_max:
        exact.append(a_p * exact[-1] - pk1 * exact[-2])
        pj *= p
    return [float(a) / math.pow(p, j * k1 / 2) for j, a in enumerate(exact)]


def _synthetic_power_values(lam_p: float, p: int, n_max: int) -> list[float]:
    vals = [1.0, lam_p]
    pj = p * p
    while pj <= n_max:
        vals.append(lam_p * vals[-1] - vals[-2])
        pj *= p
    return vals


def _multiplicative_fill(n_max: int, powers: dict[int, list[float]], excluded) -> np.ndarray:
    lam = np.ones(n_max + 1)
    lam[0] = np.nan
    for p in excluded:
        if p <= n_max:
            lam[p::p] = np.nan
    for p, vals in powers.items():
        pj = p
        j = 1
        while pj <= n_max:
            idx = np.arange(pj, n_max + 1, pj)
            idx = idx[(idx // pj) % p != 0]
            lam[idx] *= vals[j]
            pj *= p
            j += 1
    return lam


def _assemble(spec: FormSpec, prime_coeffs: dict[int, int], p_max: int, n_max: int,
              unreliable=frozenset()) -> CoefficientTable:
    k1 = spec.weight - 1
    included = sorted(p for p in prime_coeffs if p not in spec.excluded_primes)
    ps = np.array(included, dtype=np.int64)
    plam = np.array([prime_coeffs[p] / math.pow(p, k1 / 2) for p in included])
    powers = {p: _prime_power_values(spec, p, prime_coeffs[p], n_max)
              for p in included if p <= n_max}
    lam = _multiplicative_fill(n_max, powers, spec.excluded_primes)
    for arr in (lam, ps, plam):
        arr.setflags(write=False)
    return CoefficientTable(spec, dict(prime_coeffs), lam, ps, plam, p_max, n_max,
                            frozenset(unreliable))


def prime_coefficients_for(spec: FormSpec, p_max: int) -> dict[int, int]:
    """Exact a(p) for all primes p <= p_max the engine can produce."""
    if spec.kind == LEVEL1:
        return qseries.prime_coefficients(qseries.level1_newform_series(spec.weight, p_max))
    if spec.kind == E4:
        return {p: 1 + p**3 for p in primes_upto(p_max).tolist()}
    if spec.kind == CURVE:
        return ec_ap_upto(spec.a4, spec.a6, p_max)
    raise ValueError(f"no coefficient engine for kind {spec.kind!r}")


def build_table(spec: FormSpec, p_max: int, n_max: int,
                prime_coeffs: dict[int, int] | None = None) -> CoefficientTable:
    if p_max < 2 or n_max < 2:
        raise ValueError("coverage bounds must be >= 2")
    top = max(p_max, n_max)
    if prime_coeffs is None:
        prime_coeffs = prime_coefficients_for(spec, top)
    unreliable = frozenset(p for p in prime_coeffs if p in spec.excluded_primes)
    return _assemble(spec, prime_coeffs, top, n_max, unreliable)


def synthetic_table(label: str, lam_of_p, p_max: int, n_max: int | None = None) -> CoefficientTable:
    """Table from a rule p -> lambda(p), extended by the normalized Hecke recurrence."""
    n_max = p_max if n_max is None else n_max
    spec = FormSpec.synthetic(label)
    top = max(p_max, n_max)
    ps = primes_upto(top)
    plam = np.array([float(lam_of_p(int(p))) for p in ps])
    powers = {int(p): _synthetic_power_values(float(v), int(p), n_max)
              for p, v in zip(ps, plam) if p <= n_max}
    lam = _multiplicative_fill(n_max, powers, ())
    return CoefficientTable(spec, {}, lam, ps.copy(), plam, top, n_max)


def level1_newform(weight: int, n_max: int) -> CoefficientTable:
    spec = FormSpec.level1(weight)
    series = qseries.level1_newform_series(weight, n_max)
    return _assemble(spec, qseries.prime_coefficients(series), n_max, n_max)


# --- angles and divisor counts -------------------------------------------


@dataclass(frozen=True)
class AngleTable:
    primes: np.ndarray
    theta: np.ndarray
    label: str = ""


def theta_angles(table: CoefficientTable, tol: float = 1e-9) -> AngleTable:
    lam = table.prime_lam
    bad = np.flatnonzero(np.abs(lam) > 2 + tol)
    if bad.size:
        p = int(table.primes[bad[0]])
        raise InvariantViolation(f"{table.label}: |lambda({p})| = {abs(lam[bad[0]])} > 2")
    theta = np.arccos(np.clip(lam / 2, -1.0, 1.0))
    return AngleTable(table.primes, theta, table.label)


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for e in factorize(n).values())


def divisor_counts(n_max: int) -> np.ndarray:
    tau = np.zeros(n_max + 1, dtype=np.int64)
    for d in range(1, n_max + 1):
        tau[d::d] += 1
    return tau


# --- coefficient cache ---------------------------------------------------

SCHEMA = "coeffs-v1"


def cache_path(cache_dir, label: str) -> Path:
    return Path(cache_dir) / f"{label}.csv"


def dump_prime_coeffs(spec: FormSpec, prime_coeffs: dict[int, int], p_max: int, path) -> None:
    """Write the cache file atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema={SCHEMA}, label={spec.label}, k={spec.weight}, N={spec.level}, p_max={p_max}"]
    lines += [f"{p},{prime_coeffs[p]}" for p in sorted(prime_coeffs)]
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_prime_coeffs(path) -> tuple[dict[str, str], dict[int, int]]:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError(f"{path}: missing cache header")
        meta = dict(item.strip().split("=", 1) for item in header[2:].split(","))
        if meta.get("schema") != SCHEMA:
            raise ValueError(f"{path}: unsupported schema {meta.get('schema')}")
        coeffs = {}
        for line in fh:
            p, a = line.strip().split(",")
            coeffs[int(p)] = int(a)
    return meta, coeffs


def build_table_cached(spec: FormSpec, p_max: int, n_max: int, cache_dir=None) -> CoefficientTable:
    """build_table backed by the per-label CSV cache (reused when it covers p_max, n_max)."""
    if cache_dir is None:
        return build_table(spec, p_max, n_max)
    top = max(p_max, n_max)
    path = cache_path(cache_dir, spec.label)
    if path.exists():
        meta, coeffs = load_prime_coeffs(path)
        if int(meta["p_max"]) >= top and int(meta["k"]) == spec.weight:
            coeffs = {p: a for p, a in coeffs.items() if p <= top}
            return build_table(spec, p_max, n_max, prime_coeffs=coeffs)
    coeffs = prime_coefficients_for(spec, top)
    dump_prime_coeffs(spec, coeffs, top, path)
    return build_table(spec, p_max, n_max, prime_coeffs=coeffs)
