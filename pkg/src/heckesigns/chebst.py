"""Chebyshev functions, Sato-Tate quadrature and the minorant machinery.

X_n(theta) = sin((n+1) theta) / sin(theta) = U_n(2 cos theta), where U_n is
the Chebyshev polynomial of the second kind in the "value" variable
x = 2 cos theta (so U_{n+1} = x U_n - U_{n-1}).  The X_n form an
orthonormal basis of L^2([0, pi], mu_ST).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvariantViolation

# --- Chebyshev polynomials ----------------------------------------------


def chebyshev_U(n: int) -> list[int]:
    """Integer coefficients (ascending powers) of U_n in x = 2 cos theta."""
    if not 0 <= n <= 64:
        raise ValueError("n must be in [0, 64]")
    prev, cur = [1], [0, 1]
    if n == 0:
        return prev
    for _ in range(n - 1):
        nxt = [0] + cur
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def U_eval(n: int, x):
    """U_n(x) by the three-term recurrence, vectorized over x."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy()
    for _ in range(n - 1):
        prev, cur = cur, x * cur - prev
    return cur


def X_eval(n: int, theta):
    """sin((n+1)theta)/sin(theta) with the limits n+1 at 0 and (-1)^n (n+1) at pi."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    near0 = np.abs(theta) < 1e-7
    nearpi = np.abs(theta - math.pi) < 1e-7
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin((n + 1) * theta) / s
    # sine quotient loses digits near the endpoints; fall back to the polynomial there
    edge = near0 | nearpi | (np.abs(s) < 1e-4)
    if np.any(edge):
        out = np.where(edge, U_eval(n, 2 * np.cos(theta)), out)
    out = np.where(near0, n + 1.0, out)
    out = np.where(nearpi, (-1.0) ** n * (n + 1), out)
    return out if out.ndim else float(out)


def poly_eval(coeffs, x):
    """Horner evaluation for ascending coefficient lists (exact for Fractions)."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_add(a, b, scale=1):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] += scale * c
    return out


@dataclass(frozen=True)
class ChebyshevExpansion:
    """sum_n coeffs[n] X_n(theta) = sum_n coeffs[n] U_n(x); Fractions or floats."""

    coeffs: tuple

    def monomials(self) -> list:
        out = [0]
        for n, c in enumerate(self.coeffs):
            if c:
                out = _poly_add(out, chebyshev_U(n), c)
        return out

    def eval_x(self, x):
        return sum(c * U_eval(n, x) for n, c in enumerate(self.coeffs))

    def eval_theta(self, theta):
        return sum(float(c) * X_eval(n, theta) for n, c in enumerate(self.coeffs))


def hecke_product_identity(table, exponents: dict[int, int]) -> float:
    """|prod_p X_{n_p}(theta(p)) - lambda(prod_p p^{n_p})|."""
    m = 1
    prod = 1.0
    for p, e in exponents.items():
        if p in table.spec.excluded_primes:
            raise ValueError(f"prime {p} is excluded for {table.label}")
        m *= p**e
        lam_p = float(table.prime_lam[np.searchsorted(table.primes, p)])
        theta = math.acos(max(-1.0, min(1.0, lam_p / 2)))
        prod *= X_eval(e, theta)
    if m > table.n_max:
        raise ValueError(f"{m} beyond table coverage {table.n_max}")
    return abs(prod - float(table.lam[m]))


# --- Sato-Tate quadrature ------------------------------------------------


def st_density(theta):
    return (2 / math.pi) * np.sin(theta) ** 2


def st_cdf(theta):
    theta = np.asarray(theta, dtype=float)
    return (theta - np.sin(theta) * np.cos(theta)) / math.pi


def st_integrate(g, n_panels: int = 2048) -> float:
    """Composite Simpson of g(theta) (2/pi) sin^2(theta) over [0, pi]."""
    if n_panels % 2:
        n_panels += 1
    theta = np.linspace(0.0, math.pi, n_panels + 1)
    f = np.asarray(g(theta), dtype=float) * st_density(theta)
    w = np.ones(n_panels + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return float(math.pi / n_panels / 3 * np.dot(w, f))


def cheb_coeffs(g, n_max: int, n_panels: int = 2048) -> ChebyshevExpansion:
    return ChebyshevExpansion(
        tuple(st_integrate(lambda t, n=n: g(t) * X_eval(n, t), n_panels) for n in range(n_max + 1))
    )


def gram_matrix(n_max: int, n_panels: int = 2048) -> np.ndarray:
    theta = np.linspace(0.0, math.pi, n_panels + 1)
    w = np.ones(n_panels + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    w *= math.pi / n_panels / 3 * st_density(theta)
    X = np.array([X_eval(n, theta) for n in range(n_max + 1)])
    return (X * w) @ X.T


# --- the polynomial Y -----------------------------------------------------

Y_CHEB = {0: Fraction(1, 2) + Fraction(1, 24), 2: Fraction(1, 4), 4: Fraction(-1, 4),
          6: Fraction(136, 1000)}
Y_MONOMIAL = [Fraction(-283, 3000), 0, Fraction(227, 125), 0, Fraction(-93, 100), 0,
              Fraction(17, 125)]
ALPHA0_REFERENCE = "0.23107202470801418176315245050693402580"


def y_expansion() -> ChebyshevExpansion:
    return ChebyshevExpansion(tuple(Y_CHEB.get(n, Fraction(0)) for n in range(7)))


def _root_bisect_exact(coeffs, lo: Fraction, hi: Fraction, bits: int) -> Fraction:
    flo = poly_eval(coeffs, lo)
    for _ in range(bits):
        mid = (lo + hi) / 2
        fm = poly_eval(coeffs, mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def poly_Y_suite(grid_points: int = 10_000, bits: int = 140) -> dict:
    """Exact identity, root, sign pattern and maximum of Y on [-2, 2]."""
    mono = y_expansion().monomials()
    mono += [0] * (len(Y_MONOMIAL) - len(mono))
    if [Fraction(c) for c in mono] != Y_MONOMIAL:
        raise InvariantViolation(f"Y expansion mismatch: {mono}")
    y2 = poly_eval(Y_MONOMIAL, Fraction(2))
    root = _root_bisect_exact(Y_MONOMIAL, Fraction(0), Fraction(1, 2), bits)
    alpha0 = float(root)
    ycoef = np.array([float(c) for c in Y_MONOMIAL])
    xs = np.linspace(-2.0, 2.0, grid_points)
    ys = np.polynomial.polynomial.polyval(xs, ycoef)
    inner = np.abs(xs) <= alpha0
    pos = np.linspace(0.0, 2.0, 200_001)
    ypos = np.polynomial.polynomial.polyval(pos, ycoef)
    return {
        "identity_exact": True,
        "alpha0": alpha0,
        "alpha0_digits": _decimal_digits(root, 40),
        "alpha0_matching_digits": _matching_digits(_decimal_digits(root, 40), ALPHA0_REFERENCE),
        "Y_at_2": y2,
        "max_on_inner": float(ys[inner].max()),
        "max_on_grid": float(ys.max()),
        "nonpositive_on_inner": bool(np.all(ys[inner] <= 0.0)),
        "at_most_one": bool(np.all(ys <= 1.0)),
        "max_on_0_2": float(ypos.max()),
        "argmax_on_0_2": float(pos[ypos.argmax()]),
        "beta0": Y_CHEB[0],
        "beta0_exceeds_half": Y_CHEB[0] > Fraction(1, 2),
    }


def _decimal_digits(q: Fraction, n: int) -> str:
    whole = q.numerator // q.denominator
    frac = (q - whole) * 10**n
    return f"{whole}." + str(frac.numerator // frac.denominator).rjust(n, "0")


def _matching_digits(a: str, b: str) -> int:
    k = 0
    for ca, cb in zip(a.split(".")[1], b.split(".")[1]):
        if ca != cb:
            break
        k += 1
    return k


# --- trigonometric polynomials and the BMV-style pair ---------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """c0 + sum_l cos_l cos(2 pi l x) + sum_l sin_l sin(2 pi l x), l = 1..L."""

    cos: tuple
    sin: tuple = ()

    @property
    def degree(self) -> int:
        nz = [i for i, c in enumerate(self.cos) if c != 0 and i > 0]
        nz += [i + 1 for i, c in enumerate(self.sin) if c != 0]
        return max(nz, default=0)

    @property
    def constant(self):
        return self.cos[0] if self.cos else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, float(self.constant))
        for l in range(1, len(self.cos)):
            if self.cos[l]:
                out = out + float(self.cos[l]) * np.cos(2 * math.pi * l * x)
        for l, c in enumerate(self.sin, start=1):
            if c:
                out = out + float(c) * np.sin(2 * math.pi * l * x)
        return out


def _check_odd(L: int):
    if L < 1 or L % 2 == 0:
        raise ValueError(f"L must be a positive odd integer, got {L}")


def bmv_beta_poly(L: int) -> TrigPolynomial:
    _check_odd(L)
    cos = [Fraction(2, 2 * L + 2)]
    for l in range(1, L + 1):
        cos.append(Fraction(2, 2 * L + 2) * (1 - Fraction(l, L + 1)) * (1 + (-1) ** l))
    return TrigPolynomial(tuple(cos))


def bmv_beta_L(L: int, x):
    return bmv_beta_poly(L)(x)


def bmv_beta_L_st_integral(L: int) -> Fraction:
    """Closed form: only the constant term meets mu_ST (the l = 1 term vanishes)."""
    _check_odd(L)
    return Fraction(1, L + 1)


def vaaler_J(t: float) -> float:
    return math.pi * t * (1 - t) / math.tan(math.pi * t) + t


def default_alpha_L(L: int) -> TrigPolynomial:
    """Average of the Selberg majorant/minorant of the indicator of [0, 1/2].

    Equals 1/2 + V(-x) + V(x - 1/2) with Vaaler's approximation V to the
    sawtooth; only odd sine frequencies survive.
    """
    _check_odd(L)
    sin = []
    for n in range(1, L + 1):
        sin.append(0.0 if n % 2 == 0 else 2 * vaaler_J(n / (L + 1)) / (math.pi * n))
    return TrigPolynomial((Fraction(1, 2),) + (0,) * L, tuple(sin))


def indicator_half(x):
    x = np.asarray(x, dtype=float) % 1.0
    return (x <= 0.5).astype(float)


@dataclass
class MinorantPair:
    a: TrigPolynomial
    b: TrigPolynomial
    L: int
    contract_report: dict = field(default_factory=dict)


def minorant_contract_check(pair: MinorantPair, grid_size: int | None = None) -> dict:
    L = pair.L
    grid_size = grid_size or 64 * (L + 1)
    if grid_size < 4 * (L + 1):
        raise ValueError("grid_size must be >= 4(L+1)")
    x = (np.arange(grid_size) + 0.5) / grid_size
    x = np.concatenate([[0.0, 0.5], x])
    a, b = pair.a(x), pair.b(x)
    chi = indicator_half(x)
    report = {}
    report["degree"] = {"pass": pair.a.degree <= L, "value": pair.a.degree}
    lo, hi = float(a.min()), float(a.max())
    report["range"] = {"pass": lo >= -1e-12 and hi <= 1 + 1e-12, "min": lo, "max": hi,
                       "witness": float(x[a.argmin()] if lo < -1e-12 else x[a.argmax()])}
    report["mean_half"] = {"pass": Fraction(pair.a.constant) == Fraction(1, 2),
                           "value": str(pair.a.constant)}
    width = 1.0 / (10 * L)
    d = np.minimum.reduce([x, np.abs(x - 0.5), 1 - x])
    away = d > width
    gap = np.abs(chi - a) - b
    # near a jump chi may take either value; the weaker of the two one-sided checks applies
    near_gap = np.minimum(np.abs(1 - a), np.abs(a)) - b
    margin = np.where(away, gap, near_gap)
    worst = int(margin.argmax())
    report["envelope"] = {"pass": bool(margin.max() <= 1e-12), "margin": float(-margin.max()),
                          "witness": float(x[worst])}
    report["all_pass"] = all(v["pass"] for v in report.values() if isinstance(v, dict))
    pair.contract_report = report
    return report


def default_pair(L: int) -> MinorantPair:
    pair = MinorantPair(default_alpha_L(L), bmv_beta_poly(L), L)
    if not minorant_contract_check(pair)["all_pass"]:
        raise InvariantViolation(f"default alpha_L candidate fails the contract at L={L}")
    return pair


def product_minorant_eval(pair: MinorantPair, points) -> dict:
    """A - B versus prod chi over tuples of angles in [0, pi]^omega."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xs = pts / math.pi
    av, bv = pair.a(xs), pair.b(xs)
    A = np.prod(av, axis=1)
    B = np.zeros(len(pts))
    for j in range(pts.shape[1]):
        others = np.prod(np.delete(av, j, axis=1), axis=1)
        B += bv[:, j] * others
    chi = np.prod((pts <= math.pi / 2).astype(float), axis=1)
    violations = int(np.sum(A - B > chi + 1e-9))
    return {"A": A, "B": B, "chi": chi, "violations": violations}


def delta_lower(L: int, omega: int, Ia: float) -> float:
    if not 0 <= Ia <= 1:
        raise ValueError("Ia must lie in [0, 1]")
    return Ia ** (omega - 1) * (Ia - omega / (L + 1))


def choose_L(omega: int, eps: float, L0: int = 1) -> int:
    """Smallest odd L >= L0 with L + 1 >= 2 omega / eps."""
    L = max(L0, math.ceil(2 * omega / eps - 1))
    while (L + 1) * eps < 2 * omega:
        L += 1
    return L if L % 2 else L + 1
