"""Dickman rho, the root kappa, and the beta function of a step kernel.

beta solves the homogeneous Volterra equation

    u^2 beta(u) = int_0^u t beta(t) alpha(u - t) dt,   beta(0) = 1,

for a piecewise-constant kernel alpha.  Two independent routes are
provided: a product-integration stepper on a uniform grid, and the
inclusion-exclusion series u beta(u) = u + sum_j (-1)^j I_j(u) / j!.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, InvariantViolation
from .primes import prime_divisors, primes_upto

# --- containers ----------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """Value ``values[i]`` on [breakpoints[i], breakpoints[i+1]); the last value is the tail."""

    breakpoints: tuple
    values: tuple
    cap: int | None = None

    def __post_init__(self):
        b = self.breakpoints
        if len(b) != len(self.values) or not b or b[0] != 0:
            raise ValueError("need breakpoints starting at 0, one value per breakpoint")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), s, side="right") - 1
        out = np.asarray(self.values, dtype=float)[np.clip(idx, 0, None)]
        return out if out.ndim else float(out)

    @property
    def jumps(self) -> list[tuple[float, float]]:
        """(b_k, v_k - v_{k-1}) with v_{-1} = 0."""
        prev = 0.0
        out = []
        for b, v in zip(self.breakpoints, self.values):
            out.append((float(b), float(v) - prev))
            prev = float(v)
        return out

    @property
    def at_zero(self) -> float:
        return float(self.values[0])

    @classmethod
    def constant(cls, v: float) -> StepFunction:
        return cls((0.0,), (float(v),))

    @classmethod
    def remark_alpha(cls, M: int = 8) -> StepFunction:
        """2 on [0, 1/(M+1)), 2 cos(pi/(m+1)) on [1/(m+1), 1/m), -2 on [1, inf)."""
        if M < 1:
            raise ValueError("cap M must be >= 1")
        bps = [0.0] + [1.0 / (m + 1) for m in range(M, 0, -1)] + [1.0]
        vals = [2.0] + [_snap(2 * math.cos(math.pi / (m + 1))) for m in range(M, 0, -1)] + [-2.0]
        return cls(tuple(bps), tuple(vals), cap=M)

    @classmethod
    def unit_drop(cls) -> StepFunction:
        """2 on [0, 1), -2 on [1, inf)."""
        return cls((0.0, 1.0), (2.0, -2.0))


def _snap(v: float) -> float:
    r = round(v)
    return float(r) if abs(v - r) < 1e-14 else v


@dataclass
class GridFunction:
    start: float
    step: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def nodes(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.values.size)

    def __call__(self, u):
        return np.interp(u, self.nodes, self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("u,value\n")
            for u, v in zip(self.nodes.tolist(), self.values.tolist()):
                fh.write(f"{u!r},{v:.17g}\n")


# --- Dickman rho ---------------------------------------------------------

RHO_STEP = 1.0 / 256


@lru_cache(maxsize=32)
def _rho_table(units: int, per_unit: int) -> np.ndarray:
    """rho at t = i / per_unit for 0 <= i <= units * per_unit."""
    K = per_unit
    h = 1.0 / K
    rho = np.empty(units * K + 1)
    rho[: K + 1] = 1.0
    if units >= 2:
        t = 1.0 + h * np.arange(K + 1)
        rho[K : 2 * K + 1] = 1.0 - np.log(t)
    for k in range(2, units):
        t = k + h * np.arange(K + 1)
        f = rho[(k - 1) * K : k * K + 1] / t
        rho[k * K : (k + 1) * K + 1] = rho[k * K] - _cumulative_integral(f, h)
    rho.setflags(write=False)
    return rho


def _cumulative_integral(f: np.ndarray, h: float) -> np.ndarray:
    """int_0^{jh} f for every node j: Simpson on even j, Simpson + 3/8 rule on odd j."""
    n = f.size - 1
    out = np.zeros(n + 1)
    pairs = h / 3 * (f[0:-2:2] + 4 * f[1:-1:2] + f[2::2])
    out[2::2] = np.cumsum(pairs)
    if n >= 1:
        out[1] = h / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3])
    for j in range(3, n + 1, 2):
        out[j] = out[j - 3] + 3 * h / 8 * (f[j - 3] + 3 * f[j - 2] + 3 * f[j - 1] + f[j])
    return out


def _lagrange(xs: np.ndarray, ys: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for i in range(xs.size):
        w = np.ones_like(x)
        for j in range(xs.size):
            if j != i:
                w *= (x - xs[j]) / (xs[i] - xs[j])
        out += ys[i] * w
    return out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def dickman_rho(u: float, h: float = RHO_STEP) -> float:
    """rho(u) for 0 <= u <= 10 by Simpson stepping on a grid of step h."""
    if u < 0:
        raise ValueError("u must be >= 0")
    if u <= 1:
        return 1.0
    if u <= 2:
        return 1.0 - math.log(u)
    if u > 10 + 1e-12:
        raise ValueError("u beyond the tabulated range (10)")
    K = round(1 / h)
    if abs(K * h - 1) > 1e-12 or h > RHO_STEP + 1e-15:
        raise ValueError("h must be 1/K with h <= 1/256")
    table = _rho_table(int(math.ceil(u)) + 1, K)
    j = int(math.floor(u * K + 1e-9))
    t0 = j / K
    if abs(u - t0) < 1e-15:
        return float(table[j])
    # short tail [t0, u]: rho(t - 1) from a local cubic through table nodes on the same unit interval
    k = int(math.floor(t0))
    lo_node = (k - 1) * K
    base = min(max(j - K - 1, lo_node), k * K - 3)
    xs = np.arange(base, base + 4) / K
    ys = table[base : base + 4]
    mid, half = (t0 + u) / 2, (u - t0) / 2
    t = mid + half * _GL_X
    vals = _lagrange(xs, ys, t - 1) / t
    return float(table[j] - half * np.dot(_GL_W, vals))


def rho_grid(u_max: float, h: float = RHO_STEP) -> GridFunction:
    K = round(1 / h)
    units = int(math.ceil(u_max))
    tab = _rho_table(max(units, 2), K)[: int(round(u_max * K)) + 1]
    return GridFunction(0.0, 1.0 / K, np.array(tab), {"function": "dickman_rho", "h": h})


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    residual: float
    iterations: int
    h: float


def kappa_function(u: float, h: float = RHO_STEP) -> float:
    return dickman_rho(2 * u, h) - 2 * math.log(u)


def solve_kappa(tol: float = 1e-12, h: float = RHO_STEP) -> KappaResult:
    """Bisection root of rho(2u) = 2 log u on [1, 3/2]."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    lo, hi = 1.0, 1.5
    flo, fhi = kappa_function(lo, h), kappa_function(hi, h)
    if not flo > 0 > fhi:
        raise InvariantViolation(f"no sign change on [1, 3/2]: {flo}, {fhi}")
    it = 0
    while True:
        mid = (lo + hi) / 2
        fm = kappa_function(mid, h)
        it += 1
        if abs(fm) <= tol and hi - lo < 1e-13 or hi - lo < 4e-16 or it > 200:
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
    kappa = mid
    if not (kappa > 10 / 9 and kappa > (math.e / 2) ** (1 / 3)):
        raise InvariantViolation(f"kappa = {kappa} violates the known lower bounds")
    return KappaResult(kappa, abs(fm), it, h)


# --- the main term of the h_y sum ----------------------------------------

ZETA_TRUNCATION = 1_000_000


@lru_cache(maxsize=1)
def _zeta2_truncated() -> float:
    ps = primes_upto(ZETA_TRUNCATION).astype(float)
    # tail over p > 10^6 changes the product by less than 1e-6 relative
    return float(np.exp(-np.sum(np.log1p(-ps**-2.0))))


def zeta_N2(N: int) -> float:
    """prod_{p not dividing N} (1 - p^-2)^-1, truncated at p <= 10^6."""
    z = _zeta2_truncated()
    for p in prime_divisors(N):
        if p <= ZETA_TRUNCATION:
            z *= 1 - p**-2.0
    return z


def euler_phi_ratio(N: int) -> float:
    return math.prod(1 - 1 / p for p in prime_divisors(N))


def lm_h_main_term(y: float, u: float, N: int = 1, h: float = RHO_STEP) -> float:
    """zeta_N(2)^-1 (phi(N)/N) y^u (rho(2u) - 2 log u)."""
    if not 1 <= u <= 1.5:
        raise ValueError("need 1 <= u <= 3/2")
    if y < N ** (1 / 3):
        raise ValueError("need y >= N^(1/3)")
    return euler_phi_ratio(N) / zeta_N2(N) * y**u * kappa_function(u, h)


# --- beta: product-integration stepper -----------------------------------


def _panel_weights(t0: float, s: float, h: float) -> tuple[float, float]:
    """int_{t0}^{t0+s} t * (left hat, right hat) dt for the linear interpolant on [t0, t0+h]."""
    c1 = t0 * s * s / (2 * h) + s**3 / (3 * h)
    c0 = t0 * s + s * s / 2 - c1
    return c0, c1


def beta_volterra(alpha: StepFunction, u_max: float, h: float = 5e-4) -> GridFunction:
    """Solve u^2 beta = int_0^u t beta(t) alpha(u - t) dt on the grid t_n = n h.

    beta is taken piecewise linear in t; the convolution is split exactly at
    every kernel breakpoint by writing it as sum_k jump_k * G(u - b_k) with
    G(x) = int_0^x t beta(t) dt, so each step is one linear equation in beta_n.
    """
    if max(abs(v) for v in alpha.values) > 2 + 1e-12:
        raise ValueError("kernel must be bounded by 2")
    n = int(math.ceil(u_max / h - 1e-9))
    jumps = [(b, d) for b, d in alpha.jumps if d != 0.0]
    beta = [1.0] * (n + 1)
    G = [0.0] * (n + 1)
    # before the first breakpoint the kernel is the constant 2 and beta = 1 exactly
    flat = alpha.breakpoints[1] if alpha.at_zero == 2.0 and len(alpha.breakpoints) > 1 else 0.0
    for m in range(1, n + 1):
        u = m * h
        if u <= flat or (alpha.at_zero == 2.0 and len(alpha.breakpoints) == 1):
            G[m] = u * u / 2
            continue
        rhs = 0.0
        coef = u * u
        for b, d in jumps:
            x = u - b
            if x <= 0:
                continue
            i = min(int(x / h), m - 1)
            s = x - i * h
            if i == m - 1:
                c0, c1 = _panel_weights(i * h, s, h)
                rhs += d * (G[i] + c0 * beta[i])
                coef -= d * c1
            else:
                if s > h:
                    i, s = i + 1, s - h
                c0, c1 = _panel_weights(i * h, s, h)
                rhs += d * (G[i] + c0 * beta[i] + c1 * beta[i + 1])
        if abs(coef) < 1e-300:
            raise InvariantViolation(f"vanishing step coefficient at u={u}, h={h}")
        beta[m] = rhs / coef
        c0, c1 = _panel_weights((m - 1) * h, h, h)
        G[m] = G[m - 1] + c0 * beta[m - 1] + c1 * beta[m]
    return GridFunction(0.0, h, np.array(beta),
                        {"function": "beta", "method": "volterra", "cap": alpha.cap, "h": h})


def volterra_residual(beta: GridFunction, alpha: StepFunction, us) -> np.ndarray:
    """u^2 beta(u) - int_0^u t beta(t) alpha(u-t) dt by adaptive quadrature of the interpolant."""
    from scipy.integrate import quad

    out = []
    for u in np.atleast_1d(us):
        cuts = sorted({0.0, float(u)} | {float(u - b) for b in alpha.breakpoints if 0 < u - b < u})
        total = 0.0
        for a, b in zip(cuts, cuts[1:]):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                val, _ = quad(lambda t: t * float(beta(t)) * alpha(u - t), a, b,
                              limit=400, epsabs=1e-13, epsrel=1e-12)
            total += val
        out.append(u * u * float(beta(u)) - total)
    return np.array(out)


# --- beta: inclusion-exclusion series ------------------------------------


@dataclass(frozen=True)
class SimplexSeriesTerm:
    j: int
    grid: np.ndarray
    values: np.ndarray


def _simpson(f: np.ndarray, a: float, b: float) -> float:
    n = f.size - 1
    return (b - a) / n / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())


def _conv_at(x: float, alpha: StepFunction, grid: np.ndarray, prev: np.ndarray, g: float) -> float:
    """int_0^x (2 - alpha(s))/s * prev(x - s) ds, split at the kernel breakpoints."""
    bps = list(alpha.breakpoints) + [math.inf]
    total = 0.0
    for k, v in enumerate(alpha.values):
        a, b = bps[k], min(bps[k + 1], x)
        if b <= a or v == 2.0:
            continue
        n = max(2, 2 * int(math.ceil((b - a) / g / 2)))
        s = np.linspace(a, b, n + 1)
        f = (2.0 - v) / s * np.interp(x - s, grid, prev)
        total += _simpson(f, a, b)
    return total


def simplex_terms(alpha: StepFunction, u_max: float, j_max: int, g: float = 1e-3):
    """I_0..I_{j_max} on a grid of step about g, via I_j(u) = int_0^u (2-alpha(s))/s I_{j-1}(u-s) ds."""
    if alpha.at_zero != 2.0:
        raise ValueError("kernel must equal 2 near 0 for (2 - alpha(s))/s to be integrable")
    n = int(math.ceil(u_max / g))
    grid = np.linspace(0.0, u_max, n + 1)
    step = u_max / n
    terms = [SimplexSeriesTerm(0, grid, grid.copy())]
    for j in range(1, j_max + 1):
        prev = terms[-1].values
        vals = np.array([_conv_at(x, alpha, grid, prev, step) for x in grid])
        terms.append(SimplexSeriesTerm(j, grid, vals))
    return terms


def beta_series_many(alpha: StepFunction, us, j_max: int = 8, g: float = 1e-3) -> np.ndarray:
    us = np.atleast_1d(np.asarray(us, dtype=float))
    if j_max > 12 or us.max() > 3:
        raise ValueError("series evaluation needs j_max <= 12 and u <= 3")
    if j_max == 0:
        return np.ones_like(us)
    terms = simplex_terms(alpha, float(us.max()), j_max - 1, g)
    out = []
    for u in us:
        if u == 0:
            out.append(1.0)
            continue
        acc = u
        for t in terms[1:]:
            acc += (-1) ** t.j / math.factorial(t.j) * float(np.interp(u, t.grid, t.values))
        last = _conv_at(u, alpha, terms[-1].grid, terms[-1].values, terms[-1].grid[1])
        acc += (-1) ** j_max / math.factorial(j_max) * last
        out.append(acc / u)
    return np.array(out)


def beta_series(alpha: StepFunction, u: float, j_max: int = 8, g: float = 1e-3) -> float:
    return float(beta_series_many(alpha, [u], j_max, g)[0])


def series_decay_flags(alpha: StepFunction, u: float, j_max: int = 8, g: float = 1e-3) -> list[float]:
    """|I_j(u)|/j! for j = 0..j_max (callers check the tail is decreasing)."""
    terms = simplex_terms(alpha, u, j_max, g)
    return [abs(float(np.interp(u, t.grid, t.values))) / math.factorial(t.j) for t in terms]


# --- first zero of beta --------------------------------------------------


def _first_root(beta: GridFunction, lo: float) -> float | None:
    u = beta.nodes
    v = beta.values
    idx = np.flatnonzero((v[1:] <= 0) & (v[:-1] > 0) & (u[1:] > lo))
    if idx.size == 0:
        return None
    i = int(idx[0])
    # exact root of the linear interpolant on [u_i, u_{i+1}]
    a, b = u[i], u[i + 1]
    fa = v[i]
    for _ in range(200):
        mid = (a + b) / 2
        fm = float(beta(mid))
        if fm > 0:
            a = mid
        else:
            b = mid
        if b - a < 1e-15:
            break
    return float((a + b) / 2) if fa > 0 else None


@dataclass(frozen=True)
class ZeroReport:
    u0: float | None
    error_bar: float | None
    runs: dict
    beta_min: float | None = None


def beta_first_zero(alpha: StepFunction, h: float = 5e-4, bracket=(0.0, 2.5)) -> ZeroReport:
    """First zero of beta on the bracket, with the spread of the h/2 and cap+4 re-runs as error bar."""
    lo, hi = bracket
    base = beta_volterra(alpha, hi, h)
    u0 = _first_root(base, lo)
    if u0 is None:
        return ZeroReport(None, None, {"h": None}, float(base.values.min()))
    runs = {"base": u0, "half_h": _first_root(beta_volterra(alpha, hi, h / 2), lo)}
    if alpha.cap is not None:
        runs["cap_plus_4"] = _first_root(
            beta_volterra(StepFunction.remark_alpha(alpha.cap + 4), hi, h), lo)
    spread = sum(abs(v - u0) for k, v in runs.items() if k != "base" and v is not None)
    return ZeroReport(u0, spread, runs, float(base.values.min()))


# --- empirical sums of the multiplicative function h(p) = alpha(log p / log y) ---

ALPHA_SUM_BUDGET = 30_000_000


def _alpha_h_segments(y: float, alpha: StepFunction, X: int, segment: int = 1 << 21):
    """Yield (start, h-values) blocks covering 1..X for the squarefree-supported h."""
    if X >= y * y:
        raise ValueError("need y^u < y^2 so that at most one prime factor exceeds y")
    logy = math.log(y)
    ps = primes_upto(int(math.floor(y)))
    hp = alpha(np.log(ps.astype(float)) / logy)
    plist, hlist = ps.tolist(), hp.tolist()
    lo = 1
    while lo <= X:
        hi = min(lo + segment, X + 1)
        size = hi - lo
        h = np.ones(size)
        rem = np.arange(lo, hi, dtype=np.int64)
        for p, v in zip(plist, hlist):
            st = (-lo) % p
            if st >= size:
                continue
            if v != 1.0:
                h[st::p] *= v
            rem[st::p] //= p
            p2 = p * p
            if p2 < hi:
                h[(-lo) % p2 :: p2] = 0.0
        big = rem > 1
        if big.any():
            h[big] *= alpha(np.log(rem[big].astype(float)) / logy)
        yield lo, h
        lo = hi


def empirical_alpha_h_sum(y: float, u: float, alpha: StepFunction,
                          budget: int = ALPHA_SUM_BUDGET) -> float:
    """sum_{n <= y^u} h(n), h supported on squarefree n with h(p) = alpha(log p / log y)."""
    X = int(math.floor(y**u + 1e-9))
    if X > budget:
        raise BudgetExceeded(f"y^u = {X} exceeds budget {budget}")
    total = 0.0
    for _, h in _alpha_h_segments(y, alpha, X):
        total += float(np.sum(h))
    return total


@dataclass(frozen=True)
class SignChange:
    y: float
    n: int | None
    u: float | None
    scanned_to: int


def empirical_sign_change(y: float, alpha: StepFunction, u_max: float = 1.9,
                          budget: int = ALPHA_SUM_BUDGET) -> SignChange:
    """Least n with sum_{m <= n} h(m) < 0, reported as u = log n / log y."""
    X = min(int(math.floor(y**u_max)), budget)
    total = 0.0
    for lo, h in _alpha_h_segments(y, alpha, X):
        c = total + np.cumsum(h)
        neg = np.flatnonzero(c < 0)
        if neg.size:
            n = lo + int(neg[0])
            return SignChange(y, n, math.log(n) / math.log(y), n)
        total = float(c[-1])
    return SignChange(y, None, None, X)
