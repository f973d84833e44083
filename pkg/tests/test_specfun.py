import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckesigns import specfun as sf
from heckesigns.primes import primes_upto
from heckesigns.signs import count_squarefree_products
from oracles import rho_double_integral, rho_quad

ALPHA8 = sf.StepFunction.remark_alpha(8)


def test_rho_closed_form_region():
    assert sf.dickman_rho(0.5) == 1.0
    assert sf.dickman_rho(1) == 1.0
    assert sf.dickman_rho(2) == pytest.approx(1 - math.log(2), abs=1e-15)


def test_rho_three_matches_double_integral():
    assert abs(sf.dickman_rho(3) - rho_double_integral(3)) < 1e-8


@given(st.floats(2.0, 5.0))
@settings(max_examples=30, deadline=None)
def test_rho_matches_quadrature_oracle(u):
    assert abs(sf.dickman_rho(u) - rho_quad(u)) < 1e-9


def test_rho_grid_refinement_and_shape():
    us = np.linspace(0, 5, 81)
    a = np.array([sf.dickman_rho(u) for u in us])
    b = np.array([sf.dickman_rho(u, 1 / 512) for u in us])
    assert np.max(np.abs(a - b)) < 1e-9
    assert np.all(a > 0) and np.all(np.diff(a) <= 1e-15) and a.max() <= 1


def test_rho_rejects_bad_input():
    with pytest.raises(ValueError):
        sf.dickman_rho(-0.1)
    with pytest.raises(ValueError):
        sf.dickman_rho(3, 1 / 100)


def test_kappa_bounds():
    k = sf.solve_kappa(1e-10)
    assert k.residual <= 1e-10
    assert k.kappa > 10 / 9 and k.kappa > (math.e / 2) ** (1 / 3) > 11 / 10
    assert 1 / (2 * k.kappa) < 9 / 20


def test_main_term_sign_below_kappa():
    assert sf.kappa_function(1.1) > 0
    y = 1e6
    assert sf.lm_h_main_term(y, 1, 1) == pytest.approx(6 / math.pi**2 * y * (1 - math.log(2)), rel=1e-6)
    with pytest.raises(ValueError):
        sf.lm_h_main_term(100, 1.6)


def test_step_function_remark_alpha():
    a = ALPHA8
    assert a(0.05) == 2.0 and a(0.75) == 0.0 and a(1.0) == -2.0 and a(0.4) == pytest.approx(1.0)
    vals = list(a.values[:-1])
    assert all(-2 < v <= 2 for v in vals) and vals == sorted(vals, reverse=True)
    with pytest.raises(ValueError):
        sf.StepFunction((0.0, 0.5, 0.5), (1.0, 1.0, 1.0))


def test_beta_constant_kernel_is_one():
    g = sf.beta_volterra(sf.StepFunction.constant(2.0), 2.0, 1e-3)
    assert np.max(np.abs(g.values - 1)) < 1e-12
    assert sf.beta_series(sf.StepFunction.constant(2.0), 1.5, 6) == pytest.approx(1.0)


def test_beta_is_one_below_first_breakpoint():
    g = sf.beta_volterra(ALPHA8, 0.5, 1e-3)
    head = g.values[g.nodes <= 1 / 9]
    assert np.all(head == 1.0)


def test_unit_drop_closed_form():
    # on [1, 2] differentiating the equation gives u^2 beta' = -4 (u - 1), so beta = 5 - 4 log u - 4/u
    g = sf.beta_volterra(sf.StepFunction.unit_drop(), 2.0, 5e-4)
    us = np.linspace(1, 2, 11)
    assert np.max(np.abs(g(us) - (5 - 4 * np.log(us) - 4 / us))) < 1e-6
    s = sf.beta_series_many(sf.StepFunction.unit_drop(), us[1:], 3)
    assert np.max(np.abs(s - (5 - 4 * np.log(us[1:]) - 4 / us[1:]))) < 1e-6


def test_unit_drop_zero_by_both_methods():
    z = sf.beta_first_zero(sf.StepFunction.unit_drop(), 5e-4, (0.0, 3.0))
    assert z.u0 is not None and 2 < z.u0 < 3
    assert abs(sf.beta_series(sf.StepFunction.unit_drop(), z.u0, 6)) < 1e-4


def test_series_trivial_cases():
    assert sf.beta_series(ALPHA8, 0.9, 0) == 1.0
    with pytest.raises(ValueError):
        sf.beta_series(sf.StepFunction.unit_drop().__class__((0.0, 1.0), (1.0, -2.0)), 0.5)


def test_volterra_vs_series_at_half():
    v = sf.beta_volterra(ALPHA8, 0.5, 5e-4)(0.5)
    assert abs(v - sf.beta_series(ALPHA8, 0.5, 8)) < 1e-6


def test_volterra_residual_small():
    g = sf.beta_volterra(ALPHA8, 1.5, 5e-4)
    us = np.linspace(0.1, 1.5, 8)
    r = sf.volterra_residual(g, ALPHA8, us)
    assert np.all(np.abs(r) < 1e-6 * (1 + us**2))


def test_series_terms_decay():
    d = sf.series_decay_flags(ALPHA8, 1.2, 8)
    assert all(b <= a for a, b in zip(d[2:], d[3:]))


def test_first_zero_positivity_before_zero():
    z = sf.beta_first_zero(ALPHA8, 1e-3, (0.0, 2.0))
    g = sf.beta_volterra(ALPHA8, z.u0, 1e-3)
    assert np.all(g.values[g.nodes < z.u0 - 1e-3] > 0)
    assert abs(z.runs["cap_plus_4"] - z.u0) <= z.error_bar


def test_no_zero_reports_minimum():
    z = sf.beta_first_zero(sf.StepFunction.constant(2.0), 1e-2, (0.0, 1.0))
    assert z.u0 is None and z.beta_min == pytest.approx(1.0)


def test_grid_csv_dump(tmp_path):
    g = sf.rho_grid(2.0, 1 / 256)
    g.to_csv(tmp_path / "rho.csv")
    lines = (tmp_path / "rho.csv").read_text().splitlines()
    assert lines[0] == "u,value" and len(lines) == 513 + 1
    assert float(lines[-1].split(",")[1]) == g.values[-1]


def test_empirical_sum_small_u_is_positive():
    assert sf.empirical_alpha_h_sum(1000, 0.09, ALPHA8) >= 1


def test_empirical_smooth_variant_matches_count():
    # alpha = 1 below 1/2 and 0 beyond: h counts squarefree sqrt(y)-smooth n
    alpha = sf.StepFunction((0.0, 0.5), (1.0, 0.0))
    y, u = 1000, 1.4
    small = [p for p in primes_upto(31).tolist()]
    expected = count_squarefree_products(small, int(y**u))
    assert sf.empirical_alpha_h_sum(y, u, alpha) == expected


def test_empirical_sum_against_direct_definition():
    y, u = 200, 1.3
    X = int(y**u)
    direct = 0.0
    for n in range(1, X + 1):
        m, v, p = n, 1.0, 2
        while m > 1:
            if m % p == 0:
                m //= p
                if m % p == 0:
                    v = 0.0
                    break
                v *= float(ALPHA8(math.log(p) / math.log(y)))
            p += 1
        direct += v
    assert sf.empirical_alpha_h_sum(y, u, ALPHA8) == pytest.approx(direct, abs=1e-9)


def test_empirical_budget():
    with pytest.raises(sf.BudgetExceeded):
        sf.empirical_alpha_h_sum(1e4, 1.9, ALPHA8, budget=10**6)
