import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckesigns.errors import InvariantViolation
from heckesigns.forms import (FormSpec, build_table, build_table_cached, divisor_counts,
                              dump_prime_coeffs, ec_ap, ec_ap_batch, level1_newform,
                              load_prime_coeffs, synthetic_table, theta_angles,
                              two_torsion_short_form)
from heckesigns.primes import primes_upto
from oracles import curve_points_ap

odd_primes = st.sampled_from(primes_upto(200).tolist()[1:])


@given(st.integers(-30, 30), st.integers(-30, 30), odd_primes)
@settings(max_examples=150, deadline=None)
def test_ec_ap_matches_point_count(a4, a6, p):
    assert ec_ap(a4, a6, p) == curve_points_ap(lambda x: x**3 + a4 * x + a6, p)
    assert ec_ap_batch([a4], [a6], p)[0] == ec_ap(a4, a6, p)


@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8), odd_primes)
@settings(max_examples=100, deadline=None)
def test_two_torsion_short_form_preserves_traces(a, b, c, p):
    if len({a, b, c}) < 3 or (a - b) * (b - c) * (a - c) % p == 0 or p == 3:
        return
    a4, a6 = two_torsion_short_form(a, b, c)
    assert ec_ap(a4, a6, p) == curve_points_ap(lambda x: (x - a) * (x - b) * (x - c), p)


def test_torsion_example_short_form():
    assert two_torsion_short_form(0, 1, 2) == (-1, 0)


def test_cm_curve_fixture():
    t = build_table(FormSpec.curve(1, 0), 200, 200)
    assert t.prime_coeffs[13] == -6
    assert round(t.lam[9] * 3) == -3
    assert t.spec.excluded_primes == frozenset({2})
    assert all(t.prime_coeffs[p] == 0 for p in t.primes.tolist() if p % 4 == 3)


def test_hecke_relations_and_deligne():
    t = level1_newform(12, 5000)
    lam = t.lam
    for m, n in [(2, 3), (5, 7), (4, 9), (11, 13)]:
        assert abs(lam[m * n] - lam[m] * lam[n]) < 1e-12
    for p in (2, 3, 5, 7):
        assert abs(lam[p * p] - (lam[p] ** 2 - 1)) < 1e-12
    tau = divisor_counts(5000)
    assert np.all(np.abs(lam[1:]) <= tau[1:] + 1e-9)


def test_e4_is_exempt_from_deligne():
    t = build_table(FormSpec.e4(), 100, 100)
    assert t.prime_coeffs[2] == 9
    with pytest.raises(InvariantViolation):
        theta_angles(t)


def test_singular_curve_rejected():
    with pytest.raises(ValueError):
        FormSpec.curve(-3, 2)


def test_synthetic_table_recurrence():
    t = synthetic_table("flip", lambda p: 1.0 if p % 3 == 1 else -1.0, 100, 100)
    assert t.lam[4] == pytest.approx(t.lam[2] ** 2 - 1)
    assert t.lam[15] == pytest.approx(t.lam[3] * t.lam[5])


def test_cache_roundtrip(tmp_path):
    spec = FormSpec.curve(-1, 1)
    fresh = build_table(spec, 3000, 3000)
    cached = build_table_cached(spec, 3000, 3000, tmp_path)
    again = build_table_cached(spec, 2000, 2000, tmp_path)
    assert cached.prime_coeffs == fresh.prime_coeffs
    assert all(again.prime_coeffs[p] == fresh.prime_coeffs[p] for p in again.prime_coeffs)
    meta, coeffs = load_prime_coeffs(tmp_path / "ec_-1_1.csv")
    assert meta["schema"] == "coeffs-v1" and int(meta["p_max"]) == 3000
    assert coeffs == fresh.prime_coeffs


def test_cache_header_rejects_foreign_schema(tmp_path):
    path = tmp_path / "x.csv"
    dump_prime_coeffs(FormSpec.delta(), {2: -24}, 2, path)
    path.write_text(path.read_text().replace("coeffs-v1", "coeffs-v0"))
    with pytest.raises(ValueError):
        load_prime_coeffs(path)


def test_hasse_bound_over_box():
    for a4 in range(-3, 4):
        for a6 in range(-3, 4):
            if 4 * a4**3 + 27 * a6**2 == 0:
                continue
            for p in primes_upto(500).tolist()[1:]:
                assert abs(ec_ap(a4, a6, p)) <= 2 * math.sqrt(p)
