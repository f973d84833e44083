import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckesigns.errors import BudgetExceeded
from heckesigns.forms import FormSpec, build_table, level1_newform, synthetic_table, theta_angles
from heckesigns.signs import (count_squarefree_products, counterexample_moments,
                              first_negative, first_sign_difference, h_sum, h_sum_direct,
                              sign_agreement, sign_sequence, st_histogram, sum_S,
                              verify_lower_bound_mechanics)
from oracles import h_brute, primes_naive


def test_first_negative_fixtures():
    cm = first_negative(build_table(FormSpec.curve(1, 0), 100, 100))
    assert (cm.n_f, cm.prime) == (9, 13)
    d = first_negative(level1_newform(12, 100))
    assert (d.n_f, d.prime) == (2, 2)
    e4 = build_table(FormSpec.e4(), 1000, 1000)
    assert first_negative(e4).n_f is None


def test_first_negative_skips_excluded_n():
    t = synthetic_table("neg5", lambda p: -1.0 if p == 5 else 1.0, 50, 50)
    assert first_negative(t).n_f == 5


def test_agreement_self_and_negation():
    d = level1_newform(12, 2000)
    assert sign_agreement(d, d, 2000).density == 1.0
    seq = sign_sequence(d)
    neg = sign_agreement(seq, seq.negated(), 2000)
    assert neg.density == pytest.approx(np.mean(seq.signs == 0))


def test_zero_agrees_with_both_signs():
    cm = build_table(FormSpec.curve(1, 0), 1000, 1000)
    d = level1_newform(12, 1000)
    a = sign_agreement(cm, d, 1000)
    assert a.density >= 0.5


def test_first_sign_difference():
    d = level1_newform(12, 200)
    e4 = build_table(FormSpec.e4(), 200, 200)
    assert first_sign_difference(d, e4).n == 2
    assert first_sign_difference(d, d).n is None


@given(st.integers(4, 300), st.floats(1.0, 1.5))
@settings(max_examples=60, deadline=None)
def test_h_sum_split_matches_brute_force(y, u):
    X = int(math.floor(y**u + 1e-9))
    assert h_sum(y, u).value == sum(h_brute(y, X))


@given(st.integers(10, 200), st.floats(1.0, 1.5), st.sampled_from([1, 6, 35, 77]))
@settings(max_examples=40, deadline=None)
def test_h_sum_split_matches_sieve_with_level(y, u, N):
    assert h_sum(y, u, N).value == h_sum_direct(y, u, N)


def test_h_sum_preconditions():
    with pytest.raises(ValueError):
        h_sum(100, 1.6)
    with pytest.raises(BudgetExceeded):
        h_sum(10**6, 1.5, budget=10**6)


def test_h_sum_small_fixture():
    # h_100 on n <= 100: 1-smooth part over {2,3,5,7} minus large-prime terms
    assert h_sum(100, 1).value == 14


def test_squarefree_product_count():
    ps = primes_naive(10)
    brute = sum(1 for n in range(1, 101)
                if all(n % (p * p) for p in range(2, 11)) and all(q in ps for q in _pf(n)))
    assert count_squarefree_products(ps, 100) == brute


def _pf(n):
    out, p = [], 2
    while n > 1:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    return out


def test_lower_bound_mechanics_on_e4():
    t = build_table(FormSpec.e4(), 2000, 2000)
    r = verify_lower_bound_mechanics(t, 50, 1.2)
    assert r.applicable and r.passed and r.g_margin >= 0
    d = level1_newform(12, 2000)
    assert not verify_lower_bound_mechanics(d, 50, 1.2).applicable


def test_sum_S_counts_squarefree():
    t = build_table(FormSpec.e4(), 100, 100)
    assert sum_S(t, 1) == 1.0


def test_sato_tate_histogram_for_delta():
    d = level1_newform(12, 20000)
    h = st_histogram(theta_angles(d), 20000, bins=10)
    assert h.counts.sum() == h.n
    assert h.discrepancy < 0.05


def test_counterexample_moments_small():
    m = counterexample_moments(10**4)
    assert abs(m["x"][2]) < 0.05 and abs(m["raw6_x"] - 4) < 0.1
    assert m["max_abs_xy"] == 0.0
