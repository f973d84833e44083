import json

import pytest

from heckesigns import lab
from heckesigns.errors import InvariantViolation
from heckesigns.forms import FormSpec, build_table, level1_newform
from oracles import curve_points_ap


def test_empty_and_small_boxes():
    with pytest.raises(ValueError):
        lab.family_generate(lab.FamilyConfig(A=0, B=0))
    fam = lab.family_generate(lab.FamilyConfig(A=1, B=1))
    pairs = [(s.a4, s.a6) for s in fam]
    expected = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if 4 * a**3 + 27 * b**2 != 0]
    assert pairs == expected and len(pairs) == 8


def test_torsion_family_contains_example():
    fam = lab.family_generate(lab.FamilyConfig(torsion=2))
    assert fam[0].label == "ec_-1_0" or any(s.label == "ec_-1_0" for s in fam)
    assert len({(s.a4, s.a6) for s in fam}) == len(fam)


def test_sampling_is_seeded():
    cfg = lab.FamilyConfig(A=10, B=10, sample=30, seed=7)
    a = [s.label for s in lab.family_generate(cfg)]
    b = [s.label for s in lab.family_generate(cfg)]
    assert a == b and len(a) == 30


@pytest.mark.parametrize("p", [5, 7])
def test_mod2_point_counts(p):
    ap = curve_points_ap(lambda x: x * (x - 1) * (x - 2), p)
    assert ap % 2 == 0


def test_mod2_experiment():
    fam = lab.family_generate(lab.FamilyConfig(torsion=3))
    r = lab.exp_mod2(fam, 500)
    assert r.aggregate["violations"] == 0 and r.verdicts["all_even"]


def test_mod2_raises_on_odd_trace():
    with pytest.raises(InvariantViolation):
        lab.exp_mod2([FormSpec.curve(1, 1)], 100)


def test_first_negative_experiment_delta():
    r = lab.exp_first_negative([FormSpec.delta()], 100, 100)
    assert r.records[0]["n_f"] == 2 and r.aggregate["median_n_f"] >= 2


def test_tail_fractions_decrease():
    fam = lab.family_generate(lab.FamilyConfig(A=4, B=4))
    tails = lab.exp_first_negative(fam, 500, 500).aggregate["tail_fraction_beyond_C_log_Q"]
    vals = [tails[k] for k in ("1", "2", "4", "8")]
    assert vals == sorted(vals, reverse=True)


def test_prescribed_signs_empty_condition():
    fam = lab.family_generate(lab.FamilyConfig(A=3, B=3))
    r = lab.exp_prescribed_signs(fam, 1.5)
    assert r.aggregate["relaxed_fraction"] == 1.0


def test_prescribed_signs_small_z():
    fam = lab.family_generate(lab.FamilyConfig(A=30, B=30))
    r = lab.exp_prescribed_signs(fam, 3)
    agg = r.aggregate
    assert agg["universally_bad"] == [2] and agg["condition_primes"] == [3]
    assert agg["relaxed_fraction"] >= agg["strict_fraction"]
    flipped = lab.exp_prescribed_signs(fam, 3, {2: 1, 3: -1}).aggregate
    assert abs(flipped["relaxed_fraction"] - agg["relaxed_fraction"]) < 0.15


def test_pair_signs_cm_annotation():
    tables = [build_table(FormSpec.curve(1, 0), 3000, 10), level1_newform(12, 3000)]
    r = lab.exp_pair_signs(tables, 3000)
    rec = r.records[0]
    assert rec["cm"] == [True, False] and rec["agreement"] >= 0.5


def test_moment_sums_single_form_square():
    t = level1_newform(12, 400)
    r = lab.exp_moment_sums([t], 100, nu=1, j=1)
    assert r.aggregate["moment"] == pytest.approx(r.records[0]["inner"] ** 2)


def test_moment_sums_decrease_with_P():
    fam = lab.family_generate(lab.FamilyConfig(A=3, B=3))
    tables = lab.family_tables(fam, 4000, 2)
    m1 = lab.exp_moment_sums(tables, 500).aggregate["moment"]
    m2 = lab.exp_moment_sums(tables, 1000).aggregate["moment"]
    assert m2 < m1


def test_reports_identical_across_threads():
    fam = lab.family_generate(lab.FamilyConfig(A=6, B=6))
    a = lab.exp_prescribed_signs(fam, 13, threads=1)
    b = lab.exp_prescribed_signs(fam, 13, threads=4)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    assert "wall_clock" not in json.loads(a.to_json())


def test_load_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\np-max = 500\ntol = 1e-10\nname = x  # trailing\nzero = true\n")
    assert lab.load_config(p) == {"p_max": 500, "tol": 1e-10, "name": "x", "zero": True}
    p.write_text("nonsense\n")
    with pytest.raises(ValueError):
        lab.load_config(p)
