import json

from heckesigns.cli import main


def test_kappa_prints_value(capsys):
    assert main(["kappa", "--tol", "1e-10"]) == 0
    rec = json.loads(capsys.readouterr().out)["records"][0]
    assert 1.111 < rec["kappa"] < 1.112 and rec["residual"] <= 1e-10


def test_unknown_flag_is_usage_error(capsys):
    assert main(["kappa", "--nope"]) == 2
    assert "usage" in capsys.readouterr().err


def test_bad_form_is_usage_error():
    assert main(["coeffs", "--form", "ec:-3,2"]) == 2


def test_mod2_without_torsion_is_usage_error():
    assert main(["exp", "mod2", "--torsion", "0"]) == 2


def test_invariant_violation_exit_code(monkeypatch):
    from heckesigns import lab
    from heckesigns.errors import InvariantViolation

    def boom(*a, **k):
        raise InvariantViolation("odd trace")

    monkeypatch.setattr(lab, "exp_mod2", boom)
    assert main(["exp", "mod2", "--torsion", "2"]) == 1


def test_selftest_green(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_config_file_and_csv(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p_max = 50\nform = ec:1,0\n")
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--config", str(cfg), "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,a_p,lambda_p" and lines[5].startswith("13,-6,")
    cfg.write_text("bogus_key = 1\n")
    assert main(["coeffs", "--config", str(cfg)]) == 2


def test_pair_signs_outputs_json(tmp_path, capsys):
    assert main(["exp", "pair-signs", "--x", "20000", "--cache-dir", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["experiment"] == "pair-signs" and 0.42 <= rep["records"][0]["agreement"] <= 0.58


def test_output_independent_of_threads(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["exp", "first-negative", "--A", "3", "--B", "3", "--p-max", "300", "--n-max", "300"]
    assert main(args + ["--threads", "1", "--out", str(a)]) == 0
    assert main(args + ["--threads", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_beta_zero_command(capsys):
    assert main(["beta", "--zero", "--h", "2e-3", "--u-max", "1.6"]) == 0
    rec = json.loads(capsys.readouterr().out)["records"][0]
    assert 1.3 < rec["u0"] < 1.4
