import hashlib
import json
import subprocess
import sys

import pytest

from nlbench import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_lattice_discriminants(capsys):
    code, out, _ = run(capsys, "lattice", "--tensor-g", "2", "--disc")
    assert code == 0 and out.splitlines()[-1] == "(Z/1)^0 (trivial)"
    code, out, _ = run(capsys, "lattice", "--tensor-g", "2", "--rescale", "3", "--disc")
    assert code == 0 and out.splitlines()[-1] == "(Z/3)^8"


def test_lattice_e8_theta(capsys):
    code, out, _ = run(capsys, "lattice", "--file", "e8.json", "--theta", "--prec", "3")
    assert code == 0
    assert "theta: 1,240,2160" in out.splitlines()


def test_lattice_file_on_disk(capsys, tmp_path):
    path = tmp_path / "a2.json"
    path.write_text(json.dumps({"gram": [[2, 1], [1, 2]]}))
    code, out, _ = run(capsys, "lattice", "--file", str(path), "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["discriminant_group"] == "(Z/3)^1" and doc["level"] == 3


def test_usage_and_domain_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "lattice", "--file", str(bad))[0] == 2
    assert run(capsys, "lattice", "--file", "missing.json")[0] == 2
    assert run(capsys, "lattice", "--gram", "[[1, 1], [1, 1]]")[0] == 3
    assert run(capsys, "theta", "--gram", "[[0, 1], [1, 0]]")[0] == 3
    assert run(capsys, "padic-verify", "--prime", "5", "--level", "6")[0] == 3
    assert run(capsys, "star-check")[0] == 2
    assert run(capsys, "period", "--tol-abs", "-1")[0] == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == 2
    capsys.readouterr()


def test_padic_example(capsys):
    code, out, _ = run(capsys, "padic-verify", "--prime", "5", "--level", "5", "--probe-depth", "5")
    assert code == 0
    assert "intertwining value: 1/5 (shell sum 1/5)" in out
    assert "SW identity: pass" in out
    assert "support of Weil translate: K0" in out


def test_star_examples(capsys):
    code, out, _ = run(capsys, "star-check", "--range", "1000")
    assert code == 0 and "0 failures up to 1000" in out
    code, out, _ = run(capsys, "star-check", "--n", "12")
    assert out.splitlines()[-1] == "N=12 not satisfied"


def test_period_examples(capsys):
    code, out, _ = run(capsys, "period", "--g", "1", "--identity-isogeny", "--format", "json")
    assert code == 0 and json.loads(out)["residual"] < 1e-9
    code, out, _ = run(capsys, "period", "--g", "2", "--samples", "20", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "sample,degree,rel_residual,consistent" and len(lines) == 21


def test_isogeny_commands(capsys):
    code, out, _ = run(capsys, "isogeny", "census", "--g", "1", "--d", "3", "--N", "2",
                       "--height", "2", "--depth", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["members"] == sum(c["size"] for c in doc["classes"])
    code, out, _ = run(capsys, "isogeny", "reduce", "--matrix", "[[1, 1], [0, 0], [1, 3], [0, 0]]")
    assert code == 0 and "divisor pair:" in out
    code, _, err = run(capsys, "isogeny", "reduce", "--matrix", "[[1, 0], [0, 1], [0, 2], [0, 0]]")
    assert code == 3 and "OutsideCandidateForm" in err


def test_theta_command(capsys):
    code, out, _ = run(capsys, "theta", "--gram", "[[2, 1], [1, 2]]", "--coset", '["1/3", "1/3"]',
                       "--prec", "2", "--poisson", "0.7", "1.3")
    assert code == 0
    assert out.splitlines()[1:3] == ["q^1/3: 3", "q^4/3: 3"]


def test_seed_is_logged_and_output_deterministic(capsys, tmp_path):
    digests = []
    for _ in range(2):
        target = tmp_path / "r.json"
        code = cli.main(["period", "--g", "2", "--samples", "15", "--seed", "42",
                         "--format", "json", "--out", str(target)])
        assert code == 0
        digests.append(hashlib.sha256(target.read_bytes()).hexdigest())
    assert digests[0] == digests[1]
    assert json.loads(target.read_text())["header"]["seed"] == 42


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlbench.cli", "lattice", "--tensor-g", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "signature: (2, 2)" in proc.stdout


def test_selftest_reports_and_exit_codes(capsys, monkeypatch):
    from nlbench import acceptance
    monkeypatch.setattr(acceptance, "ALL", [acceptance.discriminant_criterion,
                                            acceptance.signature_criterion])
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.splitlines()[-1] == "2/2 criteria passed"

    def failing():
        return acceptance.CriterionResult(99, "always fails", False, "forced", 0.0, None)
    monkeypatch.setattr(acceptance, "ALL", [acceptance.signature_criterion, failing])
    code, out, _ = run(capsys, "selftest", "--format", "json")
    assert code == 1 and not __import__("json").loads(out)["ok"]
