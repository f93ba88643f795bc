import io
import json
import subprocess
import sys

import pytest

from ratioslab import cli
from ratioslab.cli import ConfigError, RunConfig, load_config, parse_config_text, run_command
from ratioslab.verify import Check

# golden run of `compare --x 10000 --sigma 0.5`; NT and RC totals from independent routes
GOLDEN_NT_1E4 = 1.2714257944904706
GOLDEN_RC_1E4 = 1.2733826018853467


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_tau_csv_schema():
    code, out, _ = run(["tau", "--n-max", "10", "--csv", "-"])
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "n,tau,tau_star" and len(lines) == 11
    assert lines[2] == "2,-24,-0.5303300858899106"
    assert lines[4].split(",")[2] == "-0.71875"


def test_tau_to_file(tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(["tau", "--n-max", "5", "--csv", str(path)])
    assert code == 0 and out == ""
    assert path.read_text().splitlines()[-1].startswith("5,4830,")


def test_disc_summary():
    code, out, _ = run(["disc", "--x", "30"])
    lines = out.splitlines()
    assert code == 0
    assert lines[:3] == ["d", "5", "8"]
    assert lines[-2] == "x_star,L,3X/pi^2"
    assert lines[-1].startswith("9,1.56332")


def test_malformed_flags_exit_1():
    for argv in (["tau"], ["tau", "--n-max", "abc"], ["bogus"], [], ["density", "--side", "xx"]):
        code, out, err = run(argv)
        assert code == 1, argv
        assert "usage:" in err and out == ""


def test_config_errors_exit_1(tmp_path):
    code, _, err = run(["disc", "--x", "5"])
    assert code == 1 and "X=5.0 must be >= 10" in err
    code, _, err = run(["density", "--x", "1000", "--sigma", "1.5"])
    assert code == 1 and "sigma" in err
    code, _, err = run(["rmt", "sample", "--kind", "usp", "--n", "12", "--count", "2"])
    assert code == 1 and "--force" in err


def test_force_warns():
    code, out, err = run(["rmt", "sample", "--kind", "usp", "--n", "9", "--count", "2", "--force"])
    assert code == 0 and "warning" in err and len(out.splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [[], ["tau"], ["disc"], ["verify-special"], ["verify-identities"], ["density"], ["compare"],
     ["rmt"], ["rmt", "sample"], ["rmt", "kron"], ["rmt", "compare"]],
)
def test_help_everywhere(argv):
    code, out, _ = run(argv + ["--help"])
    assert code == 0 and "usage:" in out


def test_help_describes_formulas():
    assert "tau(p^(k+1))" in run(["verify-identities", "--help"])[1]
    assert "g(0)/2" in run(["density", "--help"])[1]


def test_config_defaults_and_precedence(tmp_path):
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    assert load_config(str(empty)) == RunConfig()
    assert RunConfig().sigma == 0.5 and RunConfig().p_max == 10000 and RunConfig().seed == 0
    f = tmp_path / "a.cfg"
    f.write_text("# run\nsigma = 0.25\nx = 1000  # trailing comment\n")
    cfg = load_config(str(f), sigma=0.5)
    assert cfg.sigma == 0.5 and cfg.X == 1000.0
    assert load_config(str(f)).sigma == 0.25


def test_config_rejections(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sigma = 1.5\n")
    with pytest.raises(ConfigError, match="sigma"):
        load_config(str(bad))
    with pytest.raises(ConfigError, match="valid keys"):
        parse_config_text("x = 10\ncolour = red")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("x = 100\np_max = lots")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("just words")
    with pytest.raises(ConfigError):
        RunConfig(X=9.0)


def test_config_file_drives_command(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("x = 30\n")
    code, out, _ = run(["disc", "--config", str(f)])
    assert code == 0 and out.startswith("d\n5\n")


def test_verify_identities_passes():
    code, out, _ = run(["verify-identities"])
    assert code == 0
    assert "FAIL" not in out and out.rstrip().endswith("checks passed")


def test_verify_failure_exit_2(monkeypatch):
    monkeypatch.setattr(cli, "special_suite", lambda *a, **k: [Check("broken", False, "x")])
    code, out, _ = run(["verify-special"])
    assert code == 2 and "FAIL broken" in out


def test_verify_special_passes():
    code, out, _ = run(["verify-special"])
    assert code == 0 and "FAIL" not in out


def test_rmt_outputs():
    code, out, _ = run(["rmt", "sample", "--kind", "so_odd", "--n", "2", "--count", "5", "--seed", "1"])
    assert code == 0 and out.splitlines() == ["angle"] + ["0"] * 5
    code, out, _ = run(["rmt", "kron", "--a", "usp:2", "--b", "so_even:2", "--count", "4"])
    assert code == 0 and len(out.splitlines()) == 5
    code, out, _ = run(["rmt", "compare", "--a", "usp:2", "--b", "so_odd:2", "--count", "500", "--bins", "10"])
    lines = out.splitlines()
    assert lines[0] == "bin_lo,bin_hi,count_a,count_b"
    assert lines[11] == "statistic,value,n_a,n_b"
    assert lines[12].startswith("ks,") and lines[13].startswith("ks_exclude_zero,")
    # so_odd always has the eigenvalue 1, so including it forces KS = 1 against usp
    assert float(lines[12].split(",")[1]) == 1.0
    assert float(lines[13].split(",")[1]) < 1.0


def test_json_formatting():
    assert cli.to_json({"a": 0.1, "b": [1, 2.5], "c": {"d": None}}) == (
        '{\n  "a": 0.10000000000000001,\n  "b": [\n    1,\n    2.5\n  ],\n  "c": {\n    "d": null\n  }\n}'
    )
    assert cli.fmt(1 / 3) == "0.33333333333333331"


@pytest.fixture(scope="module")
def compare_1e4(tmp_path_factory):
    path = tmp_path_factory.mktemp("cmp") / "out.json"
    code, out, _ = run(["compare", "--x", "10000", "--sigma", "0.5", "--json", str(path)])
    assert code == 0 and out == ""
    return path


def test_compare_schema_and_golden(compare_1e4):
    rec = json.loads(compare_1e4.read_text())
    assert list(rec) == ["x", "sigma", "nt", "rc", "abs_diff", "rel_diff", "predicted_rate"]
    assert rec["x"] == 10000 and rec["sigma"] == 0.5
    assert rec["nt"]["total"] == pytest.approx(GOLDEN_NT_1E4, abs=1e-12)
    assert rec["rc"]["total"] == pytest.approx(GOLDEN_RC_1E4, abs=1e-12)
    assert rec["abs_diff"] == pytest.approx(abs(GOLDEN_NT_1E4 - GOLDEN_RC_1E4), abs=1e-12)
    assert rec["predicted_rate"] == pytest.approx(0.01**0.5)


def test_compare_csv_format(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("x = 1000\nformat = csv\n")
    code, out, _ = run(["compare", "--config", str(f), "--structural-zero"])
    head, vals = out.splitlines()
    assert code == 0
    assert head.split(",")[:4] == ["x", "sigma", "nt.side", "nt.X"]
    assert len(head.split(",")) == len(vals.split(","))


def test_console_script_entry():
    p = subprocess.run([sys.executable, "-m", "ratioslab.cli", "tau", "--n-max", "3"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.splitlines()[-1].startswith("3,252,")
