import json
import subprocess
import sys

import numpy as np
import pytest

from jacobi_spectra.cli import (
    EXIT_NONCONV,
    EXIT_OK,
    EXIT_REGIME,
    EXIT_USAGE,
    UsageError,
    main,
    parse_grid,
    parse_ns,
    parse_params,
)

DISCRETE = ["--preset", "power_law", "--params", "alpha=1,p=1,gamma=4"]


def test_parse_params():
    assert parse_params("α=1,p=2") == {"α": 1.0, "p": 2.0}
    assert parse_params(None) == {}
    for bad in ("a", "=1", "a=x"):
        with pytest.raises(UsageError):
            parse_params(bad)


def test_parse_grid():
    g = parse_grid("-1:1:0.25")
    np.testing.assert_array_equal(g, [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1])
    assert len(parse_grid("-4:4:0.05")) == 161
    for bad in ("1:0:0.1", "0:1:0", "0:1", "a:b:c"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_parse_ns():
    assert parse_ns("128:1024") == [128, 256, 512, 1024]
    assert parse_ns("10,20") == [10, 20]
    with pytest.raises(UsageError):
        parse_ns("ten")


def test_hypotheses_codes(capsys):
    assert main(["hypotheses", "--preset", "hermite"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["regime"] == "AC"
    assert main(["hypotheses", *DISCRETE]) == EXIT_OK
    assert main(["hypotheses", "--preset", "power_law", "--params", "α=1,p=1,γ=2"]) == EXIT_REGIME
    assert main(["hypotheses", "--preset", "power_law", "--params", "α=1,p"]) == EXIT_USAGE
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert json.loads(err)["error"] == "USAGE"


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["density"], ["hypotheses", "--preset", "nope"], ["frozen", "--preset", "hermite"],
     ["density", "--preset", "hermite", "--grid", "oops"]],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_density_csv_is_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["density", "--preset", "hermite", "--grid", "-1:1:0.5"]
    assert main([*args, "--out", str(out1)]) == EXIT_OK
    assert main([*args, "--out", str(out2)]) == EXIT_OK
    text = out1.read_text()
    assert text == out2.read_text()
    rows = text.splitlines()
    assert rows[0] == "x,density" and len(rows) == 6
    x, d = map(float, rows[3].split(","))
    assert x == 0.0 and d == pytest.approx(0.5641895835477563, rel=1e-6)


def test_density_nonconvergence():
    assert main(["density", "--preset", "hermite", "--grid", "0:0:1", "--tol", "1e-14", "--nmax", "1024",
                 "--out", "/dev/null"]) == EXIT_NONCONV


def test_density_wrong_regime():
    assert main(["density", *DISCRETE, "--out", "/dev/null"]) == EXIT_REGIME


def test_spectrum(capsys):
    assert main(["spectrum", *DISCRETE, "--count", "3"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "x,mass" and len(rows) == 4


def test_json_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sequence": {"preset": "constant", "params": {"a": 0.5}}, "n0": 1}))
    assert main(["frozen", "--json-config", str(cfg)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "FROZEN" and doc["points"] == []
    assert main(["frozen", "--json-config", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_asymptotics_jsonl(capsys):
    assert main(["asymptotics", "--preset", "constant", "--params", "a=0.5", "--x", "0.2",
                 "--ns", "128,256", "--mode", "band"]) == EXIT_OK
    rows = [json.loads(r) for r in capsys.readouterr().out.splitlines()]
    assert len(rows) == 2 and all(r["residual"] < 1e-10 for r in rows)
    assert main(["asymptotics", "--preset", "hermite", "--x", "1j", "--mode", "band"]) == EXIT_USAGE


def test_verify_discrete(capsys):
    assert main(["verify", *DISCRETE, "--nmax", "4", "--count", "12"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "PASS"


def test_verify_failure_threshold():
    assert main(["verify", *DISCRETE, "--nmax", "4", "--count", "12", "--threshold", "1e-300",
                 "--out", "/dev/null"]) == EXIT_NONCONV


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "jacobi_spectra.cli", "hypotheses", "--preset", "hermite"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and '"regime": "AC"' in r.stdout
