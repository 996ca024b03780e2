import json
import math
import subprocess
import sys

import pytest

from dickman import cli
from dickman.models import critical_sigma2, pinning_weights
from dickman.renewal import lambda_for_theta, law_from_harmonic, renewal_density

EULER_GAMMA = 0.57721566490153286


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_rho_closed_form(capsys):
    code, out, _ = run(capsys, "rho", "--t", "2")
    assert code == 0
    assert float(out) == pytest.approx(1.0 - math.log(2.0), abs=1e-12)
    # shortest round-trip repr
    assert out.strip() == repr(float(out))


def test_density_unit_interval(capsys):
    code, out, _ = run(capsys, "density", "--s", "1", "--t", "0.5")
    assert code == 0
    assert float(out) == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-12)


def test_cdf_scalar(capsys):
    # P(Y_1 <= 1) = e^-gamma
    code, out, _ = run(capsys, "cdf", "--s", "1", "--t", "1")
    assert code == 0
    assert float(out) == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-9)


def test_density_grid_csv(capsys):
    code, out, _ = run(capsys, "density", "--s", "1", "--grid", "--h", "0.125", "--t-max", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# dickman ")
    assert "# command=density" in lines
    assert "# s=1.0" in lines
    header = lines.index("t,f_s")
    rows = [tuple(map(float, line.split(","))) for line in lines[header + 1:]]
    assert len(rows) == 16
    t, f = rows[3]
    assert t == 0.5 and f == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-12)


def test_csv_echo_block_sorted(capsys):
    code, out, _ = run(capsys, "rho", "--t", "2", "--out", "csv", "--threads", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"# dickman {cli.__version__}"
    echo = [line[2:] for line in lines[1:] if line.startswith("# ")]
    assert echo[0] == "command=rho"
    assert echo[-1] == "threads=3"
    keys = [e.split("=")[0] for e in echo[1:-1]]
    assert keys == sorted(keys)
    assert lines[-2] == "value"


def test_repeat_runs_identical(capsys):
    argv = ("simulate", "--samples", "300", "--seed", "7", "--out", "csv")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert first.count("\n") > 300


def test_simulate_independent_of_threads(capsys):
    base = ("simulate", "--samples", "20000", "--seed", "11", "--out", "csv")
    _, one, _ = run(capsys, *base, "--threads", "1")
    _, four, _ = run(capsys, *base, "--threads", "4")
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("# threads=")]
    assert strip(one) == strip(four)


def test_green_scalar_and_table(capsys):
    from dickman.green import green_extend

    _, out, _ = run(capsys, "green", "--theta", "0", "--t", "0.5")
    assert float(out) == green_extend(0.0, 0.5)
    code, out, _ = run(capsys, "green", "--theta", "0", "--table", "0.25", "1", "0.25")
    assert code == 0
    body = out.splitlines()[out.splitlines().index("t,G") + 1:]
    assert [float(l.split(",")[0]) for l in body] == [0.25, 0.5, 0.75, 1.0]


def test_green_bar_positive(capsys):
    code, out, _ = run(capsys, "green-bar", "--theta", "0", "--t", "1")
    assert code == 0 and float(out) > 0.0


def test_renewal_u_matches_library(capsys):
    code, out, _ = run(capsys, "renewal-u", "--N", "64", "--n-max", "10")
    assert code == 0
    lines = out.splitlines()
    body = lines[lines.index("n,U") + 1:]
    U = renewal_density(law_from_harmonic(64), lambda_for_theta(64, 0.0), 10)
    assert [float(l.split(",")[1]) for l in body] == [float(u) for u in U]


def test_renewal_u_lambda_alias(capsys):
    _, a, _ = run(capsys, "renewal-u", "--N", "16", "--lam", "1.5")
    _, b, _ = run(capsys, "renewal-u", "--N", "16", "--lambda", "1.5")
    assert a == b


def test_spacetime_u_origin(capsys):
    code, out, _ = run(capsys, "spacetime-u", "--N", "16", "--n", "0")
    assert code == 0 and float(out) == 1.0


def test_json_moment_record(capsys):
    code, out, _ = run(capsys, "pinning-m2", "--n", "16", "--N", "16")
    assert code == 0
    doc = json.loads(out)
    assert {"value", "lambda", "sigma2", "beta", "version", "config"} <= set(doc)
    assert doc["sigma2"] == pytest.approx(critical_sigma2(16, 0.0), rel=1e-15)
    assert doc["lambda"] == pytest.approx(doc["sigma2"] * pinning_weights(16).R_N, rel=1e-15)
    assert doc["config"]["command"] == "pinning-m2"


def test_polymer_m2_record(capsys):
    code, out, _ = run(capsys, "polymer-m2", "--n", "4", "--N", "64", "--disorder", "rademacher")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] > 0.0 and doc["lambda"] == pytest.approx(1.0, rel=1e-12)


def test_alpha_record(capsys):
    code, out, _ = run(capsys, "alpha", "--N", "1000")
    doc = json.loads(out)
    assert doc["alpha"] == pytest.approx(EULER_GAMMA + math.log(16.0) - math.pi, abs=1e-15)
    assert abs(doc["residual"]) < 1e-3


def test_out_path_infers_format(capsys, tmp_path):
    target = tmp_path / "rho.json"
    code, out, _ = run(capsys, "rho", "--t", "2", "--out", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["value"] == pytest.approx(1.0 - math.log(2.0), abs=1e-12)
    plain = tmp_path / "rho.txt"
    run(capsys, "rho", "--t", "2", "--out", str(plain), "--format", "csv")
    assert plain.read_text().startswith("# dickman ")


def test_verify_renewal_passes(capsys):
    code, out, _ = run(capsys, "verify-renewal", "--theta", "0", "--t", "0.5", "--Ns", "1024,8192,65536", "--out", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert [r["N"] for r in doc["rows"]] == [1024, 8192, 65536]


def test_verify_renewal_failure_exit_code(capsys):
    code, _, err = run(capsys, "verify-renewal", "--theta", "0", "--t", "0.5", "--Ns", "1024,8192", "--tol", "1e-6")
    assert code == cli.EXIT_VERIFY == 2
    assert "renewal check failed" in err


def test_bounds_small_sweep(capsys):
    code, out, _ = run(capsys, "bounds", "--max", "8", "--out", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["constant"] for r in rows] == ["sharp_local_C", "fuk_nagaev_C", "lower_tail_c"]
    assert all(r["holds"] for r in rows)


def test_scale_test_record(capsys):
    code, out, _ = run(capsys, "test-scale", "--samples", "20000", "--t", "0.5", "--seed", "3")
    doc = json.loads(out)
    assert code == (0 if doc["passed"] else 2)
    assert doc["statistic"] < doc["critical"]


@pytest.mark.parametrize(
    "argv",
    [
        ("rho", "--t", "2", "--bogus"),
        ("nonsense",),
        ("rho",),
        ("verify-renewal", "--theta", "0", "--t", "0.5", "--Ns", "a,b"),
        ("rho", "--t", "2", "--out", "xml", "--format", "yaml"),
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_USAGE == 64
    assert "error" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("rho", "--t", "-1"),
        ("density", "--s", "-1", "--t", "1"),
        ("density", "--s", "1"),
        ("green", "--theta", "0"),
        ("green", "--theta", "0", "--table", "1", "0.5", "0.1"),
        ("simulate", "--samples", "0"),
        ("rho", "--t", "2", "--threads", "0"),
        ("test-scale", "--samples", "100", "--t", "0.0001"),
        ("polymer-m2", "--n", "4", "--N", "8", "--disorder", "rademacher"),
    ],
)
def test_domain_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == cli.EXIT_DOMAIN == 1
    assert out == "" and err.startswith("dickman: ")


def test_resolve_defaults(monkeypatch):
    monkeypatch.setenv("DICKMAN_THREADS", "5")
    cfg = cli.resolve(["rho", "--t", "2", "--out", "json"])
    assert cfg.threads == 5 and cfg.format == "json" and cfg.out is None
    assert cfg.params == {"t": 2.0, "h": cfg.params["h"]}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dickman.cli", "rho", "--t", "2"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(1.0 - math.log(2.0), abs=1e-12)
    proc = subprocess.run([sys.executable, "-m", "dickman.cli", "rho"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 64


def test_version_flag(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and cli.__version__ in out
