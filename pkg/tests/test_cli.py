import csv
import math
import subprocess
import sys

import pytest

from fracnehari.cli import EXIT_AUDIT, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_NUMERIC, EXIT_OK, main
from fracnehari.config import SCHEMA, ConfigError, defaults, load_config, parse_config

SMALL = ["--override", "grid.L=60", "--override", "grid.N=2048"]


def summary(out):
    text = (out / "summary.txt").read_text()
    results = {}
    section = None
    for line in text.splitlines():
        if line.startswith("["):
            section = line
        elif section == "[results]" and "=" in line:
            k, v = line.split("=", 1)
            results[k] = v
    return text, results


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# --- solve ---------------------------------------------------------------------------


def test_solve_soliton(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--out", str(out)]) == EXIT_OK
    text, res = summary(out)
    assert "termination=converged" in text
    assert float(res["J"]) == pytest.approx(math.pi / 2, abs=1e-3)
    assert (out / "field.csv").exists()
    assert tuple(read_csv(out / "trace.csv")[0]) == ("iter", "J", "phi", "t0", "residual", "shift", "norm")
    assert "[config]" in text and "boundary = periodic" in text
    assert "smallness_regime_active" in res


def test_solve_max_iters(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--out", str(out), "--override", "solver.max_iters=1", *SMALL]) == EXIT_NONCONVERGED
    assert len(read_csv(out / "trace.csv")) == 3
    assert "termination=max_iters" in (out / "summary.txt").read_text()


def test_solve_overflow(tmp_path):
    out = tmp_path / "run"
    args = ["solve", "--out", str(out), "--override", "nonlinearity.family=paper_critical",
            "--override", "solver.amplitude=1e6", *SMALL]
    assert main(args) == EXIT_NUMERIC
    text = (out / "summary.txt").read_text()
    assert "termination=overflow" in text
    assert "amplitude" in text


def test_solve_paper_critical(tmp_path):
    out = tmp_path / "run"
    args = ["solve", "--out", str(out), "--override", "nonlinearity.family=paper_critical", *SMALL]
    assert main(args) == EXIT_OK
    _, res = summary(out)
    assert float(res["J"]) <= float(res["ground_energy_upper_bound"])
    assert float(res["norm_sq"]) <= float(res["norm_sq_upper_bound"])
    assert float(res["norm_sq_upper_bound"]) < 1


def test_solve_from_file(tmp_path):
    first = tmp_path / "a"
    assert main(["solve", "--out", str(first), *SMALL]) == EXIT_OK
    second = tmp_path / "b"
    args = ["solve", "--out", str(second), "--override", "solver.init=file",
            "--override", f"solver.init_file={first / 'field.csv'}", *SMALL]
    assert main(args) == EXIT_OK
    assert len(read_csv(second / "trace.csv")) <= 7


def test_reproducible_outputs(tmp_path):
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["solve", "--out", str(out), "--override", "solver.init_noise=0.05", *SMALL])
        blobs.append(((out / "field.csv").read_bytes(), (out / "trace.csv").read_bytes()))
    assert blobs[0] == blobs[1]


# --- oracle ------------------------------------------------------------------------------


def test_oracle_default(capsys):
    assert main(["oracle"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "9/9 rows pass" in out


def test_oracle_coarse_fails_residual_rows(capsys):
    assert main(["oracle", "--override", "oracle.N=256"]) == EXIT_NUMERIC
    lines = capsys.readouterr().out.splitlines()
    rows = {ln.split()[0]: ln for ln in lines if "tol=" in ln}
    for name in ("l2_sq", "seminorm_sq", "cube_integral"):
        assert rows[name].endswith("pass")
    for name in ("laplacian_max_relerr", "Phi_over_norm_sq", "dual_residual"):
        assert rows[name].endswith("FAIL")


def test_oracle_short_domain(capsys):
    assert main(["oracle", "--override", "oracle.L=10", "--override", "oracle.N=512"]) == EXIT_NUMERIC
    rows = {ln.split()[0]: ln for ln in capsys.readouterr().out.splitlines() if "tol=" in ln}
    assert rows["J"].endswith("FAIL")


def test_oracle_writes_summary_with_out(tmp_path):
    out = tmp_path / "oracle"
    assert main(["oracle", "--out", str(out)]) == EXIT_OK
    assert "[checks]" in (out / "summary.txt").read_text()


# --- audit / moser / verify ------------------------------------------------------------------

CRITICAL = ["--override", "nonlinearity.family=paper_critical", "--override", "audit.theta=4",
            "--override", "audit.C_q=10", "--override", "audit.q=4"]


def test_audit_passes_for_large_lambda(tmp_path):
    assert main(["audit", "--out", str(tmp_path), *CRITICAL]) == EXIT_OK


def test_audit_fails_for_zero_lambda(tmp_path):
    code = main(["audit", "--out", str(tmp_path), *CRITICAL, "--override", "nonlinearity.lam=0"])
    assert code == EXIT_AUDIT
    text = (tmp_path / "summary.txt").read_text()
    assert "f3_lower_bound" in text and "FAIL" in text
    assert "witness" in text


def test_audit_default_pure_power(tmp_path):
    assert main(["audit", "--out", str(tmp_path)]) == EXIT_OK


def test_moser(tmp_path):
    assert main(["moser", "--out", str(tmp_path), "--override", "moser.budget=8", *SMALL]) == EXIT_OK
    rows = read_csv(tmp_path / "moser_probe.csv")
    assert tuple(rows[0]) == ("trial_id", "alpha", "seminorm_sq", "l2_sq", "integral", "ratio")
    assert len(rows) == 1 + 3 * 8
    _, res = summary(tmp_path)
    assert any(k.startswith("H_hat") for k in res)


def test_moser_scan(tmp_path):
    args = ["moser", "--out", str(tmp_path), "--override", "moser.budget=4", "--override", "moser.scan=true",
            "--override", "moser.scan_N=8192", "--override", "moser.scan_eps_min=0.01", *SMALL]
    assert main(args) == EXIT_OK
    assert (tmp_path / "concentration_scan.csv").exists()


def test_verify(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "split.csv")
    assert tuple(rows[0]) == ("d", "functional", "defect", "defect_normalized")
    assert (tmp_path / "norm_additivity.csv").exists()


# --- configuration -----------------------------------------------------------------------------


def test_config_error_has_line_and_column(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[grid]\nL = 80\nN = many\n")
    assert main(["solve", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert f"{p}:3:1" in capsys.readouterr().err


def test_unknown_key_and_section(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config("[grid]\nL = 80\n  \n[solver]\nspeed = 3\n", "cfg")
    assert (exc.value.line, exc.value.col) == (5, 1)
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[gird]\nL = 1\n", "cfg")


def test_semantic_errors_are_located():
    with pytest.raises(ConfigError) as exc:
        parse_config("[run]\nseed = 1\n[solver]\nrecenter_radius = 500\n", "cfg")
    assert exc.value.line == 4
    with pytest.raises(ConfigError, match="boundary"):
        parse_config("[grid]\nboundary = dirichlet\n")
    with pytest.raises(ConfigError, match="p > 1"):
        parse_config("[nonlinearity]\np = 0.5\n")


def test_bad_override():
    with pytest.raises(ConfigError, match="section.key"):
        parse_config("", overrides=["N=3"])
    with pytest.raises(ConfigError, match="--override"):
        parse_config("", overrides=["grid.M=3"])


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_every_key_has_default_and_echo_round_trips():
    cfg = defaults()
    for sec, keys in SCHEMA.items():
        for key, (parser, default, doc) in keys.items():
            assert doc
            assert key in cfg[sec]
    again = parse_config(load_config().echo())
    assert again.values == load_config().values


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "solver.tol_residual" in out and "moser.alpha" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracnehari", "oracle"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "9/9 rows pass" in proc.stdout
