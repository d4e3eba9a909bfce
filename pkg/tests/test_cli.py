import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nonlocal_chain.cli import ConfigError, load_config, main, parse_config, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run_main(tmp_path, text, *extra, name="run.cfg"):
    cfg = write(tmp_path, text, name)
    out = tmp_path / "out.txt"
    code = main(["--config", str(cfg), "--output", str(out), *extra])
    return code, out.read_text() if out.exists() else ""


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    return list(csv.DictReader(lines[1:]))


class TestParsing:
    def test_key_values_and_repeated_terms(self):
        cfg = parse_config("command = dispersion\nn = 8  # comment\nterm = 1,1,1.0\nterm = 2,-1,0.1\n")
        assert cfg.command == "dispersion"
        assert cfg.values == {"n": "8"}
        assert cfg.lists["term"] == ["1,1,1.0", "2,-1,0.1"]

    def test_json_equivalent(self):
        cfg = parse_config('{"command": "dispersion", "n": 8, "term": [[1, 1, 1.0]]}', json_format=True)
        assert cfg.command == "dispersion" and cfg.integer("n") == 8
        assert cfg.lists["term"] == ["1,1,1.0"]

    def test_malformed_line(self):
        with pytest.raises(ConfigError):
            parse_config("just words")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config("n = 8\nn = 9")

    @pytest.mark.parametrize("value", ["nan", "inf", "abc"])
    def test_non_finite_numbers_rejected(self, value):
        with pytest.raises(ConfigError):
            parse_config(f"n = 8\nspacing = {value}").number("spacing")

    def test_echo_is_sorted(self):
        cfg = parse_config("command = matrix\nspacing = 1\nn = 4\nterm = 1,1,1")
        assert cfg.echo() == "command=matrix; n=4; spacing=1; term=1,1,1"


class TestCommands:
    def test_dispersion_zone_edge(self, tmp_path):
        code, text = run_main(tmp_path, "command = dispersion\nn = 8\nterm = 1,1,1.0\n")
        assert code == 0
        row = read_csv(text)[4]
        assert float(row["kappa"]) == pytest.approx(3.14159265, abs=1e-8)
        assert float(row["omega_sq"]) == 4.0

    def test_csv_round_trip_precision(self, tmp_path):
        code, text = run_main(tmp_path, "command = dispersion\nn = 7\nspacing = 0.3\nterm = 1,1,1.7\nterm = 2,1,0.2\n")
        from nonlocal_chain import ChainConfig, ExplicitTerms, Term, dispersion

        table = dispersion(ExplicitTerms((Term(1, 1, 1.7), Term(2, 1, 0.2))), ChainConfig(7, 0.3))
        parsed = np.array([float(r["omega_sq"]) for r in read_csv(text)])
        assert np.array_equal(parsed, table.omega_sq)
        assert "\r" not in text

    def test_matrix_json(self, tmp_path):
        code, text = run_main(tmp_path, "command = matrix\nn = 8\nterm = 1,1,1.0\nformat = json\n")
        data = json.loads(text)
        assert code == 0
        assert data["first_row"] == [-2, 1, 0, 0, 0, 0, 0, 1]
        assert data["eigenvalues"][4] == pytest.approx(-4.0)

    def test_matrix_csv_spectral(self, tmp_path):
        code, text = run_main(tmp_path, "command = matrix\nn = 8\nterm = 1,1,1.0\nmethod = spectral\n")
        rows = read_csv(text)
        assert [float(r["first_row"]) for r in rows] == pytest.approx([-2, 1, 0, 0, 0, 0, 0, 1], abs=1e-15)

    def test_simulate_ledger(self, tmp_path):
        code, text = run_main(
            tmp_path,
            "command = simulate\nn = 8\nterm = 1,1,1.0\ninitial = random\nseed = 3\ndt = 0.1\nsteps = 20\nrecord_every = 5\n",
        )
        rows = read_csv(text)
        assert code == 0 and len(rows) == 5
        totals = [float(r["total"]) for r in rows]
        assert max(totals) - min(totals) <= 1e-12 * totals[0]
        assert list(rows[0])[:5] == ["t", "kinetic", "potential", "total", "momentum"]

    def test_simulate_default_verlet_step(self, tmp_path):
        code, _ = run_main(tmp_path, "command = simulate\nmethod = verlet\nn = 8\nterm = 1,1,1.0\nsteps = 10\n")
        assert code == 0

    def test_simulate_unstable_step(self, tmp_path, capsys):
        code, _ = run_main(tmp_path, "command = simulate\nmethod = verlet\nn = 8\nterm = 1,1,1.0\ndt = 1.5\n")
        assert code == 2
        assert "stability" in capsys.readouterr().err

    def test_kernel_gaussian_columns(self, tmp_path):
        code, text = run_main(
            tmp_path, "command = kernel\nfamily = gaussian\nc0 = 1\na = 1\nrho0 = 1\nn = 16\nsamples = 5\n"
        )
        rows = read_csv(text)
        assert code == 0 and len(rows) == 5
        assert set(rows[0]) == {"k", "omega_sq", "modulus_transform", "x", "modulus_kernel", "laplacian_kernel"}
        k = float(rows[1]["k"])
        assert float(rows[1]["omega_sq"]) == pytest.approx(k * k * np.exp(-k * k), rel=1e-15)

    def test_kernel_unstable_truncation(self, tmp_path):
        code, _ = run_main(tmp_path, "command = kernel\nn = 8\nterm = 1,1,1.0\nterm = 2,-1,0.01\n")
        assert code == 2

    def test_reconstruct(self, tmp_path):
        code, text = run_main(tmp_path, "command = reconstruct\nn = 8\nspacing = 1\nlongwave = 1,1,1.0\n")
        data = json.loads(text)
        assert code == 0
        assert data["dispersion"][4]["omega_sq"] == 4.0
        assert data["potential_coefficients"] == [{"order": 1, "prefactor": 0.25}]

    def test_gaussian_no_interior_max(self, tmp_path):
        code, text = run_main(tmp_path, "command = gaussian\ngamma = 0.1\n")
        data = json.loads(text)
        assert code == 0 and data["has_interior_max"] is False
        assert "kappa_star" not in data

    def test_gaussian_interior_max(self, tmp_path):
        code, text = run_main(tmp_path, "command = gaussian\ngamma = 1\n")
        data = json.loads(text)
        assert data["kappa_star"] == pytest.approx(np.pi / 3)
        assert data["omega_sq_max"] == pytest.approx(np.exp(-1))

    def test_validate_pass(self, tmp_path):
        code, text = run_main(tmp_path, "command = validate\nn = 12\nterm = 1,1,1.0\nterm = 3,1,0.1\n")
        assert code == 0 and json.loads(text)["passed"] is True

    def test_validate_failure(self, tmp_path, capsys):
        code, text = run_main(tmp_path, "command = validate\nn = 8\nterm = 1,-1,1.0\n")
        assert code == 1
        assert "characteristic function not positive on (0,4]" in capsys.readouterr().err
        assert json.loads(text)["admissible"] is False


class TestErrors:
    def test_unknown_command(self, tmp_path):
        assert run_main(tmp_path, "command = plot\n")[0] == 1

    def test_missing_terms(self, tmp_path):
        assert run_main(tmp_path, "command = dispersion\nn = 8\n")[0] == 1

    def test_small_chain(self, tmp_path):
        assert run_main(tmp_path, "command = dispersion\nn = 2\nterm = 1,1,1\n")[0] == 1

    def test_zero_order_term(self, tmp_path):
        assert run_main(tmp_path, "command = dispersion\nn = 8\nterm = 0,1,1\n")[0] == 1

    def test_truncation_failure_is_numerical(self, tmp_path):
        text = "command = matrix\nfamily = gaussian\nc0 = 1\na = 10\nrho0 = 1\nn = 16\n"
        assert run_main(tmp_path, text)[0] == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.cfg")]) == 1

    def test_command_override(self, tmp_path):
        code, text = run_main(tmp_path, "command = dispersion\nn = 8\nterm = 1,1,1\n", "--command", "matrix")
        assert code == 0 and "first_row" in text

    def test_nan_never_written(self):
        cfg = parse_config("command = gaussian\ngamma = 1\n")
        out = io.StringIO()
        run(cfg, out)
        assert "NaN" not in out.getvalue() and "Infinity" not in out.getvalue()


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")) + sorted(CONFIGS.glob("*.json")), ids=lambda p: p.name)
def test_bundled_configs_run(path, tmp_path):
    expected = 1 if path.stem.endswith("_bad") else 0
    out = tmp_path / "out"
    assert main(["--config", str(path), "--output", str(out)]) == expected
    assert out.read_text()


def test_module_entry_point_writes_stdout():
    proc = subprocess.run(
        [sys.executable, "-m", "nonlocal_chain", "--config", str(CONFIGS / "bvk_dispersion.cfg")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("# config: command=dispersion")
    assert load_config(CONFIGS / "bvk_dispersion.cfg").command == "dispersion"
