from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from spectrakit import cli
from spectrakit import func_model as fm
from spectrakit import spectra as sp


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


class TestAnalyze:
    def test_positional_form(self, capsys):
        code, out, _ = run(capsys, "analyze", "gamma_1", "Carleman", "-3:3:0.05")
        assert code == cli.EXIT_OK
        rows = csv_rows(out)
        assert len(rows) == 121
        sing = [r["omega"] for r in rows if r["classification"] == "Singular"]
        assert sing == ["1.00"]
        assert out.startswith("# config: ")

    def test_flag_form_json(self, capsys):
        code, out, _ = run(capsys, "analyze", "--func", "chirp", "--spectrum", "Laplace",
                           "--grid", "-1:1:0.1", "--format", "json", "--tol", "tau_jump=0.002",
                           "--a-ladder", "0.0001:0.1")
        assert code == 0
        obj = json.loads(out)
        est = obj["estimates"][0]
        assert est["kind"] == "Laplace"
        assert est["counts"]["Singular"] == 0
        assert len(est["points"]) == 21
        assert obj["config"]["tol"] == {"tau_jump": 0.002}

    def test_descriptor_file(self, capsys, tmp_path):
        path = tmp_path / "phi.json"
        path.write_text(fm.to_json(fm.trig_poly([(0.5, 1.0), (-1.5, 2.0)])))
        code, out, _ = run(capsys, "analyze", str(path), "Laplace", "-2:2:0.5")
        assert code == 0
        sing = [r["omega"] for r in csv_rows(out) if r["classification"] == "Singular"]
        assert sing == ["-1.5", "0.5"]

    def test_matrix_orbits(self, capsys):
        code, out, _ = run(capsys, "analyze", "--matrix", "diag(i,-1)", "--spectrum", "Laplace",
                           "--grid", "-2:2:0.5")
        assert code == 0
        rows = csv_rows(out)
        assert {r["x_id"] for r in rows} == {"x0", "x1", "x2"}
        assert [r["omega"] for r in rows if r["classification"] == "Singular"] == ["1.0", "1.0"]

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "r.csv"
        code, out, _ = run(capsys, "analyze", "gamma_0", "Laplace", "-1:1:0.5", "--out", str(path))
        assert code == 0 and out == ""
        assert "Singular" in path.read_text()

    def test_quadrature_failures_exit_2(self, capsys, monkeypatch):
        real = sp.estimate

        def failing(phi, kind, grid, **kw):
            est = real(phi, kind, grid, **kw)
            est.flags = ["quad_fail"] * grid.size
            est.classification = [sp.UNDECIDED] * grid.size
            return est

        monkeypatch.setattr(cli.sp, "estimate", failing)
        code, _, err = run(capsys, "analyze", "gamma_0", "Laplace", "-1:1:0.5")
        assert code == cli.EXIT_QUAD
        assert "quadrature" in err


class TestInputErrors:
    @pytest.mark.parametrize("argv", [
        ["analyze", "gamma_1", "Laplace", "-3:3:0"],
        ["analyze", "gamma_1", "Laplace", "-3:3:-0.1"],
        ["analyze", "gamma_1", "Laplace", "3:-3:0.1"],
        ["analyze", "gamma_1", "Fourier", "-3:3:0.1"],
        ["analyze", "nonexistent", "Laplace", "-3:3:0.1"],
        ["analyze", "gamma_1", "Laplace"],
        ["analyze", "gamma_1", "Laplace", "-1:1:0.1", "--tol", "bogus=1"],
        ["analyze", "gamma_1", "Laplace", "-1:1:0.1", "--a-ladder", "0.5:0.6"],
        ["analyze", "--matrix", "diag(i,", "--spectrum", "Laplace", "--grid", "-1:1:0.5"],
        ["verify", "no_such_suite"],
        ["verify", "eq1_11", "--matrix", "diag(i)"],
        ["frobnicate"],
        [],
    ])
    def test_exit_1(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == cli.EXIT_INPUT
        assert err.strip()

    def test_step_zero_diagnostic(self, capsys):
        _, _, err = run(capsys, "analyze", "gamma_1", "Laplace", "-3:3:0")
        assert "step" in err

    def test_half_line_carleman_is_input_error(self, capsys):
        code, _, err = run(capsys, "analyze", "gamma_2_half", "Carleman", "-1:1:0.5")
        assert code == cli.EXIT_INPUT and "full-line" in err


class TestParsers:
    def test_a_ladder_is_dyadic(self):
        vals = cli.parse_a_ladder("0.001:0.1")
        assert all(np.log2(v) == round(np.log2(v)) for v in vals)
        assert min(vals) >= 0.001 and max(vals) <= 0.1

    def test_s_grid(self):
        assert cli.parse_s_grid("0,1,2.5") == (0.0, 1.0, 2.5)
        with pytest.raises(cli.InputError):
            cli.parse_s_grid("0,x")

    def test_inline_diag(self):
        system, xs = cli.load_matrix("diag(i, 2i, -0.5)")
        assert system.dim == 3 and len(xs) == 4
        assert np.allclose(system.imaginary_frequencies(), [1.0, 2.0])


class TestVerify:
    def test_sec3_inline_matrix(self, capsys):
        code, out, _ = run(capsys, "verify", "sec3", "--matrix", "diag(i,2i)")
        assert code == cli.EXIT_OK
        obj = json.loads(out)
        assert obj["suite"] == "sec3" and obj["pass"]
        assert obj["config"]["matrix"] == "diag(i,2i)"

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "cor5_2", "--format", "csv")
        assert code == 0
        rows = csv_rows(out)
        assert rows and all(r["pass"] == "true" for r in rows)

    def test_failing_suite_exit_3(self, capsys, monkeypatch):
        from spectrakit import suites

        def broken(grid, threads=None, **kw):
            res = suites.SuiteResult("cor5_2", grid)
            res.add("always_fails", False, {}, [{"why": "forced"}])
            return res

        monkeypatch.setitem(suites._RUNNERS, "cor5_2", broken)
        code, _, err = run(capsys, "verify", "cor5_2")
        assert code == cli.EXIT_ASSERT
        assert "always_fails" in err


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["analyze", "trig_1_sqrt2", "Beurling", "-2:2:0.05"],
        ["analyze", "chirp", "Laplace", "-2:2:0.05", "--format", "json"],
        ["verify", "cor5_2", "--grid", "-2:2:0.05"],
    ])
    def test_threads_1_vs_8_byte_identical(self, tmp_path, argv):
        a, b = tmp_path / "a.out", tmp_path / "b.out"
        assert cli.main(argv + ["--threads", "1", "--out", str(a)]) == 0
        assert cli.main(argv + ["--threads", "8", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
