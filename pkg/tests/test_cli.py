"""Tests for the command line interface."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mommix.cli import _read_columns, main


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def mixture_csv(path, n=1500, seed=2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    member = rng.random(size=n) < 0.5
    y = np.where(member, 1.0 + x + rng.normal(size=n), rng.normal(size=n))
    rows = ["x,y"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(x, y)]
    return write(path, "\n".join(rows) + "\n")


class TestFitOls:
    def test_exact_line_gives_exact_coefficients(self, tmp_path, capsys):
        path = write(tmp_path / "line.csv", "x,y\n0,1\n1,3\n2,5\n")
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "ols", "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        params = {p["name"]: p for p in doc["parameters"]}
        assert_allclose(params["intercept"]["estimate"], 1.0, atol=1e-10)
        assert_allclose(params["beta:x"]["estimate"], 2.0, atol=1e-10)
        assert abs(params["beta:x"]["se"]) < 1e-10

    def test_slope_matches_closed_form(self, tmp_path, capsys):
        rng = np.random.default_rng(8)
        x = rng.normal(size=200)
        y = 0.5 + 1.5 * x + rng.normal(size=200)
        rows = ["x,y"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(x, y)]
        path = write(tmp_path / "ols.csv", "\n".join(rows) + "\n")
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "ols", "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        slope = next(p for p in doc["parameters"] if p["name"] == "beta:x")
        expected = np.polyfit(x, y, 1)[0]
        assert_allclose(slope["estimate"], expected, rtol=1e-10)


class TestFitMoment:
    def test_full_report_structure(self, tmp_path, capsys):
        path = mixture_csv(tmp_path / "mix.csv")
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        names = [p["name"] for p in doc["parameters"]]
        assert names == ["beta:x", "p", "mu1", "lambda1:x", "lambda2",
                         "lambda3", "alpha_tilde", "first_intercept"]
        by_name = {p["name"]: p for p in doc["parameters"]}
        assert by_name["beta:x"]["se"] is not None
        assert by_name["beta:x"]["ci_low"] < by_name["beta:x"]["estimate"]
        assert by_name["alpha_tilde"]["se"] is None
        assert doc["n"] == 1500
        assert doc["m"] == 1

    def test_json_and_csv_agree(self, tmp_path, capsys):
        path = mixture_csv(tmp_path / "mix.csv")
        main(["fit", path, "--response", "y", "--covariates", "x",
              "--format", "json"])
        doc = json.loads(capsys.readouterr().out)
        main(["fit", path, "--response", "y", "--covariates", "x",
              "--format", "csv"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "parameter,estimate,se,ci_low,ci_high"
        for line, param in zip(lines[1:], doc["parameters"]):
            cells = line.split(",")
            assert cells[0] == param["name"]
            for cell, key in zip(cells[1:], ("estimate", "se", "ci_low", "ci_high")):
                if param[key] is None:
                    assert cell == ""
                else:
                    assert_allclose(float(cell), param[key], rtol=1e-12)

    def test_text_marks_absent_ses(self, tmp_path, capsys):
        path = mixture_csv(tmp_path / "mix.csv")
        status = main(["fit", path, "--response", "y", "--covariates", "x"])
        assert status == 0
        out = capsys.readouterr().out
        line = next(ln for ln in out.splitlines() if ln.startswith("alpha_tilde"))
        assert "-" in line

    def test_out_writes_file(self, tmp_path, capsys):
        path = mixture_csv(tmp_path / "mix.csv")
        target = tmp_path / "report.json"
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--format", "json", "--out", str(target)])
        assert status == 0
        assert capsys.readouterr().out == ""
        doc = json.loads(target.read_text())
        assert doc["estimator"] == "moment"


class TestFitEm:
    def test_em_rows_have_no_ses(self, tmp_path, capsys):
        path = mixture_csv(tmp_path / "mix.csv", n=1200, seed=3)
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "em", "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        names = [p["name"] for p in doc["parameters"]]
        assert names == ["beta:x", "p", "mu1", "sigma1_sq", "mu2", "sigma2_sq"]
        assert all(p["se"] is None for p in doc["parameters"])


class TestParsing:
    def test_missing_values_dropped_and_counted(self, tmp_path, capsys):
        text = "x,y\n0,1\n1,NA\n2,5\n3,7\n,9\n4,null\n5,11\n"
        path = write(tmp_path / "gaps.csv", text)
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "ols", "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dropped_rows"] == 3
        assert doc["n"] == 4
        assert any("dropped 3 rows" in w for w in doc["warnings"])

    def test_semicolon_delimiter(self, tmp_path, capsys):
        path = write(tmp_path / "semi.csv", "x;y\n0;1\n1;3\n2;5\n")
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "ols", "--delimiter", ";",
                       "--format", "json"])
        assert status == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n"] == 3

    def test_quoted_fields_and_bom(self, tmp_path):
        text = '﻿"x","y"\n"0","1"\n"1","3"\n"2","5"\n'
        path = write(tmp_path / "quoted.csv", text)
        x, y, dropped = _read_columns(path, "y", ["x"], ",")
        assert dropped == 0
        assert_allclose(x[:, 0], [0.0, 1.0, 2.0])
        assert_allclose(y, [1.0, 3.0, 5.0])

    def test_parse_roundtrip_idempotent(self, tmp_path):
        path = mixture_csv(tmp_path / "mix.csv", n=50, seed=4)
        x1, y1, _ = _read_columns(path, "y", ["x"], ",")
        rows = ["x,y"] + [
            f"{float(a)!r},{float(b)!r}" for a, b in zip(x1[:, 0], y1)
        ]
        second = write(tmp_path / "again.csv", "\n".join(rows) + "\n")
        x2, y2, _ = _read_columns(second, "y", ["x"], ",")
        assert np.array_equal(x1, x2)
        assert np.array_equal(y1, y2)

    def test_bad_number_reports_row_and_column(self, tmp_path, capsys):
        path = write(tmp_path / "bad.csv", "x,y\n0,1\n1,two\n2,5\n")
        status = main(["fit", path, "--response", "y", "--covariates", "x",
                       "--estimator", "ols"])
        assert status == 1
        err = capsys.readouterr().err
        assert "error[parse_error]" in err
        assert "row 3" in err
        assert "column y" in err

    def test_missing_file(self, capsys):
        status = main(["fit", "/nonexistent/zzz.csv", "--response", "y",
                       "--covariates", "x"])
        assert status == 1
        assert "error[file_not_found]" in capsys.readouterr().err

    def test_unknown_column(self, tmp_path, capsys):
        path = write(tmp_path / "cols.csv", "x,y\n0,1\n1,3\n2,5\n")
        status = main(["fit", path, "--response", "z", "--covariates", "x"])
        assert status == 1
        assert "error[column_not_found]" in capsys.readouterr().err

    def test_response_repeated_as_covariate(self, tmp_path, capsys):
        path = write(tmp_path / "cols.csv", "x,y\n0,1\n1,3\n2,5\n")
        status = main(["fit", path, "--response", "y", "--covariates", "y"])
        assert status == 1
        assert "error[invalid_data]" in capsys.readouterr().err

    def test_bad_subcommand_exits_with_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


class TestSimulate:
    def test_smoke_emits_all_columns(self, capsys):
        status = main(["simulate", "--scenario", "gaussian_mixture",
                       "--n", "300", "--replicates", "2", "--seed", "5"])
        assert status == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0].split()[:4] == ["scenario", "n", "est", "param"]
        assert len(lines) == 3
        assert "gaussian_mixture" in lines[1]

    def test_out_prefix_writes_three_files(self, tmp_path, capsys):
        prefix = tmp_path / "study"
        status = main(["simulate", "--scenario", "zero_inflated_gaussian",
                       "--n", "300,500", "--replicates", "3",
                       "--estimator", "moment,em",
                       "--seed", "9", "--out", str(prefix)])
        assert status == 0
        capsys.readouterr()
        report = (tmp_path / "study.csv").read_text()
        assert report.splitlines()[0].startswith("scenario,n,estimator,")
        assert len(report.splitlines()) == 1 + 2 * 2 * 2
        doc = json.loads((tmp_path / "study.json").read_text())
        assert doc["base_seed"] == 9
        long = (tmp_path / "study_replicates.csv").read_text()
        assert long.splitlines()[0] == (
            "scenario,n,estimator,replicate,seed,parameter,estimate"
        )

    def test_repeat_invocations_byte_identical(self, tmp_path, capsys, monkeypatch):
        argv = ["simulate", "--scenario", "exp_gaussian_mixture", "--n", "300",
                "--replicates", "4", "--seed", "3"]
        first = tmp_path / "a"
        second = tmp_path / "b"
        monkeypatch.setenv("MOMMIX_THREADS", "1")
        assert main(argv + ["--out", str(first)]) == 0
        monkeypatch.setenv("MOMMIX_THREADS", "2")
        assert main(argv + ["--out", str(second)]) == 0
        capsys.readouterr()
        for suffix in (".csv", ".json", "_replicates.csv"):
            a = (tmp_path / ("a" + suffix)).read_bytes()
            b = (tmp_path / ("b" + suffix)).read_bytes()
            assert a == b

    def test_unknown_estimator_rejected(self, capsys):
        status = main(["simulate", "--scenario", "gaussian_mixture",
                       "--n", "300", "--replicates", "2",
                       "--estimator", "bayes"])
        assert status == 1
        assert "error[invalid_data]" in capsys.readouterr().err

    def test_bad_n_list_rejected(self, capsys):
        status = main(["simulate", "--scenario", "gaussian_mixture",
                       "--n", "300;500", "--replicates", "2"])
        assert status == 1
        assert "error[invalid_data]" in capsys.readouterr().err
