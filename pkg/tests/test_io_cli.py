import json

import numpy as np
import pytest

from curspca import io
from curspca.cli import main
from curspca.errors import ParseError


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip_timing(text):
    report = json.loads(text)
    report.pop("timing_ms")
    return report


@pytest.fixture
def matrix_file(tmp_path):
    x = np.random.default_rng(5).standard_normal((12, 8))
    path = tmp_path / "m.csv"
    io.save_matrix(path, x)
    return path, x


class TestLoadMatrix:
    def test_literal(self, tmp_path):
        m = io.load_matrix(_write(tmp_path, "a.csv", "1,2\n3,4\n"))
        np.testing.assert_array_equal(m, [[1, 2], [3, 4]])

    def test_scientific_and_header(self, tmp_path):
        m = io.load_matrix(_write(tmp_path, "a.csv", "a,b\n1e-3,-2.5E2\n\n"), skip_header=True)
        np.testing.assert_array_equal(m, [[1e-3, -250.0]])

    def test_ragged(self, tmp_path):
        with pytest.raises(ParseError, match="row 2") as info:
            io.load_matrix(_write(tmp_path, "a.csv", "1,2\n3\n"))
        assert info.value.row == 2

    def test_non_numeric(self, tmp_path):
        with pytest.raises(ParseError, match="row 1, column 2"):
            io.load_matrix(_write(tmp_path, "a.csv", "1,x\n"))

    def test_non_finite(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_matrix(_write(tmp_path, "a.csv", "1,nan\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(ParseError, match="no data"):
            io.load_matrix(_write(tmp_path, "a.csv", "\n\n"))

    def test_round_trip(self, tmp_path):
        m = np.random.default_rng(7).standard_normal((5, 7)) * 10.0 ** np.arange(-3, 4)
        io.save_matrix(tmp_path / "r.csv", m)
        np.testing.assert_array_equal(io.load_matrix(tmp_path / "r.csv"), m)


class TestIndicesAndReports:
    def test_indices_format(self, tmp_path):
        io.save_indices(tmp_path / "s.csv", [5, 0, 3])
        assert (tmp_path / "s.csv").read_text() == "0\n3\n5\n"
        np.testing.assert_array_equal(io.load_indices(tmp_path / "s.csv"), [0, 3, 5])

    def test_bad_index(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_indices(_write(tmp_path, "s.csv", "1\nfoo\n"))

    def test_report_parse_back(self):
        metrics = {"err_reg": 0.1 + 0.2, "kkt_residual": 1.2345678901234567e-9, "converged": True,
                   "iterations": np.int64(7)}
        text = io.dump_report(io.make_report("glreg", {"a": 1}, metrics, 3, 1.5))
        parsed = json.loads(text)
        assert parsed["schema"] == io.REPORT_SCHEMA
        assert set(io.METRIC_FIELDS) <= set(parsed["metrics"])
        assert parsed["metrics"]["err_reg"] == 0.1 + 0.2
        assert parsed["metrics"]["kkt_residual"] == 1.2345678901234567e-9
        assert parsed["metrics"]["iterations"] == 7
        assert parsed["metrics"]["err_pca"] is None

    def test_write_failure_has_path(self, tmp_path):
        with pytest.raises(OSError, match="missing"):
            io.write_report(tmp_path / "missing" / "r.json", {})


class TestCli:
    def test_cur_outputs(self, capsys, tmp_path, matrix_file):
        path, x = matrix_file
        out = tmp_path / "out"
        code, stdout, _ = _run(capsys, "cur", "--input", path, "--rank", 3, "--cols", 4,
                               "--mode", "distinct", "--seed", 1, "--output-dir", out)
        assert code == 0
        report = json.loads(stdout)
        sel = io.load_indices(out / "selected.csv")
        assert sel.tolist() == sorted(sel.tolist()) and sel.size == 4
        assert report["metrics"]["active_count"] == 4
        assert json.loads((out / "report.json").read_text()) == report

    def test_glreg_full_shrinkage(self, capsys, matrix_file, tmp_path):
        path, x = matrix_file
        code, stdout, _ = _run(capsys, "glreg", "--input", path, "--lambda1", "1e9", "--output-dir", tmp_path)
        assert code == 0
        m = json.loads(stdout)["metrics"]
        assert m["active_count"] == 0
        assert m["err_reg"] == pytest.approx(np.linalg.norm(x), rel=1e-12)
        assert not io.load_matrix(tmp_path / "B.csv").any()

    def test_glspca_writes_zero_rows(self, capsys, matrix_file, tmp_path):
        path, _ = matrix_file
        code, stdout, _ = _run(capsys, "glspca", "--input", path, "--rank", 2, "--lambda", 1,
                               "--target-rows", 4, "--output-dir", tmp_path)
        assert code == 0
        w = io.load_matrix(tmp_path / "W.csv")
        assert w.shape == (8, 2)
        assert np.sum(np.any(w != 0, axis=1)) == json.loads(stdout)["metrics"]["active_count"]
        assert "0,0\n" in (tmp_path / "W.csv").read_text()

    @pytest.mark.parametrize("argv", [
        ["cur", "--input", "X", "--rank", "2", "--cols", "3", "--mode", "distinct"],
        ["glreg", "--input", "X", "--target-rows", "3"],
        ["glspca", "--input", "X", "--rank", "2", "--lambda", "0.5", "--target-rows", "3"],
    ])
    def test_deterministic(self, capsys, tmp_path, matrix_file, argv):
        path, _ = matrix_file
        argv = [str(path) if a == "X" else a for a in argv] + ["--seed", "9"]
        results = []
        for run in range(2):
            out = tmp_path / f"run{run}"
            code, stdout, _ = _run(capsys, *argv, "--output-dir", out)
            assert code == 0
            files = {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "report.json"}
            results.append((_strip_timing(stdout), files))
        assert results[0] == results[1]

    def test_simulate_then_eval(self, capsys, tmp_path):
        code, stdout, _ = _run(capsys, "simulate", "--case", "II", "--n", 20, "--p", 40, "--rank", 2,
                               "--sparsity", 0.75, "--method", "glpca", "--trials", 1, "--seed", 3,
                               "--save-data", "--output-dir", tmp_path)
        assert code == 0
        sim = json.loads(stdout)
        assert sim["spec"]["c"] == 10
        trial = sim["trials"][0]

        from curspca.synthbench import SignalSpec, generate, run_method
        from curspca.glsolver import GlConfig, SPCA, tune_lambda1

        data = generate(SignalSpec("II", n=20, p=40, k=2, c=10, seed=3))
        np.testing.assert_array_equal(io.load_matrix(tmp_path / "trial0_x.csv"), data.x)
        tr = tune_lambda1(data.x, GlConfig(lam=trial["tuning"]["lam"], k=2), 10, SPCA)
        io.save_matrix(tmp_path / "W.csv", tr.solution.w)
        code, stdout, _ = _run(capsys, "eval", "--x", tmp_path / "trial0_x.csv",
                               "--xhat", tmp_path / "trial0_xhat.csv", "--factors", tmp_path / "W.csv",
                               "--zero-mask", tmp_path / "trial0_zero_mask.csv")
        assert code == 0
        ev = json.loads(stdout)["metrics"]
        assert abs(ev["err_pca"] - trial["err_pca"]) <= 1e-12
        assert abs(ev["precision"] - trial["precision"]) <= 1e-12
        assert run_method(data, "glpca").err_pca == trial["err_pca"]

    def test_eval_reproduces_glreg(self, capsys, tmp_path, matrix_file):
        path, _ = matrix_file
        out = tmp_path / "g"
        code, stdout, _ = _run(capsys, "glreg", "--input", path, "--target-rows", 3, "--output-dir", out)
        reported = json.loads(stdout)["metrics"]
        code, stdout, _ = _run(capsys, "eval", "--x", path, "--xhat", path, "--selected", out / "selected.csv")
        assert code == 0
        assert abs(json.loads(stdout)["metrics"]["err_reg"] - reported["err_reg"]) <= 1e-12

    def test_curve(self, capsys, tmp_path, matrix_file):
        path, _ = matrix_file
        code, _, _ = _run(capsys, "curve", "--input", path, "--rank", 2, "--cols", "2,4", "--runs", 2,
                          "--output", tmp_path / "c.csv")
        assert code == 0
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "method,cols_requested,run,cols_used,err_reg"
        assert len(lines) == 1 + 2 * (2 + 1)

    @pytest.mark.parametrize("argv", [
        ["cur", "--bogus"],
        ["cur", "--input", "X", "--rank", "2", "--cols", "99", "--mode", "distinct"],
        ["cur", "--input", "X", "--rank", "50", "--cols", "2"],
        ["glreg", "--input", "X", "--lambda1", "1", "--target-rows", "2"],
        ["glreg", "--input", "X", "--lambda1", "-1"],
        ["simulate", "--case", "III", "--method", "cur"],
        ["eval", "--x", "X", "--xhat", "X"],
    ])
    def test_usage_errors_exit_2(self, capsys, matrix_file, argv):
        path, _ = matrix_file
        argv = [str(path) if a == "X" else a for a in argv]
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
        assert capsys.readouterr().err

    def test_parse_error_exit_2(self, capsys, tmp_path):
        bad = _write(tmp_path, "bad.csv", "1,2\n3\n")
        code, _, err = _run(capsys, "glreg", "--input", bad, "--lambda1", 1)
        assert code == 2 and "row 2" in err

    def test_missing_file_exit_1(self, capsys, tmp_path):
        code, _, err = _run(capsys, "glreg", "--input", tmp_path / "nope.csv", "--lambda1", 1)
        assert code == 1 and "nope.csv" in err
