"""Command line entry points and exit codes."""
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from stopdet import FactorizationError, cli


def estimate(capsys, *args):
    code = cli.main(["estimate", *args])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else out.err)


@pytest.fixture
def dataset(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["x,y,kind"] + [f"{x:.5f},{y:.5f},{'abc'[i % 3]}" for i, (x, y) in enumerate(rng.standard_normal((150, 2)))]
    data = tmp_path / "d.csv"
    data.write_text("\n".join(lines) + "\n")
    schema = tmp_path / "s.txt"
    schema.write_text("numeric\nnumeric\ncategorical\n")
    return str(data), str(schema)


class TestEstimate:
    @pytest.mark.parametrize("algo", ["full", "rowwise", "blocked", "pivoted"])
    def test_algorithms_on_file(self, capsys, dataset, algo):
        data, schema = dataset
        code, out = estimate(capsys, "--data", data, "--schema", schema, "--algo", algo, "--r", "1e-12",
                             "--block-size", "32", "--diag-tol", "1e-9")
        assert code == 0
        assert out["n"] == 150 and out["dim"] == 5 and out["algorithm"] == algo
        assert out["stopped"] is False
        assert out["stop_index"] == 150

    def test_estimates_agree(self, capsys, dataset):
        data, schema = dataset
        values = [estimate(capsys, "--data", data, "--schema", schema, "--algo", algo, "--r", "0")[1]["log_det"]
                  for algo in ("full", "rowwise", "blocked")]
        np.testing.assert_allclose(values, values[0], rtol=1e-10)

    def test_synthetic_stops(self, capsys):
        code, out = estimate(capsys, "--synthetic", "2000,10", "--lengthscale", str(math.e**2), "--r", "0.1")
        assert code == 0 and out["stopped"] and out["stop_index"] < 2000
        assert out["lower"] <= out["estimate"] <= out["upper"]

    def test_loose_precision_warning(self, capsys):
        code, out = estimate(capsys, "--synthetic", "50,2", "--r", "2")
        assert code == 0 and out["warnings"] == ["r>=1"]

    @pytest.mark.parametrize("args", [
        ["--synthetic", "50,2", "--delta", "2"],
        ["--synthetic", "50,2", "--lengthscale", "-1"],
        ["--synthetic", "0,2"],
    ])
    def test_input_errors(self, capsys, args):
        code, err = estimate(capsys, *args)
        assert code == 2 and "input error" in err

    def test_data_without_schema(self, capsys, dataset):
        assert estimate(capsys, "--data", dataset[0])[0] == 2

    def test_missing_file(self, capsys, tmp_path, dataset):
        code, err = estimate(capsys, "--data", str(tmp_path / "nope.csv"), "--schema", dataset[1])
        assert code == 4 and "I/O error" in err

    def test_factorization_error(self, capsys, monkeypatch):
        def broken(a, plan, cfg):
            raise FactorizationError(3, -1.0)

        monkeypatch.setattr(cli, "stopped_cholesky_blocked", broken)
        code, err = estimate(capsys, "--synthetic", "20,2")
        assert code == 3 and "numerical error" in err

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["estimate", "--algo", "qr", "--synthetic", "5,2"])
        assert info.value.code == 2


class TestBench:
    def test_writes_report(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("synthetic = 80,2\nalgorithms = full,blocked\nr = 0.2\npermutations = 2\nblock_size = 16\n")
        out = tmp_path / "out.jsonl"
        assert cli.main(["bench", "--config", str(config), "--out", str(out), "--format", "jsonl"]) == 0
        assert len(out.read_text().splitlines()) == 4
        assert "wrote 4 records" in capsys.readouterr().out

    def test_bad_config(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("permutations = 0\nsynthetic = 10,2\n")
        assert cli.main(["bench", "--config", str(config), "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_config(self, capsys, tmp_path):
        assert cli.main(["bench", "--config", str(tmp_path / "none.cfg"), "--out", str(tmp_path / "x.csv")]) == 4

    def test_unwritable_output(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("synthetic = 10,2\nalgorithms = full\npermutations = 1\n")
        assert cli.main(["bench", "--config", str(config), "--out", str(tmp_path / "no" / "x.csv")]) == 4


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "stopdet.cli", "estimate", "--synthetic", "30,2", "--algo", "full"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 30
