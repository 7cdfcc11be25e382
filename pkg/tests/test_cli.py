import json
import subprocess
import sys

import numpy as np
import pytest

from permimp.datagen import LinkModel, beta_default, generate_dataset, save_dataset_csv
from permimp.randomness import SeedSpec


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "permimp.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli")
    model = LinkModel("linear", beta_default(10))
    data = generate_dataset(model, 90, 3.0, SeedSpec(909).child("data"))
    save_dataset_csv(data, path / "data.csv",
                     provenance_path=path / "data.provenance.json")
    return path


@pytest.fixture(scope="module")
def trained(workdir):
    res = run_cli("train", "--data", "data.csv", "--out", "model.json",
                  "--seed", "7", "--m-trees", "20", cwd=workdir)
    assert res.returncode == 0, res.stderr
    return workdir


class TestTrain:
    def test_summary_lines(self, trained):
        res = run_cli("train", "--data", "data.csv", "--out", "model2.json",
                      "--seed", "7", "--m-trees", "20", cwd=trained)
        assert res.returncode == 0
        for key in ("oob_mse=", "sigma2_rf=", "sn_hat="):
            assert key in res.stdout

    def test_seed_repeat_byte_identical(self, trained):
        a = (trained / "model.json").read_bytes()
        b = (trained / "model2.json").read_bytes()
        assert a == b

    def test_two_row_toy_csv(self, tmp_path):
        (tmp_path / "toy.csv").write_text("x1,y\n0.1,1.0\n0.9,2.0\n")
        res = run_cli("train", "--data", "toy.csv", "--out", "toy.json",
                      "--seed", "1", "--m-trees", "1", cwd=tmp_path)
        assert res.returncode == 0
        doc = json.loads((tmp_path / "toy.json").read_text())
        assert len(doc["trees"]) == 1

    def test_domain_violation_exit_2(self, tmp_path):
        (tmp_path / "bad.csv").write_text("x1,y\n0.1,1.0\n1.5,2.0\n")
        res = run_cli("train", "--data", "bad.csv", "--out", "m.json",
                      "--seed", "1", cwd=tmp_path)
        assert res.returncode == 2
        assert "error: invalid-input" in res.stderr
        assert "row 3" in res.stderr


class TestImportance:
    def test_report_to_stdout(self, trained):
        res = run_cli("importance", "--model", "model.json", "--data", "data.csv",
                      "--seed", "3", cwd=trained)
        assert res.returncode == 0
        lines = res.stdout.strip().splitlines()
        assert lines[0] == "feature,importance,oracle,gap,mode,gamma_n,seed"
        assert len(lines) == 11
        assert lines[1].split(",")[4] == "derangement"

    def test_mode_flag_recorded(self, trained):
        res = run_cli("importance", "--model", "model.json", "--data", "data.csv",
                      "--seed", "3", "--mode", "unrestricted", cwd=trained)
        assert res.returncode == 0
        assert res.stdout.splitlines()[1].split(",")[4] == "unrestricted"

    def test_fingerprint_mismatch_exit_3(self, trained, tmp_path):
        other = generate_dataset(LinkModel("linear", beta_default(10)), 90, 3.0,
                                 SeedSpec(1000))
        save_dataset_csv(other, tmp_path / "other.csv")
        res = run_cli("importance", "--model", str(trained / "model.json"),
                      "--data", str(tmp_path / "other.csv"), "--seed", "3")
        assert res.returncode == 3
        assert "error: wrong-dataset" in res.stderr

    def test_with_replacement_model_exit_4(self, trained):
        res = run_cli("train", "--data", "data.csv", "--out", "boot.json",
                      "--seed", "9", "--m-trees", "6",
                      "--scheme", "with_replacement", cwd=trained)
        assert res.returncode == 0
        res = run_cli("importance", "--model", "boot.json", "--data", "data.csv",
                      "--seed", "3", cwd=trained)
        assert res.returncode == 4
        assert "error: unsupported-scheme" in res.stderr


class TestOracle:
    def test_linear_all(self):
        res = run_cli("oracle", "--model-kind", "linear",
                      "--beta", "2,4,2,-3,1,0,0,0,0,0", "--all")
        assert res.returncode == 0
        lines = res.stdout.strip().splitlines()
        vals = [float(line.split(",")[1]) for line in lines[1:]]
        expected = [b**2 / 6 for b in (2, 4, 2, -3, 1, 0, 0, 0, 0, 0)]
        np.testing.assert_allclose(vals, expected)
        assert sum(v > 0 for v in vals) == 5 and sum(v == 0 for v in vals) == 5

    def test_polynomial_j5(self):
        res = run_cli("oracle", "--model-kind", "polynomial",
                      "--beta", "2,4,2,-3,1,0,0,0,0,0", "--j", "5")
        value = float(res.stdout.strip().splitlines()[1].split(",")[1])
        assert value == pytest.approx(25 / 198)

    def test_trigonometric_uses_mc(self):
        res = run_cli("oracle", "--model-kind", "trigonometric",
                      "--beta", "2,4,2,-3,1", "--j", "2", "--mc-draws", "20000")
        line = res.stdout.strip().splitlines()[1].split(",")
        assert line[2] == "monte_carlo"
        assert float(line[4]) > 0

    def test_invalid_spec_exit_2(self):
        res = run_cli("oracle", "--model-kind", "linear", "--beta", "1,2,3")
        assert res.returncode == 2


class TestSimulateReproduce:
    def test_simulate_and_unknown_figure(self, tmp_path):
        (tmp_path / "exp.toml").write_text(
            "[experiment]\n"
            'model = "linear"\n'
            "n = [40]\nsn = [3.0]\nmc_replicates = 2\nseed = 5\n"
            "oracle_draws = 2000\n"
            "[forest]\nm_trees = 10\n"
        )
        res = run_cli("simulate", "--config", "exp.toml", "--out-dir", "out",
                      "--threads", "2", cwd=tmp_path)
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "out" / "results.csv").exists()
        assert (tmp_path / "out" / "raw.csv").exists()
        assert (tmp_path / "out" / "meta.json").exists()

        res = run_cli("reproduce", "--figure", "fig99", "--scale", "0.01",
                      "--out-dir", "r", "--seed", "1", cwd=tmp_path)
        assert res.returncode == 2
        assert "error: invalid-figure" in res.stderr

    def test_unknown_flag_fails_fast(self):
        res = run_cli("train", "--data", "x.csv", "--out", "y", "--seed", "1",
                      "--bogus-flag", "3")
        assert res.returncode == 2

    def test_help_lists_subcommands(self):
        res = run_cli("--help")
        for sub in ("train", "predict", "importance", "oracle", "simulate", "reproduce"):
            assert sub in res.stdout
