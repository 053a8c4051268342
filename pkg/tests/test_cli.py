"""Tests for the command-line interface and its exit codes."""

import numpy as np
import pytest

from spadsp.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from spadsp.signal_model import (
    generate_input,
    make_paper_channel,
    received_sequence,
    write_baseband,
)


def run_cli(*argv):
    return main(list(argv))


class TestComplexity:
    def test_table_values(self, capsys):
        assert run_cli("complexity", "-L", "64", "-s", "12") == EXIT_OK
        out = capsys.readouterr().out
        assert "rls,64,,12544" in out
        assert "spadsp_irls,64,12,5880" in out

    def test_bad_dimensions_exit_config(self, capsys):
        assert run_cli("complexity", "-L", "64", "-s", "100") == EXIT_CONFIG


class TestSimulate:
    def test_small_run(self, tmp_path, capsys):
        code = run_cli(
            "simulate",
            "--out", str(tmp_path / "run"),
            "--iterations", "120",
            "--trials", "2",
            "--no-figures",
        )
        assert code == EXIT_OK
        assert (tmp_path / "run" / "rls.csv").is_file()
        assert (tmp_path / "run" / "spadsp_irls.csv").is_file()
        assert (tmp_path / "run" / "summary.csv").is_file()
        assert (tmp_path / "run" / "manifest.json").is_file()

    def test_reproducible_across_invocations(self, tmp_path):
        args = ["--iterations", "100", "--trials", "1", "--seed", "42",
                "--no-figures"]
        run_cli("simulate", "--out", str(tmp_path / "a"), *args)
        run_cli("simulate", "--out", str(tmp_path / "b"), *args)
        for name in ("rls.csv", "spadsp_irls.csv", "summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_sweep_flag(self, tmp_path):
        code = run_cli(
            "simulate",
            "--out", str(tmp_path / "run"),
            "--iterations", "100",
            "--trials", "1",
            "--algorithms", "spadsp_irls",
            "--sweep", "mu",
            "--sweep-values", "0.5,1.0,2.0",
            "--no-figures",
        )
        assert code == EXIT_OK
        assert (tmp_path / "run" / "spadsp_irls_mu_0.5.csv").is_file()
        assert (tmp_path / "run" / "spadsp_irls_mu_2.csv").is_file()

    def test_config_file_with_cli_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "n_iterations = 100\n"
            "n_trials = 2\n"
            "algorithms = rls  # comment\n"
            "snr_db = 10\n"
        )
        code = run_cli(
            "simulate",
            "--config", str(cfg),
            "--out", str(tmp_path / "run"),
            "--trials", "1",  # overrides the file
            "--no-figures",
        )
        assert code == EXIT_OK
        import json

        manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
        assert manifest["config"]["n_iterations"] == 100
        assert manifest["config"]["n_trials"] == 1
        assert manifest["config"]["snr_db"] == 10.0
        assert manifest["config"]["algorithms"] == ["rls"]

    def test_bad_flag_value_exits_config(self, capsys):
        assert run_cli("simulate", "--lam", "1.7") == EXIT_CONFIG

    def test_bad_algorithm_exits_config(self, capsys):
        assert run_cli("simulate", "--algorithms", "lms") == EXIT_CONFIG

    def test_bad_config_file_exits_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n_trials twelve\n")
        assert run_cli("simulate", "--config", str(cfg)) == EXIT_CONFIG

    def test_figures_written_by_default(self, tmp_path):
        run_cli(
            "simulate",
            "--out", str(tmp_path / "run"),
            "--iterations", "100",
            "--trials", "1",
            "--algorithms", "rls",
        )
        assert (tmp_path / "run" / "msd.png").is_file()


class TestEstimate:
    @pytest.fixture
    def recording(self, tmp_path):
        rng = np.random.default_rng(9)
        ch = make_paper_channel()
        x = generate_input(400, rng)
        y = received_sequence(ch, x)
        path = tmp_path / "rec.csv"
        write_baseband(path, x, y, "csv")
        return path

    def test_round_trip_run(self, tmp_path, recording, capsys):
        code = run_cli(
            "estimate",
            "--input", str(recording),
            "--out", str(tmp_path / "est"),
            "--mu", "1.0",
        )
        assert code == EXIT_OK
        assert (tmp_path / "est" / "spadsp_irls_residual.csv").is_file()
        assert (tmp_path / "est" / "spadsp_irls_residual.png").is_file()
        assert (tmp_path / "est" / "manifest.json").is_file()

    def test_f32_input(self, tmp_path):
        rng = np.random.default_rng(10)
        x = (generate_input(200, rng)).astype(np.complex64).astype(np.complex128)
        y = x.copy()
        path = tmp_path / "rec.bin"
        write_baseband(path, x, y, "interleaved-f32")
        code = run_cli(
            "estimate",
            "--input", str(path),
            "--format", "interleaved-f32",
            "--out", str(tmp_path / "est"),
            "--no-figures",
        )
        assert code == EXIT_OK

    def test_missing_file_exits_io(self, tmp_path, capsys):
        code = run_cli("estimate", "--input", str(tmp_path / "nope.csv"))
        assert code == EXIT_IO

    def test_malformed_file_exits_io(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n")
        assert run_cli("estimate", "--input", str(path)) == EXIT_IO


class TestCompare:
    def test_merge(self, tmp_path, capsys):
        run_cli(
            "simulate",
            "--out", str(tmp_path / "run"),
            "--iterations", "100",
            "--trials", "1",
            "--no-figures",
        )
        code = run_cli(
            "compare",
            str(tmp_path / "run" / "manifest.json"),
            "--out", str(tmp_path / "all.csv"),
        )
        assert code == EXIT_OK
        assert (tmp_path / "all.csv").is_file()

    def test_missing_manifest_exits_io(self, tmp_path, capsys):
        code = run_cli(
            "compare", str(tmp_path / "none.json"), "--out", str(tmp_path / "o.csv")
        )
        assert code == EXIT_IO
