import numpy as np

from spreadlab.cli import main


def run_cli(*argv):
    return main(list(argv))


def read(path):
    return path.read_bytes()


class TestSimulateCommand:
    def test_writes_outputs_and_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = run_cli(
            "simulate", "--steps", "4000", "--warmup", "400", "--seed", "5",
            "--export-tape", "--export-events", "--out", str(out),
        )
        assert code == 0
        for name in ("trajectory.csv", "summary.txt", "quotes.csv", "events.csv"):
            assert (out / name).exists()
        stdout = capsys.readouterr().out
        assert "# seed = 5" in stdout

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--steps", "4000", "--warmup", "400", "--seed", "9",
                "--export-tape", "--export-events"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--out", str(out1)) == 0
        assert run_cli(*args, "--out", str(out2)) == 0
        for name in ("trajectory.csv", "summary.txt", "quotes.csv", "events.csv"):
            assert read(out1 / name) == read(out2 / name)

    def test_divergence_exit_code(self, tmp_path, capsys):
        code = run_cli(
            "simulate", "--steps", "400000", "--warmup", "1000", "--seed", "4",
            "--mechanism", "nonuniform", "--alpha", "0.9",
            "--out", str(tmp_path / "div"),
        )
        assert code == 3
        assert "divergence" in capsys.readouterr().err
        # the truncated trajectory is still written
        assert (tmp_path / "div" / "trajectory.csv").exists()

    def test_missing_config_file(self, tmp_path, capsys):
        code = run_cli(
            "--config", str(tmp_path / "nope.ini"), "simulate", "--steps", "100",
            "--warmup", "10", "--out", str(tmp_path / "x"),
        )
        assert code == 1
        assert "config file not found" in capsys.readouterr().err

    def test_nonuniform_without_alpha(self, tmp_path, capsys):
        code = run_cli(
            "simulate", "--steps", "100", "--warmup", "10",
            "--mechanism", "nonuniform", "--out", str(tmp_path / "x"),
        )
        assert code == 1
        assert "alpha" in capsys.readouterr().err

    def test_config_file_precedence(self, tmp_path, capsys):
        config = tmp_path / "lab.ini"
        config.write_text("[simulate]\nsteps = 600\nseed = 11\nwarmup = 50\n")
        out = tmp_path / "run"
        code = run_cli(
            "--config", str(config), "simulate", "--seed", "12", "--out", str(out)
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "# steps = 600" in stdout   # file overrides default
        assert "# seed = 12" in stdout     # flag overrides file
        summary = (out / "summary.txt").read_text()
        assert "# steps = 600" in summary
        assert "# seed = 12" in summary


class TestIngestAndAnalyze:
    def test_ingest_then_analyze(self, tmp_path, capsys):
        sim_out = tmp_path / "sim"
        assert run_cli(
            "simulate", "--steps", "30000", "--warmup", "1000", "--seed", "2",
            "--export-tape", "--out", str(sim_out),
        ) == 0
        ing_out = tmp_path / "ing"
        assert run_cli(
            "ingest", "--quotes", str(sim_out / "quotes.csv"),
            "--tick-size", "0.01", "--out", str(ing_out),
        ) == 0
        assert (ing_out / "events.csv").exists()
        an_out = tmp_path / "an"
        assert run_cli(
            "analyze", "--events", str(ing_out / "events.csv"),
            "--estimators", "odd_fraction,conditional_parity,alpha,delta_s",
            "--out", str(an_out),
        ) == 0
        for name in ("odd_fraction", "conditional_parity", "alpha", "delta_s"):
            assert (an_out / f"{name}.csv").exists()

    def test_ingest_off_grid_names_line(self, tmp_path, capsys):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text("timestamp,bid,ask\n1,10.00,10.02\n2,10.005,10.02\n")
        code = run_cli(
            "ingest", "--quotes", str(quotes), "--tick-size", "0.01",
            "--out", str(tmp_path / "x"),
        )
        assert code == 1
        assert "line 3" in capsys.readouterr().err

    def test_analyze_missing_events(self, tmp_path, capsys):
        code = run_cli("analyze", "--out", str(tmp_path / "x"))
        assert code == 1
        assert "--events" in capsys.readouterr().err

    def test_ingest_deterministic(self, tmp_path):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text(
            "timestamp,bid,ask\n1,10.00,10.03\n2,10.01,10.03\n3,10.00,10.04\n"
        )
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli("ingest", "--quotes", str(quotes), "--out", str(a)) == 0
        assert run_cli("ingest", "--quotes", str(quotes), "--out", str(b)) == 0
        assert read(a / "events.csv") == read(b / "events.csv")


class TestParitySweepCommand:
    def test_rows_written(self, tmp_path):
        out = tmp_path / "sweep"
        code = run_cli(
            "parity-sweep", "--means", "2,4,8", "--n-samples", "5000",
            "--out", str(out),
        )
        assert code == 0
        lines = [
            line
            for line in (out / "parity_sweep.csv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        assert len(lines) == 1 + 6  # header + 3 means x 2 mechanisms

    def test_threads_do_not_change_results(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        base = ["parity-sweep", "--means", "2,4", "--n-samples", "5000", "--seed", "3"]
        assert run_cli(*base, "--threads", "1", "--out", str(a)) == 0
        assert run_cli(*base, "--threads", "4", "--out", str(b)) == 0
        a_rows = [l for l in (a / "parity_sweep.csv").read_text().splitlines() if not l.startswith("#")]
        b_rows = [l for l in (b / "parity_sweep.csv").read_text().splitlines() if not l.startswith("#")]
        assert a_rows == b_rows
