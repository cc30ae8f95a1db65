import json

import pytest

from driftlab import cli, experiments


def run_cli(*argv):
    return cli.main(list(argv))


class TestRunCommand:
    def test_happy_path(self, tmp_path, capsys):
        out = tmp_path / "record.txt"
        code = run_cli("run", "--algo", "cga", "--n", "16", "--K", "8",
                       "--seed", "7", "--budget", "5000", "--out", str(out))
        assert code == 0
        stdout = capsys.readouterr().out
        assert "cga n=16" in stdout and "seed=7" in stdout
        assert out.read_text().splitlines()[0] == "# schema=runrec-v1"

    def test_deterministic_record_file(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for path in (a, b):
            assert run_cli("run", "--algo", "cga", "--n", "16", "--K", "8",
                           "--seed", "7", "--budget", "5000", "--out", str(path)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_rho_rejected(self, capsys):
        code = run_cli("run", "--algo", "mmas", "--rho", "1.5", "--n", "16", "--seed", "1")
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_flags_prints_usage(self, capsys):
        code = run_cli("run")
        assert code == 2
        err = capsys.readouterr().err
        assert "usage" in err

    def test_no_subcommand_is_argparse_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli()
        assert exc.value.code == 2

    def test_budget_exhaustion_still_exit_zero(self, capsys):
        code = run_cli("run", "--algo", "cga", "--n", "40", "--K", "200",
                       "--seed", "3", "--budget", "5")
        assert code == 0
        assert "budget exhausted" in capsys.readouterr().out

    def test_auto_seed_is_printed(self, capsys):
        code = run_cli("run", "--algo", "cga", "--n", "16", "--K", "8",
                       "--budget", "500")
        assert code == 0
        assert "seed=" in capsys.readouterr().err


class TestSweepCommand:
    def test_grid_cardinality(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run_cli("sweep", "--algo", "cga", "--n", "16", "--n", "32",
                       "--K", "8", "--K", "12", "--K", "16",
                       "--trials", "5", "--budget", "4000", "--seed", "100",
                       "--out", str(out))
        assert code == 0
        _, _, rows = experiments.read_table(out, expect_schema="sweep-v1")
        assert len(rows) == 2 * 3 * 5
        assert experiments.summary_path(out).exists()

    def test_conflicting_strength_flags(self, tmp_path, capsys):
        code = run_cli("sweep", "--algo", "cga", "--n", "16", "--K", "8",
                       "--rho", "0.1", "--seed", "1", "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert "conflict" in capsys.readouterr().err

    def test_unwritable_output_fails_before_work(self, tmp_path, capsys):
        missing_dir = tmp_path / "nope" / "sweep.csv"
        code = run_cli("sweep", "--algo", "cga", "--n", "16", "--K", "8",
                       "--seed", "1", "--out", str(missing_dir))
        assert code == 2
        assert "not writable" in capsys.readouterr().err

    def test_jobs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["--algo", "cga", "--n", "16", "--K", "8", "--trials", "6",
                "--budget", "4000", "--seed", "5"]
        assert run_cli("sweep", *args, "--out", str(a)) == 0
        assert run_cli("sweep", *args, "--out", str(b), "--jobs", "2") == 0
        assert a.read_bytes() == b.read_bytes()

    def test_resume_flag(self, tmp_path):
        full = tmp_path / "full.csv"
        args = ["--algo", "cga", "--n", "16", "--K", "8", "--trials", "4",
                "--budget", "4000", "--seed", "5"]
        assert run_cli("sweep", *args, "--out", str(full)) == 0
        _, header, rows = experiments.read_table(full)
        resumed = tmp_path / "resumed.csv"
        experiments.write_table(resumed, "sweep-v1", header, rows[:2])
        assert run_cli("sweep", *args, "--out", str(resumed), "--resume") == 0
        assert resumed.read_bytes() == full.read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("algo = cga\nn = 16\nK = 8 12\ntrials = 3\n"
                       "budget = 4000\nseed = 42\n")
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("sweep", "--config", str(cfg), "--out", str(out1)) == 0
        assert run_cli("sweep", "--config", str(cfg), "--seed", "42",
                       "--out", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()
        _, _, rows = experiments.read_table(out1)
        assert len(rows) == 2 * 3


class TestOtherCommands:
    def test_census(self, tmp_path):
        out = tmp_path / "census.csv"
        code = run_cli("census", "--algo", "cga", "--n", "16", "--K", "4",
                       "--trials", "4", "--checkpoint", "30", "--budget", "1000",
                       "--seed", "2", "--out", str(out))
        assert code == 0
        _, _, rows = experiments.read_table(out, expect_schema="census-v1")
        assert len(rows) == 4

    def test_bstep_freq(self, tmp_path, capsys):
        out = tmp_path / "bstep.csv"
        code = run_cli("bstep-freq", "--n", "9", "--samples", "20000",
                       "--seed", "3", "--out", str(out))
        assert code == 0
        assert "ratio" in capsys.readouterr().out
        experiments.read_table(out, expect_schema="bstep-v1")

    def test_hitting_time(self, tmp_path, capsys):
        out = tmp_path / "hit.csv"
        code = run_cli("hitting-time", "--algo", "cga", "--K", "20", "--s", "0.5",
                       "--alpha", "0.1", "--trials", "200", "--seed", "8",
                       "--out", str(out))
        assert code == 0
        assert "tail bound" in capsys.readouterr().out
        experiments.read_table(out, expect_schema="hitting-v1")

    def test_clt_json(self, capsys):
        code = run_cli("clt", "--K", "20", "--steps", "200", "--trials", "150",
                       "--seed", "4", "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert "ks_distance" in payload

    def test_coupon(self, capsys):
        code = run_cli("coupon", "--n", "30", "--m", "3", "--K", "12",
                       "--trials", "3", "--budget", "4000", "--seed", "5")
        assert code == 0
        assert "remaining time" in capsys.readouterr().out

    def test_coupon_m_equal_n_rejected(self, capsys):
        code = run_cli("coupon", "--n", "16", "--m", "16", "--K", "8",
                       "--trials", "2", "--budget", "100", "--seed", "5")
        assert code == 2


class TestVerifyBounds:
    def test_single_family(self, capsys):
        code = run_cli("verify-bounds", "--only", "normal-cdf")
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "checks passed" in out

    def test_json_output(self, capsys):
        code = run_cli("verify-bounds", "--only", "variable-drift", "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert isinstance(payload, list) and payload
        assert all(r["passed"] for r in payload)
