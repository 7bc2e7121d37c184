import csv
import io
import json

import numpy as np
import pytest

from expconv import cli, suites
from expconv.records import FIELDS, BoundCheckRecord, fmt, relative_margin, write_records_csv
from expconv.density import DensitySpec


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestRecords:
    def test_fmt(self):
        assert fmt(0.1) == "0.10000000000000001"
        assert fmt(None) == "" and fmt(True) == "true" and fmt(3) == "3"

    def test_pass_rule(self):
        r = BoundCheckRecord.make("x", lhs=1.0 + 5e-6, rhs=1.0, tol=1e-5)
        assert r.passed and r.margin < 0
        assert not BoundCheckRecord.make("x", lhs=1.1, rhs=1.0, tol=1e-5).passed

    def test_log_space(self):
        r = BoundCheckRecord.make("x", lhs=0.0, rhs=0.0, log_lhs=-800.0, log_rhs=-799.0)
        assert r.passed and 0 < r.margin < 1

    def test_margin_finite(self):
        assert relative_margin(0.0, float("inf")) == 1.0
        assert relative_margin(2.0, 1.0) == pytest.approx(-0.5)

    def test_csv_schema(self):
        spec = DensitySpec(1, 1.0, 0.0)
        text = write_records_csv([BoundCheckRecord.make("a.b", spec, lhs=1 / 3, rhs=1.0, n=2, x=5.0)])
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == FIELDS
        assert rows[1][FIELDS.index("lhs")] == "0.33333333333333331"
        assert rows[1][FIELDS.index("pass")] == "true"


class TestConfig:
    def test_default_matrix(self):
        specs = suites.SuiteConfig().specs()
        assert len(specs) == 18
        assert all(s.gamma < min(s.d, (s.d + 1) / 2) for s in specs)

    def test_json_and_overrides(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"suite": "thm1", "d": [1], "lambda": [0.5], "tol": 1e-4}))
        cfg = suites.SuiteConfig.from_json(str(p), tol=1e-6)
        assert cfg.lam == [0.5] and cfg.tol == 1e-6 and cfg.d == [1]

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"bogus": 1}))
        with pytest.raises(ValueError):
            suites.SuiteConfig.from_json(str(p))

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("EXPCONV_THREADS", "3")
        assert suites.threads_from_env() == 3
        monkeypatch.setenv("EXPCONV_THREADS", "zero")
        with pytest.raises(ValueError):
            suites.threads_from_env()
        monkeypatch.delenv("EXPCONV_THREADS")
        assert suites.threads_from_env(1) == 1


class TestSuites:
    def test_thread_invariance(self):
        base = dict(suite="thm1", d=[1, 2], gamma=[0.0], m=[1.0], variant=["pure"], x=[1.0, 5.0], n=[2])
        a = suites.run_suite(suites.SuiteConfig(**base, threads=1))
        b = suites.run_suite(suites.SuiteConfig(**base, threads=2))
        strip = lambda rep: [r.row()[:-2] for r in rep.records]  # noqa: E731
        assert strip(a) == strip(b)
        assert a.exit_code == 0

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            suites.run_suite(suites.SuiteConfig(suite="nope"))

    def test_errors_give_exit_two(self, monkeypatch):
        def boom(spec, cfg, skipped):
            raise RuntimeError("boom")
        monkeypatch.setitem(suites.PER_SPEC, "assumptions", boom)
        rep = suites.run_suite(suites.SuiteConfig(suite="assumptions", d=[1], gamma=[0.0], variant=["pure"]))
        assert rep.exit_code == 2 and rep.errors


class TestCommands:
    def test_wright(self, capsys):
        code, out, _ = run(capsys, "eval", "wright", "--rho", "1", "--beta", "0", "--t", "1")
        assert code == 0 and abs(float(out.splitlines()[0]) - 1.5906368) < 1e-6

    def test_gn1d(self, capsys):
        code, out, _ = run(capsys, "eval", "gn1d", "--gamma", "0.5", "--n", "3", "--x", "4")
        assert code == 0 and float(out) == pytest.approx(8 * np.pi, rel=1e-14)

    def test_constants(self, capsys):
        code, out, _ = run(capsys, "eval", "constants", "--d", "2", "--gamma", "0.5", "--m", "1")
        keys = [line.split(",")[0] for line in out.splitlines()]
        assert code == 0 and "r0" in keys and "M3" in keys

    def test_constants_subcommand(self, capsys):
        code, out, _ = run(capsys, "constants", "--d", "1")
        assert code == 0 and out.startswith("C1,")

    def test_fnstar(self, capsys):
        code, out, _ = run(capsys, "eval", "fnstar", "--n", "2", "--x", "2")
        assert code == 0 and float(out) == pytest.approx(3 * np.exp(-2), rel=1e-9)

    def test_table_csv(self, capsys):
        code, out, _ = run(capsys, "eval", "Gn", "--n", "2", "--table")
        assert code == 0 and out.splitlines()[2] == "r,value"

    def test_missing_argument(self, capsys):
        code, _, err = run(capsys, "eval", "fnstar", "--x", "2")
        assert code == 2 and "--n" in err

    def test_verify_pass(self, capsys, tmp_path):
        out_csv = tmp_path / "r.csv"
        code, out, _ = run(capsys, "verify", "--suite", "thm1", "--d", "1", "--gamma", "0", "--m", "1",
                           "--out", str(out_csv))
        assert code == 0 and "fail=0" in out
        assert out_csv.read_text().splitlines()[0] == ",".join(FIELDS)

    def test_verify_unknown_suite(self, capsys):
        code, _, err = run(capsys, "verify", "--suite", "nope")
        assert code == 2 and "unknown suite" in err

    def test_verify_invalid_spec(self, capsys):
        code, _, err = run(capsys, "verify", "--suite", "thm1", "--d", "1", "--gamma", "1.5")
        assert code == 2

    def test_verify_fail_exit_one(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "th1d", "--tol", "-0.5")
        assert code == 1 and "FAIL" in out

    def test_bad_subcommand(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_plot_empty_range(self, capsys):
        code, out, _ = run(capsys, "plot-data", "sandwich-plambda", "--lambda", "1", "--xmin", "5", "--xmax", "1")
        assert code == 0 and out == "x,oracle,lower,upper\n"

    def test_plot_sandwich(self, capsys):
        code, out, _ = run(capsys, "plot-data", "sandwich-plambda", "--d", "1", "--gamma", "0", "--m", "1",
                           "--lambda", "1", "--xmin", "1", "--xmax", "60", "--points", "12")
        rows = np.array([[float(v) for v in line.split(",")] for line in out.splitlines()[1:]])
        assert code == 0 and rows.shape == (12, 4)
        assert np.all(rows[:, 2] <= rows[:, 1]) and np.all(rows[:, 1] <= rows[:, 3])
        assert np.all(np.diff(rows[:, 1]) < 0)

    def test_plot_nstar(self, capsys):
        code, out, _ = run(capsys, "plot-data", "nstar", "--n", "2", "--xmin", "1", "--xmax", "20",
                           "--points", "5")
        rows = np.array([[float(v) for v in line.split(",")] for line in out.splitlines()[1:]])
        assert code == 0 and np.all(rows[:, 2] <= rows[:, 1]) and np.all(rows[:, 1] <= rows[:, 3])

    def test_sample(self, capsys, tmp_path):
        p = tmp_path / "s.csv"
        code, out, _ = run(capsys, "sample", "--lambda", "1", "--count", "1000", "--seed", "4", "--out", str(p))
        assert code == 0 and "atom_count=" in out
        assert len(p.read_text().splitlines()) == 1002
