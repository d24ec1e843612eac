"""Command-line interface: JSON output, exit codes, determinism."""

import csv
import json

import numpy as np
import pytest

from maxmin_auction import PiecewiseCdf
from maxmin_auction.cli import dump_json, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestDumpJson:
    def test_twelve_significant_digits(self):
        s = dump_json({"v": 0.33851433326379477401})
        assert '"v": 0.338514333264' in s

    def test_types(self):
        s = dump_json({"i": 3, "b": True, "n": None, "l": [1.5, "x"], "nan": float("nan")})
        parsed = json.loads(s)
        assert parsed == {"i": 3, "b": True, "n": None, "l": [1.5, "x"], "nan": None}


class TestSolve:
    def test_solve_json(self, capsys):
        code, out = run_cli(capsys, "solve", "--mu", "0.5")
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == 1
        assert payload["revenue_guarantee"] == pytest.approx(0.3385, abs=5e-4)

    def test_solve_mu_075(self, capsys):
        code, out = run_cli(capsys, "solve", "--mu", "0.75")
        assert code == 0
        assert json.loads(out)["a"] == pytest.approx(0.38240356960216, abs=1e-9)

    def test_out_of_domain_exits_2(self, capsys):
        code, _ = run_cli(capsys, "solve", "--mu", "1.5")
        assert code == 2

    def test_byte_identical_reruns(self, capsys):
        _, out1 = run_cli(capsys, "solve", "--mu", "0.5")
        _, out2 = run_cli(capsys, "solve", "--mu", "0.5")
        assert out1 == out2


class TestCurves:
    def test_reserve_curve(self, capsys, tmp_path):
        out_path = tmp_path / "h.csv"
        code, _ = run_cli(
            capsys, "curves", "--mu", "0.5", "--grid", "1000", "--out", str(out_path)
        )
        assert code == 0
        with open(out_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "F"]
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        assert data.shape == (1000, 2)
        assert np.all(np.diff(data[:, 1]) > 0.0)
        assert data[-1, 0] == 1.0 and data[-1, 1] == 1.0

    def test_signal_curve_carries_atom(self, capsys, tmp_path):
        out_path = tmp_path / "g.csv"
        code, _ = run_cli(
            capsys, "curves", "--mu", "0.5", "--which", "signal", "--out", str(out_path)
        )
        assert code == 0
        with open(out_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "F", "atom_mass"]
        assert float(rows[-1][2]) == pytest.approx(0.186682308851, abs=1e-9)

    def test_adversary_curve_close_to_signal_cdf(self, capsys, tmp_path):
        out_path = tmp_path / "adv.csv"
        code, _ = run_cli(
            capsys,
            "curves",
            "--mu",
            "0.5",
            "--which",
            "adversary",
            "--grid",
            "500",
            "--out",
            str(out_path),
        )
        assert code == 0
        back = PiecewiseCdf.from_csv(out_path)
        from maxmin_auction import ModelParams, signal_cdf, solve_a

        c = solve_a(ModelParams(mu=0.5))
        xs = np.linspace(c.a + 0.02, 0.98, 200)
        assert np.max(np.abs(back.cdf(xs) - signal_cdf(c, xs))) <= 0.011

    def test_unwritable_path_exits_4(self, capsys):
        code, _ = run_cli(
            capsys, "curves", "--mu", "0.5", "--out", "/nonexistent-dir/h.csv"
        )
        assert code == 4


class TestSimulate:
    def test_simulate_default_signal(self, capsys):
        code, out = run_cli(
            capsys, "simulate", "--mu", "0.5", "--samples", "50000", "--seed", "3"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["method"] == "monte-carlo"
        assert abs(payload["value"] - 0.3385) < 5.0 * payload["std_error"] + 5e-4

    def test_env_seed_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("MAXMIN_SEED", "42")
        _, out_env = run_cli(capsys, "simulate", "--mu", "0.5", "--samples", "1000")
        monkeypatch.delenv("MAXMIN_SEED")
        _, out_explicit = run_cli(
            capsys, "simulate", "--mu", "0.5", "--samples", "1000", "--seed", "42"
        )
        assert json.loads(out_env)["value"] == json.loads(out_explicit)["value"]

    def test_signal_csv(self, capsys, tmp_path):
        path = tmp_path / "signal.csv"
        PiecewiseCdf.from_discrete([0.0, 1.0], [0.5, 0.5]).to_csv(path)
        code, out = run_cli(
            capsys,
            "simulate",
            "--mu",
            "0.5",
            "--samples",
            "20000",
            "--signal-csv",
            str(path),
        )
        assert code == 0
        # Bernoulli signals: both-at-one ties pay 1, a single winner pays the
        # expected reserve, so revenue = 1/4 + 1/2 * E[r]
        payload = json.loads(out)
        import oracles

        expected = 0.25 + 0.5 * oracles.MEAN_RESERVE_MU_05
        assert payload["value"] == pytest.approx(expected, abs=0.02)


class TestAdversaryCommand:
    def test_mean_mode(self, capsys):
        code, out = run_cli(capsys, "adversary", "--mu", "0.5", "--grid-k", "500")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(payload["revenue_guarantee"], abs=2e-3)

    def test_second_moment_mode(self, capsys):
        code, out = run_cli(capsys, "adversary", "--delta", "0.5")
        assert code == 0
        payload = json.loads(out)
        assert payload["constraint"] == "second-moment"
        assert payload["value"] == pytest.approx(0.5, abs=1e-9)

    def test_mu_and_delta_conflict(self, capsys):
        code, _ = run_cli(capsys, "adversary", "--mu", "0.5", "--delta", "0.5")
        assert code == 2


class TestUpperBoundCommand:
    def test_bound_json_and_dump(self, capsys, tmp_path):
        dump = tmp_path / "mech.json"
        code, out = run_cli(
            capsys,
            "upper-bound",
            "--mu",
            "0.5",
            "--grid-n",
            "25",
            "--dump-mechanism",
            str(dump),
        )
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["gap"]) <= 0.03
        mech = json.loads(dump.read_text())
        assert len(mech["q1"]) == 25


class TestMpsCheckCommand:
    def test_failing_prior_reports_but_exits_zero(self, capsys, tmp_path):
        path = tmp_path / "prior.csv"
        PiecewiseCdf.from_discrete([0.0, 0.5, 1.0], [0.25, 0.5, 0.25]).to_csv(path)
        code, out = run_cli(capsys, "mps-check", "--mu", "0.5", "--prior", str(path))
        assert code == 0
        assert json.loads(out)["passed"] is False

    def test_mean_mismatch_exits_2(self, capsys, tmp_path):
        path = tmp_path / "prior.csv"
        PiecewiseCdf.from_discrete([0.0, 1.0], [0.4, 0.6]).to_csv(path)
        code, _ = run_cli(capsys, "mps-check", "--mu", "0.5", "--prior", str(path))
        assert code == 2


class TestSecondMomentCommand:
    def test_json(self, capsys):
        code, out = run_cli(capsys, "second-moment", "--delta", "0.5")
        assert code == 0
        payload = json.loads(out)
        assert payload["guarantee"] == 0.5
        assert payload["a"] == pytest.approx(1.0 - np.sqrt(0.5), abs=1e-12)

    def test_bad_delta_exits_2(self, capsys):
        code, _ = run_cli(capsys, "second-moment", "--delta", "1.5")
        assert code == 2


class TestVerifyCommand:
    def test_all_checks_pass_and_deterministic(self, capsys):
        args = (
            "verify",
            "--mu",
            "0.5",
            "--seed",
            "7",
            "--samples",
            "30000",
            "--grid-n",
            "20",
        )
        code1, out1 = run_cli(capsys, *args)
        code2, out2 = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        payload = json.loads(out1)
        assert payload["all_passed"] is True
        names = {ch["name"] for ch in payload["checks"]}
        assert {
            "root_residual",
            "ode_residual",
            "pointwise_saddle",
            "mc_vs_quadrature",
            "lp_upper_bound",
            "p1p2_zero_atom",
            "p1p2_linear_ramp",
            "dominated_below_guarantee",
            "payment_identity",
        } <= names

    def test_other_mean(self, capsys):
        code, out = run_cli(
            capsys,
            "verify",
            "--mu",
            "0.9",
            "--seed",
            "1",
            "--samples",
            "30000",
            "--grid-n",
            "20",
        )
        assert code == 0
        assert json.loads(out)["all_passed"] is True
