import csv
import io
import json

import pytest

from rtr_shuffle import acceptance
from rtr_shuffle.cli import run_command


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eig_limit(capsys):
    code, out, _ = run(capsys, "eig", "--limit")
    assert code == 0
    data = json.loads(out)
    assert data["method"] == "power+poly"
    assert data["below_threshold"] is True
    assert data["lambda"] < -0.6526
    assert "residual" in data and "iterations" in data
    assert data["config"]["limit"] is True


def test_eig_matrix_csv(capsys):
    code, out, _ = run(capsys, "eig", "--n", "10", "--form", "stochastic", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["from", "0", "1", "2", "3", "4", "5", "6", "7", "inf"]
    assert len(rows) == 10
    assert [float(v) for v in rows[4][1:]] == pytest.approx([0, .2, .16, .46, .18, 0, 0, 0, 0])


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--n", "52", "--eps", "0.25")
    data = json.loads(out)
    assert code == 0 and data["t_star"] == 424
    assert data["analytic_bound_at_t_star"] <= 0.25


def test_tv_csv(capsys):
    code, out, _ = run(capsys, "tv", "--n", "3", "--t-max", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["t", "d_exact", "adjacent_tv"]
    assert [float(v) for v in rows[1]] == pytest.approx([0, 5 / 6, 1.0])
    assert [float(v) for v in rows[2]] == pytest.approx([1, 5 / 18, 1 / 3])


def test_couple_single_path(capsys):
    code, out, _ = run(capsys, "couple", "--n", "4", "--deck", "1,3,4,2", "--path", "1>2;2>3;3>3",
                       "--variant", "strict")
    data = json.loads(out)
    assert code == 0
    assert data["T"] == 1 and data["coalesced"] is False
    assert data["x_final"] == "3,2,4,1" and data["x_prime_final"] == "3,1,2,4"
    assert data["config"]["good_time_rule"] == "strict"


def test_couple_infinite_T_is_string(capsys):
    _, out, _ = run(capsys, "couple", "--n", "2", "--path", "2>2")
    assert json.loads(out)["T"] == "inf"


def test_couple_estimates_echo_config(capsys):
    code, out, _ = run(capsys, "couple", "--n", "5", "--k", "10", "--samples", "3000", "--seed", "4",
                       "--threads", "1")
    data = json.loads(out)
    assert code == 0
    assert data["config"]["seed"] == 4 and data["config"]["queue_membership"] == "self-exclusive"
    assert 0 <= data["overall"]["point"] <= 1
    _, again, _ = run(capsys, "couple", "--n", "5", "--k", "10", "--samples", "3000", "--seed", "4",
                      "--threads", "2")
    assert json.loads(again)["overall"] == data["overall"]


def test_couple_curve_csv_has_empty_cells_for_nothing(capsys):
    code, out, _ = run(capsys, "couple", "--n", "4", "--k", "0,4", "--samples", "500", "--threads", "1",
                       "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0][:3] == ["k", "empirical_bound", "analytic_bound"]
    assert float(rows[1][1]) == 3.0


def test_queue_stats(capsys):
    code, out, _ = run(capsys, "queue-stats", "--n", "10", "--steps", "20000", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:4] == ["l", "visits", "q_hat", "q"]


def test_dominance(capsys):
    code, out, _ = run(capsys, "dominance", "--n", "12", "--t-max", "40", "--samples", "2000")
    assert code == 0 and "worst_violation" in json.loads(out)


def test_usage_errors(capsys):
    assert run(capsys, "bound", "--n", "5", "--eps", "2")[0] == 2
    assert run(capsys, "eig", "--n", "5")[0] == 2
    code, _, err = run(capsys, "tv", "--n", "3", "--bogus")
    assert code == 2 and "usage" in err
    assert run(capsys, "couple", "--n", "3", "--path", "1>9")[0] == 2
    assert run(capsys, "tv", "--n", "9", "--t-max", "1")[0] == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    assert run_command(["bound", "--n", "10", "--eps", "0.5", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["config"]["n"] == 10


def test_verify_exit_codes(monkeypatch, capsys):
    fake = [acceptance.Criterion(1, "a", True), acceptance.Criterion(2, "b", True)]
    monkeypatch.setattr(acceptance, "run_all", lambda *a, **k: fake)
    assert run_command(["verify", "--quick"]) == 0
    fake.append(acceptance.Criterion(3, "c", False))
    assert run_command(["verify", "--quick"]) == 1
