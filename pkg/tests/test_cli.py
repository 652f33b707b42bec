import json

import numpy as np
import pytest

from erasure_cg.cli import main
from erasure_cg.encoding import EncodingMatrix


def test_solve_with_plan_file(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"events": [{"iteration": 3, "victim_indices": [2, 5]}]}))
    code = main(["solve", "--matrix", "ltridiag:20", "--k", "2", "--fault-plan", str(plan),
                 "--out-dir", str(tmp_path / "out"), "--trace"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("matrix,n,k,seed,iterations")
    assert out[1].split(",")[5] == "true"
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["faulty_indices"] == [2, 5] and summary["fault_point"] == 3
    assert (tmp_path / "out" / "figure.csv").exists()


def test_solve_without_plan_injects_nothing(capsys):
    assert main(["solve", "--matrix", "ltridiag:20", "--k", "1"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[-1] == ""


def test_experiment_and_table(tmp_path, capsys):
    assert main(["experiment", "--matrix", "ltridiag:30", "--k-frac", "0.2", "--seed", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[1].split(",")[2] == "6"
    assert main(["table", "--matrix", "ltridiag:30", "--k-list", "0", "10%",
                 "--seeds", "2", "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "table.csv").read_text().splitlines()) == 5
    assert len((tmp_path / "medians.csv").read_text().splitlines()) == 3


def test_check_command(capsys):
    assert main(["check", "--matrix", "ltridiag:20", "--k", "2", "--samples", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_check_fails_on_nonsymmetric(tmp_path, capsys):
    path = tmp_path / "ns.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 2 1.0\n")
    assert main(["check", "--matrix", str(path), "--k", "0"]) == 2


@pytest.mark.parametrize("argv", [
    ["solve", "--matrix", "nowhere-to-be-found"],
    ["solve", "--matrix", "ltridiag:10", "--k", "20"],
    ["experiment", "--matrix", "ltridiag:10", "--k", "1", "--k-frac", "0.5"],
    ["solve", "--matrix", "ltridiag:10", "--trace"],
])
def test_config_errors_exit_1(argv):
    assert main(argv) == 1


def test_capacity_error_exit_1(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"events": [{"iteration": 1, "victim_indices": [0, 1]}]}))
    assert main(["solve", "--matrix", "ltridiag:10", "--k", "1",
                 "--fault-plan", str(plan)]) == 1


def test_numerical_failure_exit_2(tmp_path):
    rhs = tmp_path / "b.mtx"
    rhs.write_text("%%MatrixMarket matrix array real general\n2 1\nnan\n1.0\n")
    assert main(["solve", "--matrix", "ltridiag:2", "--rhs", str(rhs)]) == 2


def test_unrecoverable_exit_3(tmp_path, monkeypatch):
    # Gaussian rows are independent almost surely, so swap in an encoding with
    # a zero row at the victim to exercise the exit path.
    import erasure_cg.harness as harness

    def degenerate(n, k, seed):
        entries = np.ones((n, k))
        entries[5] = 0.0
        return EncodingMatrix(n, k, entries, seed)

    monkeypatch.setattr(harness, "gen_gaussian_encoding", degenerate)
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"events": [{"iteration": 1, "victim_indices": [5]}]}))
    assert main(["solve", "--matrix", "ltridiag:10", "--k", "1",
                 "--fault-plan", str(plan)]) == 3
