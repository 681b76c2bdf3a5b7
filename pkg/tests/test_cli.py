import numpy as np
import pytest

from src.cli import run
from src.cli.run_config import Command, build_run_config
from src.localfact import Strategy
from src.odeparallel import parse_trajectory
from src.shared.errors import InvalidConfig
from src.structmat import MatrixKind, make, parse_matrix, parse_vector, write_matrix


def error_lines(err):
    return [line for line in err.splitlines() if line.startswith("ERROR ")]


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "a.mat"
    assert run(["generate", "--kind", "banded", "--n", "40", "--seed", "1", "--dominance", "2",
                "-o", str(path)]) == 0
    return path


class TestGenerate:
    def test_writes_structmat(self, matrix_file):
        A = parse_matrix(matrix_file.read_text())
        assert A.kind == MatrixKind.BANDED and A.n == 40
        assert A.meta.get("seed") == "1"

    def test_stdout_and_corner(self, capsys):
        assert run(["generate", "--kind", "babd", "--n", "12", "--m", "2", "--corner", "2x2"]) == 0
        A = parse_matrix(capsys.readouterr().out)
        assert A.corner.shape == (2, 2)

    def test_bad_corner_token(self, capsys):
        assert run(["generate", "--kind", "babd", "--n", "12", "--m", "2", "--corner", "two"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")

    def test_unknown_kind(self, capsys):
        assert run(["generate", "--kind", "pentadiagonal", "--n", "12"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")


class TestSolve:
    def test_solve_prints_q_and_residual(self, matrix_file, tmp_path, capsys):
        out = tmp_path / "x.vec"
        assert run(["solve", "-m", str(matrix_file), "--p", "4", "-o", str(out)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "q 3"
        assert lines[1].startswith("residual ")
        assert float(lines[1].split()[1]) <= 1e-10
        assert parse_vector(out.read_text()).shape == (40,)

    @pytest.mark.parametrize("strategy", ["lu", "lud", "cr", "lupivot", "qr"])
    def test_verify_passes(self, matrix_file, capsys, strategy):
        code = run(["verify", "-m", str(matrix_file), "--p", "3", "-f", "random:5", "--strategy", strategy])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[-1].endswith("PASS")

    def test_verify_identity(self, tmp_path, capsys):
        path = tmp_path / "eye.mat"
        path.write_text(write_matrix(make("banded", 8, 1, 1, 1, [0] * 7 + [1] * 8 + [0] * 7)))
        assert run(["verify", "-m", str(path), "--p", "2"]) == 0
        assert capsys.readouterr().out.splitlines()[-1] == "max_rel_error 0.000000e+00 PASS"

    def test_single_partition_rejected(self, matrix_file, capsys):
        assert run(["solve", "-m", str(matrix_file), "--p", "1"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR InvalidConfig")

    def test_arce_needs_abd(self, matrix_file, capsys):
        assert run(["solve", "-m", str(matrix_file), "--p", "2", "--strategy", "arce"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR InvalidConfig")

    def test_zero_pivot_is_numeric_failure(self, tmp_path, capsys):
        path = tmp_path / "minor.mat"
        A = make("banded", 7, 1, 1, 1, [1.0] * 6 + [1, 1, 1, 4, 4, 4, 4] + [1.0] * 6)
        path.write_text(write_matrix(A))
        assert run(["solve", "-m", str(path), "--p", "2"]) == 2
        line = error_lines(capsys.readouterr().err)[0]
        assert line.startswith("ERROR ZeroPivot partition 1:")
        assert run(["solve", "-m", str(path), "--p", "2", "--strategy", "lupivot"]) == 0

    def test_missing_file(self, tmp_path, capsys):
        assert run(["solve", "-m", str(tmp_path / "absent.mat"), "--p", "2"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR IOError")

    def test_malformed_matrix(self, tmp_path, capsys):
        path = tmp_path / "bad.mat"
        path.write_text("STRUCTMAT 1 banded 3 1 0 0\n1\n")
        assert run(["solve", "-m", str(path), "--p", "2"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")


class TestOde:
    def test_trajectory_on_stdout(self, capsys):
        assert run(["ode", "--p", "4", "--N", "25"]) == 0
        traj = parse_trajectory(capsys.readouterr().out)
        assert traj.grid.p == 4 and traj.grid.N == 25
        assert traj.endpoint[0] == pytest.approx(1.01 ** -100, rel=1e-12)

    def test_output_file_prints_endpoint(self, tmp_path, capsys):
        path = tmp_path / "traj.txt"
        assert run(["ode", "--problem", "random", "--m", "3", "--forced", "--p", "3", "--N", "10",
                    "--method", "trapezoidal", "-o", str(path)]) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("endpoint ")
        values = np.array([float(v) for v in line.split()[1:]])
        np.testing.assert_array_equal(values, parse_trajectory(path.read_text()).endpoint)

    def test_sequential_flag(self, capsys):
        assert run(["ode", "--p", "2", "--N", "5", "--sequential"]) == 0
        assert parse_trajectory(capsys.readouterr().out).endpoint[0] == pytest.approx(1.1 ** -10, rel=1e-14)

    def test_explicit_coarse_points(self, capsys):
        assert run(["ode", "--p", "2", "--N", "4", "--tau", "0,0.2,1"]) == 0
        traj = parse_trajectory(capsys.readouterr().out)
        np.testing.assert_array_equal(traj.grid.tau, [0.0, 0.2, 1.0])

    def test_unknown_method(self, capsys):
        assert run(["ode", "--method", "rk4"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")

    def test_step_too_large(self, capsys):
        assert run(["ode", "--lam", "1", "--p", "1", "--N", "1"]) == 2
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR StepTooLarge")


class TestParareal:
    def test_history_csv(self, tmp_path, capsys):
        code = run(["parareal", "--m", "8", "--p", "4", "--N", "10", "--tol", "1e-10",
                    "--config", str(tmp_path / "none.json")])
        lines = capsys.readouterr().out.splitlines()
        assert code == 0
        assert lines[0] == "iter,update_norm"
        assert 1 <= len(lines) - 1 <= 4
        assert float(lines[-1].split(",")[1]) <= 1e-10

    def test_not_converged_exits_two(self, tmp_path, capsys):
        code = run(["parareal", "--m", "8", "--p", "4", "--N", "10", "--tol", "1e-14", "--max-iter", "1",
                    "--config", str(tmp_path / "none.json")])
        captured = capsys.readouterr()
        assert code == 2
        assert len(captured.out.splitlines()) == 2
        assert error_lines(captured.err)[0].startswith("ERROR NotConverged")

    def test_trajectory_file(self, tmp_path, capsys):
        traj_path = tmp_path / "traj.txt"
        assert run(["parareal", "--m", "6", "--p", "3", "--N", "6", "--coarse", "expm",
                    "--config", str(tmp_path / "none.json"), "--trajectory", str(traj_path)]) == 0
        traj = parse_trajectory(traj_path.read_text())
        assert traj.y.shape == (19, 6)


class TestBenchAndPlan:
    def test_bench_csv(self, capsys):
        assert run(["bench", "--n", "200", "--p", "2", "--workers-list", "1,2", "--repeats", "1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "phase,n,p,workers,median_seconds,op_count"
        rows = [line.split(",") for line in lines[1:] if not line.startswith("#")]
        assert len(rows) == 10
        assert {row[0] for row in rows} == {"factor", "forward", "reduced", "backward", "total"}
        assert all(row[1] == "200" and row[2] == "2" for row in rows)
        reduced = [row for row in rows if row[0] == "reduced"]
        assert all(int(row[5]) > 0 for row in reduced)
        assert any(line.startswith("# speedup_w2 ") for line in lines)

    def test_plan_from_kind(self, capsys):
        assert run(["plan", "--kind", "banded", "--n", "9", "--p", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1:] == ["A1 rows 1-4", "a1 rows 5-5", "A2 rows 6-9"]

    def test_plan_from_file(self, matrix_file, capsys):
        assert run(["plan", "-m", str(matrix_file), "--p", "4"]) == 0
        assert "separators=3" in capsys.readouterr().out

    def test_plan_needs_a_matrix(self, capsys):
        assert run(["plan", "--p", "2"]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")

    def test_missing_subcommand(self, capsys):
        assert run([]) == 1
        assert error_lines(capsys.readouterr().err)[0].startswith("ERROR ParseError")


class TestRunConfig:
    def test_valid_selection(self):
        cfg = build_run_config(command="solve", kind="abd", strategy="arce", p=4, s=1, r=0)
        assert cfg.command == Command.SOLVE
        assert cfg.strategy == Strategy.ARCE and cfg.kind == MatrixKind.ABD

    @pytest.mark.parametrize("values", [
        dict(command="solve", p=1),
        dict(command="bench", p=0),
        dict(command="verify", kind="banded", strategy="arce", p=2),
        dict(command="solve", strategy="cr", s=2, r=1, p=2),
        dict(command="generate", kind="banded"),
        dict(command="ode", workers=0),
        dict(command="launch"),
    ])
    def test_rejects(self, values):
        with pytest.raises(InvalidConfig):
            build_run_config(**values)

    def test_ode_allows_one_window(self):
        assert build_run_config(command="ode", p=1).p == 1
