import io
import json
import subprocess
import sys

import numpy as np
import pytest

from canondual.cli import curve_csv, main
from canondual.model import Problem
from canondual.oracle import count_local_extrema
from canondual.problem_file import dump_problem

from .conftest import FIXTURES, KKT_POINTS, SUB_POINTS


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def table_body(text):
    return [ln for ln in text.splitlines()[2:] if ln and not ln.startswith("note:")]


def curve_values(text):
    rows = [ln.split(",") for ln in text.strip().split("\n")[1:]]
    return np.array(rows, dtype=float)


@pytest.fixture(scope="module")
def ex1():
    return FIXTURES / "example1.json"


class TestSolve:
    def test_double_well_table(self, ex1):
        code, text = run("solve", ex1)
        assert code == 0
        rows = table_body(text)
        assert len(rows) == 4
        xs = sorted(float(r.split()[1]) for r in rows)
        np.testing.assert_allclose(xs, sorted(KKT_POINTS[:, 0]), atol=0.01)
        assert "GlobalMinCertified" in text and "BiggestLocalMaxCertified" in text
        assert "note: global-minimum certificates assume" in text

    def test_table_byte_stable(self, ex1):
        assert run("solve", ex1)[1] == run("solve", ex1)[1]

    def test_json_report(self, ex1):
        code, text = run("solve", ex1, "--json")
        rep = json.loads(text)
        assert code == 0
        assert set(rep) == {"problem", "config", "rows", "caveats", "diagnostics", "timings"}
        assert all(not r["flagged"] for r in rep["rows"])
        assert rep["config"]["x_box"] == [-6.0, 6.0]

    def test_convex_qp(self, fixtures_dir):
        code, text = run("solve", fixtures_dir / "convex_qp.json")
        assert code == 0
        assert len(table_body(text)) == 1

    def test_infeasible_exit_3(self, fixtures_dir, capsys):
        code, _ = run("solve", fixtures_dir / "infeasible.json", "--grid", 5)
        assert code == 3
        assert "NoConvergence" in capsys.readouterr().err

    def test_uncertified_exit_2(self, tmp_path):
        # concave core: the only critical point is a maximum
        path = tmp_path / "concave.json"
        dump_problem(Problem([[-1.0]], [0.0]), path)
        assert run("solve", path, "--grid", 3)[0] == 2

    def test_seed_box_option(self, ex1):
        code, text = run("solve", ex1, "--seed-box", "0:6", "--mult-box", "-1:1", "--grid", 11)
        assert code == 0
        xs = [float(r.split()[1]) for r in table_body(text)]
        assert min(xs, key=lambda x: abs(x - 1.023)) == pytest.approx(1.023, abs=0.01)


class TestAuglag:
    def test_subtable(self, ex1):
        code, text = run("auglag", ex1, "--mu0", 1, "--nu0", 5, "--subtable")
        assert code == 0
        rows = table_body(text)
        assert len(rows) == 7
        xs = sorted(float(r.split()[1]) for r in rows)
        np.testing.assert_allclose(xs, sorted(SUB_POINTS[:, 0]), atol=0.01)

    def test_one_iteration(self, ex1):
        code, text = run("auglag", ex1, "--mu0", 1, "--nu0", 5, "--iters", 1, "--json")
        hist = json.loads(text)["history"]
        assert code == 2 and len(hist) == 1
        assert hist[0]["mu_next"][0] == pytest.approx(0.09, abs=0.01)

    def test_optimal_start(self, ex1):
        code, text = run("auglag", ex1, "--mu0", 0.004, "--nu0", 5, "--iters", 1, "--json")
        assert json.loads(text)["history"][0]["h_abs"] <= 1e-3

    def test_full_loop(self, ex1):
        code, text = run("auglag", ex1)
        assert code == 0
        assert text.splitlines()[-1].endswith("yes")

    def test_needs_equality(self, fixtures_dir):
        assert run("auglag", fixtures_dir / "convex_qp.json")[0] == 64


class TestCurve:
    def test_objective_five_samples(self, ex1):
        code, text = run("curve", ex1, "--range", "-6:6", "--samples", 5)
        assert code == 0
        assert text.startswith("x,value\n") and "\r" not in text
        v = curve_values(text)
        np.testing.assert_array_equal(v[:, 0], [-6, -3, 0, 3, 6])
        np.testing.assert_array_equal(v[:, 1], 0.5 * v[:, 0] ** 2 - v[:, 0])

    def test_seventeen_digits(self, example1):
        line = curve_csv(example1, "objective", 0.0, 1.0, 4).splitlines()[2]
        assert line == f"{1 / 3:.17g},{0.5 / 9 - 1 / 3:.17g}"

    def test_lagrangian_double_well(self, example1):
        v = curve_values(curve_csv(example1, "lagrangian", -6.0, 6.0, 1201, mu=1.0))
        assert count_local_extrema(v[:, 1])[0] == 2

    def test_auglag_nonconvex(self, example1):
        v = curve_values(curve_csv(example1, "auglag", -6.0, 6.0, 1201, mu=1.0, nu=5.0))
        minima, maxima = count_local_extrema(v[:, 1])
        assert minima >= 2 and maxima >= 1

    def test_constraint(self, example1):
        v = curve_values(curve_csv(example1, "constraint:0", -6.0, 6.0, 3))
        np.testing.assert_array_equal(v[:, 1], [-15.0 + 0.5 * 144, 3.0, -15.0 + 0.5 * 144])

    def test_out_file(self, ex1, tmp_path):
        path = tmp_path / "c.csv"
        run("curve", ex1, "--samples", 3, "--out", path)
        assert path.read_bytes().count(b"\n") == 4

    def test_two_dimensional_rejected(self, tmp_path):
        path = tmp_path / "p2.json"
        dump_problem(Problem(np.eye(2), [0.0, 0.0]), path)
        assert run("curve", path)[0] == 65

    def test_auglag_needs_nu(self, ex1):
        assert run("curve", ex1, "--function", "auglag")[0] == 64


class TestOracle:
    def test_grid_minimum(self, ex1):
        code, text = run("oracle", ex1, "--box", "-6:6", "--density", 200001)
        assert code == 0
        f = float(text.split("f=")[1].split()[0])
        assert f == pytest.approx(-0.5, abs=0.02)

    def test_against_report(self, ex1, tmp_path):
        report = tmp_path / "report.json"
        report.write_text(run("solve", ex1, "--json")[1])
        code, text = run("oracle", ex1, "--against", report)
        assert code == 0
        assert text.strip().splitlines()[-1] == "certification consistent"

    def test_against_mislabeled_report(self, ex1, tmp_path):
        rep = json.loads(run("solve", ex1, "--json")[1])
        for r in rep["rows"]:
            if r["x"][0] > 4:
                r["classification"] = "GlobalMinCertified"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(rep))
        code, text = run("oracle", ex1, "--against", path)
        assert code == 70
        assert "certification contradicted" in text

    def test_infeasible(self, fixtures_dir):
        assert run("oracle", fixtures_dir / "infeasible.json", "--density", 1001)[0] == 2


class TestExitCodes:
    def test_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["solve"])
        assert exc.value.code == 64

    def test_bad_range(self, ex1):
        with pytest.raises(SystemExit) as exc:
            main(["solve", str(ex1), "--seed-box", "6:-6"])
        assert exc.value.code == 64

    def test_missing_file(self, tmp_path):
        assert run("solve", tmp_path / "nope.json")[0] == 65

    def test_schema_violation(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 1, "A": [[1.0]], "c": [1.0], "typo": 0}')
        assert run("solve", path)[0] == 65

    def test_module_entry_point(self, fixtures_dir):
        proc = subprocess.run(
            [sys.executable, "-m", "canondual", "solve", str(fixtures_dir / "convex_qp.json"), "--grid", "3"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "GlobalMinCertified" in proc.stdout
