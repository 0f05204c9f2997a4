#!/usr/bin/env python3
"""
Command-line tests
Each subcommand run through main() against the bundled polygon files.
"""

import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import pytest

# project root on the import path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.cli import commands
from src.cli.commands import main
from src.cli.io_models import parse_spec
from src.utils.errors import PolygonDataError

POLYGONS = Path(__file__).resolve().parent.parent / "data" / "polygons"


def polygon(name: str) -> str:
    return str(POLYGONS / f"{name}.json")


def csv_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


class TestCharpolyCommand:
    """charpoly: JSON on stdout or in --out"""

    def test_square(self, capsys):
        print("\n=== steklov charpoly square ===")
        assert main(["charpoly", polygon("square")]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document == {"terms": [[2, 4], [4, 1]], "constant": 3}
        print("✅ exact integer coefficients")

    def test_equilateral(self, capsys):
        assert main(["charpoly", polygon("equilateral_triangle")]) == 0
        assert json.loads(capsys.readouterr().out) == {"terms": [[1, 1]], "constant": 1}

    def test_deterministic(self, capsys):
        main(["charpoly", polygon("obtuse_hexagon")])
        first = capsys.readouterr().out
        main(["charpoly", polygon("obtuse_hexagon")])
        assert capsys.readouterr().out == first

    def test_out_directory(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert main(["charpoly", polygon("square"), "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads((out / "charpoly.json").read_text())["constant"] == 3

        report = json.loads((out / "report.json").read_text())
        assert report["command"] == "charpoly"
        assert len(report["input_sha256"]) == 64
        assert report["exit_code"] == 0
        assert report["verdicts"]["exact"] is True
        assert "geometry_tol" in report["tolerances"]


class TestInputErrors:
    """Invalid input exits 2 with a diagnostic"""

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"lengths": [1, 1, 1], "angles_pi": ', encoding="utf-8")
        assert main(["charpoly", str(bad)]) == 2
        assert "invalid polygon spec" in capsys.readouterr().err

    def test_schema_violation_names_location(self):
        with pytest.raises(PolygonDataError, match="lengths"):
            parse_spec('{"lengths": [1, "x"], "angles_pi": ["1/2", "1/2"]}')

    def test_missing_file(self, tmp_path):
        assert main(["charpoly", str(tmp_path / "nowhere.json")]) == 2

    def test_non_closing_polygon(self, tmp_path, capsys):
        path = tmp_path / "open.json"
        path.write_text('{"lengths": [1, 2, 1, 1], "angles_pi": ["1/2", "1/2", "1/2", "1/2"]}', encoding="utf-8")
        assert main(["charpoly", str(path)]) == 2
        assert "non-closing" in capsys.readouterr().err

    def test_error_recorded_in_report(self, tmp_path):
        out = tmp_path / "run"
        assert main(["isospectral", polygon("square"), "--out", str(out)]) == 2
        report = json.loads((out / "report.json").read_text())
        assert report["verdicts"]["error"] == "PolygonDataError"


class TestRootsCommand:
    """roots: quasi-eigenvalues with multiplicity"""

    def test_square(self, capsys):
        assert main(["roots", polygon("square"), "--tmax", "5"]) == 0
        rows = csv_rows(capsys.readouterr().out)
        assert len(rows) == 8
        values = sorted({round(float(r["nu"]), 9) for r in rows})
        assert values == pytest.approx([math.pi / 2, 3 * math.pi / 2])
        assert [int(r["index"]) for r in rows] == list(range(8))


class TestIsospectralCommand:
    """isospectral: verdicts and exit codes"""

    def test_hexagon_unique(self, capsys):
        assert main(["isospectral", polygon("obtuse_hexagon")]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["verdict"] == "finite"
        assert document["count"] == 1
        assert document["cap"] == 20

    def test_commensurable_rejected(self):
        assert main(["isospectral", polygon("regular_hexagon")]) == 2

    def test_weak_continuum(self, capsys):
        code = main(["isospectral", polygon("symmetric_odd_quadrilateral"), "--mode", "weak", "--sigma-floor", "40"])
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        assert document["verdict"] == "continuum"
        assert document["family"]["x_lo"] < 0.0 < document["family"]["x_hi"]

    def test_indeterminate_exit_code(self, tmp_path):
        path = tmp_path / "isosceles.json"
        path.write_text('{"vertices": [[0, 0], [1.2, 0], [0.6, 0.8]]}', encoding="utf-8")
        assert main(["isospectral", str(path)]) == 3


class TestGeometryCommands:
    """reconstruct, deform and classify"""

    def test_reconstruct(self, capsys):
        assert main(["reconstruct", polygon("partial_pentagon")]) == 0
        document = json.loads(capsys.readouterr().out)
        angles = [float(value) for value in document["angles_pi"]]
        assert angles == pytest.approx([0.6] * 5, abs=1e-12)

    def test_reconstruct_contract(self, capsys):
        assert main(["reconstruct", polygon("square")]) == 0
        assert json.loads(capsys.readouterr().out)["lengths"] == [1, 1, 1, 1]

    def test_deform(self, capsys):
        print("\n=== steklov deform ===")
        assert main(["deform", polygon("symmetric_odd_quadrilateral")]) == 0
        rows = csv_rows(capsys.readouterr().out)
        assert len(rows) == 21
        assert list(rows[0].keys()) == ["x", "l_0", "l_1", "l_2", "l_3", "charpoly_drift"]
        assert max(float(r["charpoly_drift"]) for r in rows) < 1e-10
        print("✅ characteristic polynomial constant along the family")

    def test_classify(self, tmp_path):
        out = tmp_path / "classify"
        assert main(["classify", polygon("thirty_sixty_ninety"), "--out", str(out)]) == 0
        rows = csv_rows((out / "classify.csv").read_text())
        assert [r["kind"] for r in rows] == ["even", "odd", "even"]
        summary = json.loads((out / "admissibility.json").read_text())
        assert summary["odd_vertices"] == [1]


class TestSpectralCommands:
    """bounds and solve"""

    def test_bounds_against_sigma(self, capsys):
        assert main(["bounds", polygon("square"), "--sigma", "0.5"]) == 0
        rows = csv_rows(capsys.readouterr().out)
        assert any(r["formula"].startswith("weinstock") for r in rows)
        for row in rows:
            if row["hypotheses_ok"] == "true":
                assert row["dominates"] == "true"

    def test_compare_quick(self, tmp_path):
        out = tmp_path / "compare"
        assert main(["compare", polygon("square"), "--preset", "quick", "--k", "12", "--out", str(out)]) == 0
        rows = csv_rows((out / "compare.csv").read_text())
        assert len(rows) == 13
        assert float(rows[0]["sigma"]) == pytest.approx(0.0, abs=1e-8)
        fit = json.loads((out / "fit.json").read_text())
        assert fit["epsilon_ceiling"] == pytest.approx(0.25)

    def test_solve_quick(self, capsys):
        assert main(["solve", polygon("square"), "--preset", "quick", "--k", "3"]) == 0
        rows = csv_rows(capsys.readouterr().out)
        finest = min(float(r["mesh_h"]) for r in rows)
        sigma_0 = [float(r["sigma"]) for r in rows if r["index"] == "0"]
        assert all(abs(s) < 1e-8 for s in sigma_0)
        assert finest > 0.0


class TestUnexpectedFailures:
    """Errors outside the project hierarchy still produce a report"""

    @pytest.fixture
    def broken_charpoly(self, monkeypatch):
        def handler(context):
            raise ValueError("lost a sign vector")

        monkeypatch.setitem(commands.COMMANDS, "charpoly", (handler, "always fails"))

    def test_exit_code_and_report(self, broken_charpoly, tmp_path, capsys):
        print("\n=== unexpected failure inside a command ===")
        out = tmp_path / "run"
        assert main(["charpoly", polygon("square"), "--out", str(out)]) == 4
        assert "unexpected failure: lost a sign vector" in capsys.readouterr().err

        report = json.loads((out / "report.json").read_text())
        assert report["exit_code"] == 4
        assert report["verdicts"] == {"error": "ValueError", "message": "lost a sign vector"}
        print("✅ numerical-failure exit code with the error recorded")
