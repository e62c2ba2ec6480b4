import json
import math
import re
import subprocess
import sys

import jsonschema
import pytest

from flatcone.cli import SCHEMAS, emit_svg, format_json, main
from flatcone.errors import ValidationError

THIRDS = {"points": [{"re": 0, "im": 0, "alpha": "1/3"}, {"re": 1, "im": 0, "alpha": "1/3"}],
          "infinity": {"alpha": "1/3"}}
UNIT_LOOP = {"waypoints": [{"re": 1, "im": 0}, {"re": 0, "im": 1}, {"re": -1, "im": 0},
                           {"re": 0, "im": -1}, {"re": 1, "im": 0}]}


def single(alpha):
    return {"points": [{"re": 0, "im": 0, "alpha": alpha}], "infinity": None}


SPECS = {
    "validate": {"divisor": THIRDS},
    "metric": {"divisor": single(3),
               "grid": {"re_min": 0, "re_max": 4, "nx": 3, "im_min": -1, "im_max": 1, "ny": 3}},
    "develop": {"divisor": THIRDS, "path": {"waypoints": [{"re": 2, "im": 1}, {"re": -1, "im": 1}]},
                "samples": 5},
    "monodromy": {"divisor": single(0), "path": UNIT_LOOP},
    "cone-angle": {"divisor": THIRDS, "eps": 1e-3},
    "frobenius": {"frobenius": {"b": ["-2", "1", "1/3"], "root": "larger", "orders": [3, 6]}},
    "sc-solve": {"polygon": {"vertices": [{"re": 0, "im": 0}, {"re": 2, "im": 0}, {"re": 2, "im": 1},
                                          {"re": 0, "im": 1}], "alphas": ["1/2"] * 4}},
    "sc-map": {"sc": {"prevertices": [0, 1], "alphas": ["1/3"] * 3},
               "points": [{"re": 1, "im": 0}, "infinity", {"re": 0.5, "im": 0.5}]},
    "plot": {"divisor": single(-1), "path": UNIT_LOOP, "samples": 9},
}


def run(tmp_path, command, spec, *extra):
    spec_file = tmp_path / f"{command}.json"
    spec_file.write_text(json.dumps(spec))
    out = tmp_path / f"{command}.out"
    code = main([command, "--spec", str(spec_file), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


class TestExamples:
    def test_validate(self, tmp_path):
        code, text = run(tmp_path, "validate", SPECS["validate"])
        rep = json.loads(text)
        assert code == 0 and rep["passed"] and rep["degree"] == "-2"

    def test_validate_failure(self, tmp_path, capsys):
        bad = {"divisor": {"points": [{"re": 0, "im": 0, "alpha": "1/2"}, {"re": 1, "im": 0, "alpha": "1/2"},
                                      {"re": 2, "im": 0, "alpha": 1}], "infinity": {"alpha": 1}}}
        code, text = run(tmp_path, "validate", bad)
        assert code == 1
        assert json.loads(text)["deficit"] == "1"
        err = json.loads(capsys.readouterr().err)
        assert err["exit_code"] == 1

    def test_validate_reports_completion(self, tmp_path):
        spec = {"divisor": {"points": THIRDS["points"], "infinity": None}}
        code, text = run(tmp_path, "validate", spec)
        assert code == 1
        assert json.loads(text)["completed"]["infinity"] == {"alpha": "1/3"}

    def test_monodromy_log(self, tmp_path):
        code, text = run(tmp_path, "monodromy", SPECS["monodromy"])
        rep = json.loads(text)
        assert code == 0
        assert abs(rep["rotation"]["re"] - 1) < 1e-10 and abs(rep["rotation"]["im"]) < 1e-10
        assert abs(rep["translation"]["re"]) < 1e-10
        assert abs(rep["translation"]["im"] - 2 * math.pi) < 1e-9

    def test_monodromy_origin(self, tmp_path):
        spec = {"divisor": single("1/2"), "path": UNIT_LOOP, "origin": {"re": 0, "im": 0}}
        rep = json.loads(run(tmp_path, "monodromy", spec)[1])
        assert abs(rep["rotation"]["re"] + 1) < 1e-10
        assert math.hypot(rep["translation"]["re"], rep["translation"]["im"]) < 1e-10

    def test_metric_csv(self, tmp_path):
        code, text = run(tmp_path, "metric", SPECS["metric"])
        assert code == 0
        lines = text.split("\n")
        assert lines[0] == "re,im,density" and lines[-1] == ""
        assert "2,0,16" in lines
        assert "0,0,0" in lines
        # lexicographic order: re outer, im inner
        assert lines[1].startswith("0,-1,") and lines[2].startswith("0,0,")
        assert "\r" not in text

    def test_frobenius(self, tmp_path):
        rep = json.loads(run(tmp_path, "frobenius", SPECS["frobenius"])[1])
        assert rep["series"][0]["coefficients"][1] == {"re": -0.25, "im": 0}
        for s in rep["series"]:
            assert abs(s["residual_order"] - s["predicted_order"]) < 0.1

    def test_frobenius_obstruction(self, tmp_path, capsys):
        spec = {"frobenius": {"b": ["-2", "1"], "root": "smaller", "orders": [4]}}
        code, _ = run(tmp_path, "frobenius", spec)
        assert code == 1
        assert json.loads(capsys.readouterr().err)["error"] == "ResonanceObstruction"

    def test_cone_angle(self, tmp_path):
        rep = json.loads(run(tmp_path, "cone-angle", SPECS["cone-angle"])[1])
        for row in rep["points"]:
            assert abs(row["measured"] - 2 * math.pi / 3) < 1e-6

    def test_sc_solve(self, tmp_path):
        rep = json.loads(run(tmp_path, "sc-solve", SPECS["sc-solve"])[1])
        assert abs(rep["prevertices"][2] - 1.0303300858899106) < 1e-9
        assert rep["residual"] <= 1e-8

    def test_plot_closed_loop(self, tmp_path):
        code, text = run(tmp_path, "plot", SPECS["plot"])
        assert code == 0
        pts = re.search(r'points="([^"]+)"', text).group(1).split()
        assert pts[0] == pts[-1]
        assert text.count("<polyline") == 1


class TestDeterminismAndSchema:
    @pytest.mark.parametrize("command", sorted(SPECS))
    def test_byte_identical(self, tmp_path, command):
        a = run(tmp_path, command, SPECS[command])
        b = run(tmp_path, command, SPECS[command])
        assert a[0] == 0 and a == b

    @pytest.mark.parametrize("command", sorted(set(SPECS) - {"plot"}))
    def test_schema_round_trip(self, tmp_path, command):
        fmt = ("--format", "json") if command == "metric" else ()
        code, text = run(tmp_path, command, SPECS[command], *fmt)
        obj = json.loads(text)
        jsonschema.validate(obj, SCHEMAS[command])
        assert format_json(obj) + "\n" == text

    def test_seventeen_digits(self):
        assert format_json(0.1) == "0.10000000000000001"
        assert format_json({"a": [1, -0.0]}) == '{\n  "a": [\n    1,\n    0\n  ]\n}'


class TestErrors:
    def test_extra_key(self, tmp_path, capsys):
        code, _ = run(tmp_path, "validate", {"divisor": THIRDS, "path": UNIT_LOOP})
        assert code == 1
        assert json.loads(capsys.readouterr().err)["exit_code"] == 1

    def test_missing_key(self, tmp_path):
        assert run(tmp_path, "develop", {"divisor": THIRDS})[0] == 1

    def test_bad_format(self, tmp_path):
        assert run(tmp_path, "validate", SPECS["validate"], "--format", "csv")[0] == 1

    def test_numerical_failure(self, tmp_path, capsys):
        spec = dict(SPECS["sc-solve"])
        spec["polygon"] = {"vertices": [{"re": 0, "im": 0}, {"re": 2, "im": 0}, {"re": 2.5, "im": 1},
                                        {"re": 1, "im": 2}, {"re": -0.5, "im": 1}]}
        spec["max_iters"] = 1
        assert run(tmp_path, "sc-solve", spec)[0] == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ConvergenceError"

    def test_quadrature_failure(self, tmp_path):
        # grazing a cone point forces bisection, which a depth budget of 1 forbids
        path = {"waypoints": [{"re": -1, "im": 0.01}, {"re": 1, "im": 0.01}], "clearance": 1e-3}
        spec = dict(SPECS["develop"], path=path, tolerances={"tol_q": 1e-12, "max_depth": 1})
        assert run(tmp_path, "develop", spec)[0] == 2

    def test_io(self, tmp_path, capsys):
        assert main(["validate", "--spec", str(tmp_path / "missing.json")]) == 3
        assert json.loads(capsys.readouterr().err)["exit_code"] == 3
        spec = tmp_path / "v.json"
        spec.write_text(json.dumps(SPECS["validate"]))
        assert main(["validate", "--spec", str(spec), "--out", str(tmp_path / "no" / "dir" / "x")]) == 3

    def test_malformed_json(self, tmp_path):
        spec = tmp_path / "v.json"
        spec.write_text("{not json")
        assert main(["validate", "--spec", str(spec)]) == 1

    def test_bad_arguments(self):
        assert main(["no-such-command", "--spec", "x"]) == 1
        assert main(["validate"]) == 1

    def test_tol_override(self, tmp_path):
        code, text = run(tmp_path, "develop", SPECS["develop"], "--tol", "1e-6")
        assert code == 0 and len(json.loads(text)["samples"]) == 5


class TestSvg:
    def test_two_points(self):
        svg = emit_svg([0, 1 + 1j])
        assert svg.count("<polyline") == 1
        assert 'points="0.000000,0.000000 1.000000,-1.000000"' in svg

    def test_margin(self):
        svg = emit_svg([0, 3, 3 + 4j])
        x, y, w, h = map(float, re.search(r'viewBox="([^"]+)"', svg).group(1).split())
        assert (x, y) == (-0.25, -4.25) and (w, h) == (3.5, 4.5)

    def test_errors(self):
        with pytest.raises(ValidationError):
            emit_svg([])
        with pytest.raises(ValidationError):
            emit_svg([1j])
        with pytest.raises(ValidationError):
            emit_svg([2, 2, 2])


def test_console_script_entry_point(tmp_path):
    spec = tmp_path / "v.json"
    spec.write_text(json.dumps(SPECS["validate"]))
    proc = subprocess.run([sys.executable, "-m", "flatcone.cli", "validate", "--spec", str(spec)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["passed"]
