"""Tests for the command-line interface: output formats, determinism, exit codes."""

import json
from fractions import Fraction

import pytest

from milnorarc.cli import main, parse_arc_spec


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestArcSpecParsing:
    def test_basic(self):
        xi = parse_arc_spec("x: 1/2 t^-1; y: -1 t^1", ["x", "y"])
        assert xi.coeffs == {
            -1: (Fraction(1, 2), Fraction(0)),
            1: (Fraction(0), Fraction(-1)),
        }

    def test_bare_t_and_constants(self):
        xi = parse_arc_spec("x: t; y: 3", ["x", "y"])
        assert xi.coeffs == {1: (Fraction(1), Fraction(0)), 0: (Fraction(0), Fraction(3))}

    def test_multiple_terms_per_component(self):
        xi = parse_arc_spec("x: 2 t^2 - 1/3 t^-1", ["x", "y"])
        assert xi.coeffs[2] == (Fraction(2), Fraction(0))
        assert xi.coeffs[-1] == (Fraction(-1, 3), Fraction(0))

    def test_unknown_variable(self):
        from milnorarc.cli import UserError

        with pytest.raises(UserError):
            parse_arc_spec("w: t", ["x", "y"])


class TestDims:
    def test_output(self, capsys):
        code, out, _ = run_cli(capsys, "dims", "2", "3")
        assert code == 0
        payload = json.loads(out)
        assert payload["arc"] == 20
        assert payload["av"] == 1060

    def test_bad_parameters(self, capsys):
        code, _, err = run_cli(capsys, "dims", "1", "3")
        assert code == 1
        assert "error" in err


class TestMilnorCommand:
    def test_known_equation(self, capsys):
        code, out, _ = run_cli(
            capsys, "milnor", "x + x^2*y", "--vars", "x,y", "--center", "0,0"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["equations"] == ["y + 2*x*y^2 - x^3"]
        assert payload["pivot"] == 0

    def test_minors_mode(self, capsys):
        code, out, _ = run_cli(
            capsys, "milnor", "x + x^2*y", "--vars", "x,y", "--minors"
        )
        assert code == 0
        assert json.loads(out)["pivot"] == "minors"

    def test_parse_error_is_exit_1(self, capsys):
        code, _, err = run_cli(capsys, "milnor", "x + ", "--vars", "x,y")
        assert code == 1
        assert "parse error" in err


class TestArcCheck:
    ARGS = ["arc-check", "x + x^2*y", "x: 1/2 t^-1; y: -1 t^1", "--vars", "x,y"]

    def test_witness(self, capsys):
        code, out, _ = run_cli(capsys, *self.ARGS)
        assert code == 0
        payload = json.loads(out)
        assert payload["is_member"] is True
        assert payload["b0"] == "0"

    def test_window_violation_is_exit_1(self, capsys):
        code, _, err = run_cli(
            capsys, "arc-check", "x + x^2*y", "x: t^4", "--vars", "x,y"
        )
        assert code == 1
        assert "outside window" in err


class TestAnalyze:
    def test_single_center_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "x + x^2*y", "--vars", "x,y", "--center", "0,0"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["mode"] == "single-center"
        assert payload["status"] == "ok"
        assert len(payload["limit_values"]) == 1
        assert abs(payload["limit_values"][0]["value"]) < 1e-3

    def test_multi_center_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "x + x^2*y", "--vars", "x,y",
            "--center", "0,0", "--center", "1/3,-2/7",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["mode"] == "multi-center"
        assert len(payload["per_center"]) == 2
        assert len(payload["intersection"]) == 1

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "analyze", "x + x^2*y", "--vars", "x,y", "--center", "0,0",
            "--format", "csv",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "branch_id,R,x1,x2,f,malgrange,residual"
        assert len(lines) > 1

    def test_degenerate_only_is_exit_2(self, capsys):
        code, _, _ = run_cli(
            capsys, "analyze", "x^2 + y^2", "--vars", "x,y", "--center", "0,0"
        )
        assert code == 2

    def test_radii_flag_validation(self, capsys):
        code, _, err = run_cli(
            capsys, "analyze", "x + x^2*y", "--vars", "x,y", "--center", "0,0",
            "--radii", "10:2",
        )
        assert code == 1
        assert "R0:factor:count" in err


class TestTraceCommand:
    def test_csv_default(self, capsys):
        code, out, _ = run_cli(
            capsys, "trace", "x + x^2*y", "--vars", "x,y", "--center", "0,0"
        )
        assert code == 0
        header = out.split("\n", 1)[0]
        assert header == "branch_id,R,x1,x2,f,malgrange,residual"

    def test_json_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "trace", "x + x^2*y", "--vars", "x,y", "--center", "0,0",
            "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["branches"]) == 6


class TestDeterminism:
    CASES = [
        ["dims", "3", "2"],
        ["milnor", "x + x^2*y", "--vars", "x,y", "--center", "1/2,-3"],
        ["arc-check", "x + x^2*y", "x: 1/2 t^-1; y: -1 t^1", "--vars", "x,y"],
        ["analyze", "x + x^2*y", "--vars", "x,y", "--center", "0,0", "--seed", "1"],
        ["arc-search", "x^2 + y^2 - x", "--vars", "x,y", "--seed", "2", "--starts", "4"],
        ["trace", "x + x^2*y", "--vars", "x,y", "--center", "0,0", "--format", "json"],
    ]

    @pytest.mark.parametrize("argv", CASES, ids=lambda argv: argv[0])
    def test_byte_identical_reruns(self, capsys, argv):
        code1, out1, _ = run_cli(capsys, *argv)
        code2, out2, _ = run_cli(capsys, *argv)
        assert code1 == code2 == 0
        assert out1.encode() == out2.encode()

    def test_out_flag_matches_stdout(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code, out, _ = run_cli(
            capsys, "dims", "2", "3", "--out", str(target)
        )
        assert code == 0
        assert out == ""
        code, out, _ = run_cli(capsys, "dims", "2", "3")
        assert target.read_text() == out
