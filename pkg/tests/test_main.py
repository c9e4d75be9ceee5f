import json
import os
import tempfile
from pathlib import Path

import pytest

from propcalc.main import EXIT_FAILED, EXIT_INPUT, EXIT_OK, build_parser, main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _fixture(name):
    return str(FIXTURES / name)


def _run(*argv):
    """Run the CLI with --out into a temporary file; returns (exit code, parsed report)."""
    with tempfile.TemporaryDirectory() as tmpdir:
        out = os.path.join(tmpdir, "report.json")
        code = main(["--out", out, *argv])
        with open(out, encoding="utf-8") as fh:
            return code, json.load(fh)


class TestParser:
    def test_defaults(self):
        args = build_parser().parse_args(["check-pi", "--prop", "p.json"])
        assert args.section == "tau"
        assert args.bound is None
        assert args.canonical is False

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestValidate:
    @pytest.mark.parametrize(
        "name",
        ["q.json", "Z.json", "two_degrees.json", "unit_table.json", "unit_prop.json", "algebra_q_unit.json", "diagram_identity.json"],
    )
    def test_valid_inputs(self, name):
        code, report = _run("validate", _fixture(name))
        assert code == EXIT_OK
        assert report["passed"]

    def test_presentation_file(self):
        code, _ = _run("validate", _fixture("forest_presentation_b2.json"))
        assert code == EXIT_OK

    def test_square_zero_violation(self):
        code, report = _run("validate", _fixture("bad_square.json"))
        assert code == EXIT_INPUT
        assert report["error"] == "SquareZeroViolation"
        assert report["degree"] == 1

    def test_broken_invariant_is_an_input_error(self):
        code, report = _run("validate", _fixture("algebra_bad_chain_map.json"))
        assert code == EXIT_INPUT
        assert not report["passed"]

    def test_biobject(self):
        code, report = _run("validate", _fixture("biobject_swap.json"))
        assert code == EXIT_OK
        assert report["stages"]["biobject"]["passed"]

    def test_biobject_broken_involution(self):
        code, report = _run("validate", _fixture("biobject_bad_involution.json"))
        assert code == EXIT_INPUT
        assert not report["passed"]

    def test_biobject_generator_beyond_arity(self):
        code, report = _run("validate", _fixture("biobject_bad_key.json"))
        assert code == EXIT_INPUT
        assert report["error"] == "ParseError"
        assert report["field"] == "left.2,0.s1"

    def test_unknown_kind(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "thing.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"kind": "sheaf"}, fh)
            code, report = _run("validate", path)
        assert code == EXIT_INPUT
        assert report["error"] == "ParseError"

    def test_inputs_are_hashed(self):
        _, report = _run("validate", _fixture("q.json"))
        assert report["inputs"]["q.json"].startswith("sha256:")


class TestCommands:
    def test_homology_of_Z(self):
        code, report = _run("homology", _fixture("Z.json"))
        assert code == EXIT_OK
        assert report["stages"]["summary"]["homology"] == {"0": 1}

    def test_homology_of_complex_without_kind(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "z.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "degrees": {"0": ["tau", "rho0", "rho1"], "-1": ["sig0", "sig1"]},
                        "differential": {"rho0": {"sig0": "1"}, "rho1": {"sig1": "1"}},
                    },
                    fh,
                )
            code, report = _run("homology", path)
        assert code == EXIT_OK
        assert report["stages"]["summary"]["homology"] == {"0": 1}

    def test_path_object_default(self):
        code, report = _run("path-object")
        assert code == EXIT_OK
        assert all(report["stages"]["summary"]["verdicts"].values())

    def test_build_zp(self):
        code, report = _run("--bound", "1", "build-zp", "--prop", _fixture("unit_prop.json"))
        assert code == EXIT_OK
        assert report["stages"]["build_zp"]["details"]["dims"]["1,1"] == {"1": 6, "0": 13, "-1": 6}

    def test_build_calzp(self):
        code, report = _run("--bound", "1", "build-calzp", "--prop", _fixture("unit_prop.json"))
        assert code == EXIT_OK
        assert report["stages"]["build_calzp"]["details"]["index_sets"]["1"] == {"d0": 1, "d1": 2}

    def test_build_yp(self):
        code, _ = _run("--bound", "1", "build-yp", "--prop", _fixture("unit_prop.json"))
        assert code == EXIT_OK

    def test_check_pi(self):
        code, report = _run("--bound", "1", "check-pi", "--prop", _fixture("unit_prop.json"))
        assert code == EXIT_OK
        assert report["passed"]

    def test_check_pi_with_wrong_section(self):
        code, report = _run("--bound", "1", "check-pi", "--prop", _fixture("unit_prop.json"), "--section", "rho0")
        assert code == EXIT_FAILED
        violations = report["stages"]["check_pi:I"]["violations"]
        assert {"check": "surjective", "biarity": [1, 1]} == {k: violations[0][k] for k in ("check", "biarity")}

    def test_pushout_product(self):
        code, report = _run("pushout-product", "--max-arity", "1")
        assert code == EXIT_OK
        assert "pushout_product:tensor" in report["stages"]

    def test_lift_failure_names_generator(self):
        code, report = _run("lift", "--prop", _fixture("forest_prop.json"), "--section", "rho0")
        assert code == EXIT_FAILED
        assert report["error"] == "NoSolution"
        assert report["generator"] == "g"

    def test_lift_then_zigzag(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            lift_out = os.path.join(tmpdir, "lift.json")
            assert main(["--bound", "1", "--out", lift_out, "lift", "--prop", _fixture("unit_prop.json")]) == EXIT_OK
            with open(lift_out, encoding="utf-8") as fh:
                assert json.load(fh)["artifact"]["kind"] == "lift"
            code, report = _run("zigzag", "--lift", lift_out, "--algebra", _fixture("algebra_q_unit.json"))
        assert code == EXIT_OK
        assert report["passed"]

    @pytest.mark.slow
    def test_pipeline(self):
        code, report = _run(
            "--canonical", "pipeline", "--prop", _fixture("forest_prop.json"), "--algebra", _fixture("algebra_q_mult.json")
        )
        assert code == EXIT_OK
        assert list(report["stages"]) == ["axioms", "algebra", "build", "check_pi", "lift", "zigzag"]
        assert "timing" not in report


class TestSample:
    def test_forest_tables(self):
        code, data = _run("sample", "forest", "--tables")
        assert code == EXIT_OK
        assert data["kind"] == "prop"
        assert data["components"]["2,1"]["degrees"] == {"0": ["[0,1]", "[1,0]"]}

    def test_by_name(self):
        _, data = _run("sample", "unit")
        assert data == {"kind": "prop", "sample": "unit", "bound": 2}

    def test_presentation(self):
        _, data = _run("sample", "forest", "--presentation")
        assert data["kind"] == "presentation"
        assert data["generators"][0]["symbol"] == "g"

    def test_endomorphisms_need_carrier(self):
        code, report = _run("sample", "end")
        assert code == EXIT_INPUT
        assert report["field"] == "carrier"

    def test_endomorphisms(self):
        code, data = _run("--bound", "1", "sample", "end", "--carrier", _fixture("q2.json"))
        assert code == EXIT_OK
        assert data["components"]["1,1"]["degrees"]["0"]


class TestOutput:
    def test_threads_do_not_change_canonical_output(self):
        reports = []
        for threads in ("1", "4"):
            with tempfile.TemporaryDirectory() as tmpdir:
                out = os.path.join(tmpdir, "report.json")
                main(["--canonical", "--threads", threads, "--out", out, "validate", _fixture("forest_prop.json")])
                with open(out, "rb") as fh:
                    reports.append(fh.read())
        assert reports[0] == reports[1]

    def test_stdout_when_no_out(self, capsys):
        assert main(["homology", _fixture("q.json")]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["command"] == "homology"

    def test_timing_only_without_canonical(self):
        _, report = _run("--bound", "1", "check-pi", "--prop", _fixture("unit_prop.json"))
        assert "timing" in report
