"""Tests for minipol.cli: argument parsing, commands and exit codes."""

import json

import pytest

from minipol.cli import EXIT_ERROR, EXIT_NOT_FIXED, EXIT_OK, config_from_args, main, parse_args
from minipol.corpus import CORPUS_DIR
from tests.conftest import ONE_SIDED_SOURCE

TCAS = [str(CORPUS_DIR / "tcas" / "tcas.mini"), str(CORPUS_DIR / "tcas" / "tests.json")]


@pytest.fixture
def one_sided_files(tmp_path):
    program = tmp_path / "one_sided.mini"
    program.write_text(ONE_SIDED_SOURCE, encoding="utf-8")
    tests = tmp_path / "tests.json"
    tests.write_text(json.dumps({"tests": [
        {"name": "zero", "inputs": ["0"], "expected": "0"},
        {"name": "five", "inputs": ["5"], "expected": "0"},
        {"name": "fifty", "inputs": ["50"], "expected": "2"},
    ]}), encoding="utf-8")
    return str(program), str(tests)


class TestParseArgs:
    def test_repair_defaults(self):
        args = parse_args(["repair", "p.mini", "t.json"])
        config = config_from_args(args)
        assert args.command == "repair"
        assert config.mode == "both"
        assert config.trivial_guard is True
        assert config.record_timings is True

    def test_repair_flags(self):
        args = parse_args(["repair", "p.mini", "t.json", "--mode", "condition", "--max-level", "2",
                           "--constants", "mined", "--no-trivial-guard", "--no-timings",
                           "--condition-budget", "3"])
        config = config_from_args(args)
        assert config.mode == "condition"
        assert config.max_level == 2
        assert config.constants == "mined"
        assert config.trivial_guard is False
        assert config.record_timings is False
        assert config.condition_budget == 3

    def test_verbosity(self):
        assert parse_args(["-vv", "corpus"]).verbose == 2

    def test_command_required(self):
        with pytest.raises(SystemExit) as exc:
            parse_args([])
        assert exc.value.code == 2


class TestRun:
    def test_tcas(self, capsys):
        assert main(["run", *TCAS]) == EXIT_NOT_FIXED
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "t1: pass"
        assert lines[1] == "t2: fail (expected 1, got 0)"
        assert lines[-1] == "3 pass / 2 fail"

    def test_all_pass(self, tmp_path, capsys):
        tests = tmp_path / "tests.json"
        tests.write_text(json.dumps({"tests": [
            {"name": "t1", "inputs": ["true", "0", "100"], "expected": "0"}]}), encoding="utf-8")
        assert main(["run", TCAS[0], str(tests)]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "1 pass / 0 fail"


class TestRepair:
    def test_fix_found(self, tmp_path, capsys):
        report = tmp_path / "report.json"
        spectrum = tmp_path / "spectrum.tsv"
        code = main(["repair", *TCAS, "--no-timings", "--report", str(report),
                     "--dump-spectrum", str(spectrum)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("Fix found! At line 7 replace `bias > down_sep` by `up_sep != 0`")
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["status"] == "patch"
        assert data["expression"] == "up_sep != 0"
        assert data["timings"] is None
        assert spectrum.read_text(encoding="utf-8").startswith("node\tline\tcol")

    def test_reports_are_byte_identical(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["repair", *TCAS, "--no-timings", "--report", str(first)]) == EXIT_OK
        assert main(["repair", *TCAS, "--no-timings", "--report", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_no_fix(self, one_sided_files, capsys):
        assert main(["repair", *one_sided_files]) == EXIT_NOT_FIXED
        out = capsys.readouterr().out
        assert out.startswith("No fix found: both boolean values of the condition")
        assert "  line 3 (condition):" in out

    def test_no_fix_without_guard(self, one_sided_files):
        assert main(["repair", *one_sided_files, "--no-trivial-guard"]) == EXIT_OK

    def test_smt_export(self, tmp_path):
        out_dir = tmp_path / "smt"
        code = main(["repair", *TCAS, "--solver", "smtlib-export", "--smt-out", str(out_dir)])
        assert code == EXIT_OK
        assert sorted(p.suffix for p in out_dir.iterdir()) == [".smt2", ".smt2"]


class TestErrors:
    def test_nothing_to_repair(self, tmp_path, capsys):
        tests = tmp_path / "tests.json"
        tests.write_text(json.dumps({"tests": [
            {"name": "t1", "inputs": ["true", "0", "100"], "expected": "0"}]}), encoding="utf-8")
        assert main(["repair", TCAS[0], str(tests)]) == EXIT_ERROR
        assert "nothing to repair" in capsys.readouterr().err

    def test_missing_program(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.mini"), TCAS[1]]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: cannot read program")

    def test_parse_error(self, tmp_path, capsys):
        program = tmp_path / "bad.mini"
        program.write_text("fn f( -> int { return 0; }\n", encoding="utf-8")
        assert main(["run", str(program), TCAS[1]]) == EXIT_ERROR
        assert "bad.mini:1:" in capsys.readouterr().err

    def test_suite_literal_out_of_range(self, one_sided_files, tmp_path, capsys):
        tests = tmp_path / "huge.json"
        tests.write_text(json.dumps({"tests": [
            {"name": "huge", "inputs": ["99999999999999999999"], "expected": "0"}]}), encoding="utf-8")
        assert main(["run", one_sided_files[0], str(tests)]) == EXIT_ERROR
        assert "integer literal out of the 64-bit range" in capsys.readouterr().err

    @pytest.mark.parametrize("flags", [
        ["--max-level", "9"],
        ["--budget-ms", "0"],
        ["--solver", "smtlib-export"],
    ])
    def test_invalid_configuration(self, flags, capsys):
        assert main(["repair", *TCAS, *flags]) == EXIT_ERROR
        assert "invalid configuration" in capsys.readouterr().err


class TestCorpus:
    def test_all_cases(self, capsys):
        assert main(["corpus"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert "tcas: ok (line 7: up_sep != 0)" in lines
        assert lines[-1] == "3 of 3 cases reproduced"

    def test_unknown_case(self, capsys):
        assert main(["corpus", "nope"]) == EXIT_ERROR
        assert "no case 'nope'" in capsys.readouterr().err
