"""Tests for the command-line front end and its exit codes."""
import json
import logging
import os

import pytest

from grassmann_engine import cli
from grassmann_engine.catalog import SCRIPTS_DIR, find_case, with_expectations
from grassmann_engine.invariant_engine import evaluate_report, geometry_report
from grassmann_engine.spec_dsl import load_spec, parse_gaussian

logger = logging.getLogger(__name__)


def _script(name):
    return os.path.join(SCRIPTS_DIR, name)


@pytest.fixture(autouse=True)
def keep_test_logging(monkeypatch):
    """main() reconfigures the root logger; leave pytest's handlers alone."""
    monkeypatch.setattr(cli, "configure_logging", lambda verbosity: None)


class TestVerify:
    def test_single_case_passes(self, capsys):
        code = cli.main(["verify", "--case", "T1.1-1", "--jobs", "1"])
        out = capsys.readouterr().out
        assert code == cli.EXIT_OK
        assert "T1.1-1" in out
        assert "PASS" in out

    def test_json_is_stable_across_worker_counts(self, tmp_path):
        one, two = tmp_path / "one.json", tmp_path / "two.json"
        args = ["verify", "--case", "T1.1-2", "--case", "T1.1-1"]
        assert cli.main(args + ["--jobs", "1", "--json", str(one)]) == cli.EXIT_OK
        assert cli.main(args + ["--jobs", "2", "--json", str(two)]) == cli.EXIT_OK
        assert one.read_bytes() == two.read_bytes()
        data = json.loads(one.read_text(encoding="utf-8"))
        assert [c["id"] for c in data["cases"]] == ["T1.1-1", "T1.1-2"]
        assert all(c["pass"] for c in data["cases"])

    def test_failed_expectation_exits_one(self, monkeypatch, capsys):
        broken = with_expectations(find_case("T1.1-1"), expected_K="3")
        monkeypatch.setattr(cli, "find_case", lambda case_id: broken)
        code = cli.main(["verify", "--case", "T1.1-1", "--jobs", "1"])
        assert code == cli.EXIT_FAILURE
        assert "K expected 3, got 2" in capsys.readouterr().out

    def test_unknown_case_is_a_usage_error(self, capsys):
        assert cli.main(["verify", "--case", "T9.9-9", "--jobs", "1"]) == cli.EXIT_USAGE
        assert "unknown catalog case" in capsys.readouterr().err

    def test_bad_theta(self, capsys):
        assert cli.main(["verify", "--case", "T1.3-3", "--jobs", "1", "--theta", "2"]) == cli.EXIT_USAGE
        assert cli.main(["verify", "--case", "T1.3-3", "--jobs", "1", "--theta", "z"]) == cli.EXIT_USAGE

    def test_invalid_jobs(self, capsys):
        assert cli.main(["verify", "--case", "T1.1-1", "--jobs", "0"]) == cli.EXIT_USAGE
        assert "jobs" in capsys.readouterr().err

    def test_internal_error_exits_three(self, monkeypatch):
        def boom(cfg):
            raise RuntimeError("unexpected")

        monkeypatch.setitem(cli.COMMANDS, "verify", boom)
        assert cli.main(["verify", "--case", "T1.1-1"]) == cli.EXIT_INTERNAL


class TestAnalyze:
    def test_expectations_met(self, tmp_path, capsys):
        out_json = tmp_path / "analysis.json"
        code = cli.main(["analyze", _script("T1.1-1.gsl"), "--expect", "K=2", "--expect", "B2=4", "--json", str(out_json)])
        assert code == cli.EXIT_OK
        assert "harmonic_residual_zero" in capsys.readouterr().out
        record = json.loads(out_json.read_text(encoding="utf-8"))["cases"][0]
        assert record["id"] == "phi"
        assert record["K"]["value"] == "2"

    def test_expectation_mismatch(self, capsys):
        code = cli.main(["analyze", _script("T1.1-1.gsl"), "--expect", "K=1/2"])
        assert code == cli.EXIT_FAILURE
        assert "K expected 1/2, got 2" in capsys.readouterr().out

    def test_malformed_expectation(self):
        assert cli.main(["analyze", _script("T1.1-1.gsl"), "--expect", "H=1"]) == cli.EXIT_USAGE

    def test_non_harmonic_map_is_reported(self, capsys):
        assert cli.main(["analyze", _script("non_harmonic.gsl")]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "harmonic residual" in out

    @pytest.mark.parametrize(
        "name",
        [
            "lex_error.gsl",
            "syntax_error.gsl",
            "duplicate_binding.gsl",
            "undefined_identifier.gsl",
            "dependent_sections.gsl",
            "dimension_mismatch.gsl",
            "weight_conflict.gsl",
            "zero_section.gsl",
            "zero_power_zero.gsl",
            "deep_nesting.gsl",
        ],
    )
    def test_script_errors_exit_two(self, name, capsys):
        path = _script(os.path.join("errors", name))
        assert cli.main(["analyze", path]) == cli.EXIT_USAGE
        err = capsys.readouterr().err
        assert err.startswith(f"error: {path}:")
        logger.info("%s", err.strip())

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["analyze", str(tmp_path / "missing.gsl")]) == cli.EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err


class TestEvalAndCatalog:
    def test_eval_at_point(self, capsys):
        code = cli.main(["eval", _script("T1.1-1.gsl"), "--at", "1/2"])
        out = capsys.readouterr().out.splitlines()
        assert code == cli.EXIT_OK
        assert out == ["z = 1/2", "lambda2 = 32/25", "K = 2", "B2 = 4"]

    def test_eval_matches_report_evaluation(self, capsys):
        path = _script("T1.2-1.gsl")
        report = geometry_report(load_spec(path).bundle)
        expected = [f"{name} = {value}" for name, value in evaluate_report(report, parse_gaussian("1/3+1/2i"))]
        assert cli.main(["eval", path, "--at", "1/3+1/2i"]) == cli.EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out == ["z = 1/3+1/2i"] + expected

    def test_eval_of_constant_map(self, tmp_path, capsys):
        script = tmp_path / "constant.gsl"
        script.write_text("map phi = span(const(3,0), const(3,1))\n", encoding="utf-8")
        assert cli.main(["eval", str(script), "--at", "1"]) == cli.EXIT_OK
        assert capsys.readouterr().out.splitlines()[1:] == ["lambda2 = 0", "K = undefined", "B2 = undefined"]

    def test_eval_at_pole_is_a_usage_error(self, tmp_path):
        script = tmp_path / "pole.gsl"
        script.write_text("map phi = span([z-zb, z+zb-2])\n", encoding="utf-8")
        assert cli.main(["eval", str(script), "--at", "1"]) == cli.EXIT_USAGE

    def test_catalog_list(self, tmp_path, capsys):
        out_json = tmp_path / "catalog.json"
        assert cli.main(["catalog", "list", "--json", str(out_json)]) == cli.EXIT_OK
        assert "T1.4-3" in capsys.readouterr().out
        data = json.loads(out_json.read_text(encoding="utf-8"))
        assert len(data["cases"]) == 19

    def test_missing_subcommand(self):
        assert cli.main([]) == cli.EXIT_USAGE
        assert cli.main(["catalog"]) == cli.EXIT_USAGE

    def test_version(self, capsys):
        assert cli.main(["--version"]) == cli.EXIT_OK
