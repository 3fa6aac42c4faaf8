import json
from dataclasses import replace

import pytest

import fundamental_class
from src.geometry.verdict import Verdict
from src.verification.report import build_report, dump_report, exit_code
from src.verification.runner import error_record, run, run_supertrace


def verify(*args):
    return fundamental_class.main(["verify", *args])


class TestVerifyCommand:
    def test_example_a_passes(self, tmp_path):
        path = tmp_path / "reports" / "example_a.json"
        assert verify("--config", "example_a", "--report", str(path)) == 0
        report = json.loads(path.read_text(encoding="utf-8"))
        assert report["status"] == "pass"
        assert report["scenario"] == "example_a"
        assert report["ring"] == {"num_vars": 1, "truncation": 8}
        names = [record["name"] for record in report["checks"]]
        assert names == sorted(names)
        assert "koszul.fundamental_class_local" in names
        assert "twisted.fundamental_class_twisted" in names
        assert all("timing" not in record for record in report["checks"])

    def test_negative_control_fails(self, tmp_path):
        path = tmp_path / "negative.json"
        assert verify("--config", "negative_flatness", "--report", str(path)) == 1
        report = json.loads(path.read_text(encoding="utf-8"))
        assert report["summary"]["errors"] == 0
        assert report["checks"][0]["name"] == "chern.check_flat"
        assert report["checks"][0]["witness"]["form"] == "dz1*dz2"

    def test_rejected_scenario(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"ring": {"num_vars": 1}}), encoding="utf-8")
        assert verify("--config", str(path)) == 2
        assert "bundle: missing section" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert verify("--config", str(tmp_path / "absent.json")) == 2

    def test_negative_truncation(self):
        assert verify("--config", "example_a", "--truncation", "-1") == 2

    def test_koszul_on_a_real_analytic_section_is_rejected(self, capsys):
        assert verify("--config", "example_b", "--check", "koszul") == 2
        assert "section.tau: koszul check requires a holomorphic section" in capsys.readouterr().out

    def test_chern_group_reports_the_determinant_in_details(self, tmp_path):
        path = tmp_path / "chern.json"
        assert verify("--config", "example_a", "--check", "chern", "--report", str(path)) == 0
        records = {r["name"]: r for r in json.loads(path.read_text(encoding="utf-8"))["checks"]}
        assert "chern.chern_form" not in records
        details = records["chern.chern_top_part"]["details"]
        assert any(line.startswith("det R = ") for line in details)

    def test_unknown_check_is_a_usage_error(self):
        with pytest.raises(SystemExit):
            verify("--config", "example_a", "--check", "mystery")

    def test_reports_are_reproducible(self, tmp_path):
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        assert verify("--config", "example_b", "--check", "chern", "--report", str(first)) == 0
        assert verify("--config", "example_b", "--check", "chern", "--report", str(second)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_timings_are_attached(self, tmp_path):
        path = tmp_path / "timed.json"
        assert verify("--config", "example_a", "--check", "chern", "--timings", "--report", str(path)) == 0
        record = json.loads(path.read_text(encoding="utf-8"))["checks"][0]
        assert set(record["timing"]) == {"wall_seconds", "cpu_seconds", "rss_mb"}

    def test_sampled_supertrace_identities(self, tmp_path):
        path = tmp_path / "supertrace.json"
        assert verify("--config", "rank2_holomorphic", "--check", "supertrace", "--report", str(path)) == 0
        names = [r["name"] for r in json.loads(path.read_text(encoding="utf-8"))["checks"]]
        assert "supertrace.trace_derivation" in names


class TestOtherCommands:
    def test_list(self, capsys):
        assert fundamental_class.main(["list"]) == 0
        assert "example_c" in capsys.readouterr().out

    def test_list_by_tag(self, capsys):
        assert fundamental_class.main(["list", "--tag", "negative-control"]) == 0
        out = capsys.readouterr().out
        assert "negative_flatness" in out
        assert "example_a" not in out

    def test_chern_prints_determinant_and_trace(self, capsys):
        assert fundamental_class.main(["chern", "--config", "example_a"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[-2].startswith("det R = ")
        assert lines[-1].startswith("tr_s(psi) = ")

    def test_chern_on_non_flat_connection(self):
        assert fundamental_class.main(["chern", "--config", "negative_flatness"]) == 2


class TestReport:
    def test_error_record_sets_status(self, example_a):
        records = [Verdict("probe", True, 3).to_record(), error_record("koszul", RuntimeError("boom"))]
        report = build_report(example_a, records)
        assert report["status"] == "error"
        assert report["summary"] == {"passed": 1, "failed": 0, "errors": 1}
        assert exit_code(report) == 2
        assert records[1]["witness"] == {"error": "RuntimeError", "message": "boom"}

    def test_failure_maps_to_exit_one(self, example_a):
        report = build_report(example_a, [Verdict.failure("probe", {"monomial": "z1"}).to_record()])
        assert exit_code(report) == 1

    def test_dump_is_sorted_and_newline_terminated(self, example_a):
        text = dump_report(build_report(example_a, []))
        assert text.endswith("}\n")
        assert list(json.loads(text)) == sorted(json.loads(text))

    def test_run_without_console(self, rank2_holomorphic):
        records = run(rank2_holomorphic, ["chern"])
        assert records and all(r["status"] == "pass" for r in records)
        assert all(r["name"].startswith("chern.") for r in records)


class TestRunner:
    def test_rank2_connection_verdicts(self, rank2_connection):
        records = {r["name"]: r for r in run(rank2_connection)}
        failed = [name for name, record in records.items() if record["status"] != "pass"]
        assert not failed
        assert records["koszul.fundamental_class_local"]["details"] == ["psi_r(e_top) mod I = dz1*dz2"]
        assert "twisted.fundamental_class_twisted" in records
        assert records["twisted.holomorphic_consistency"]["status"] == "pass"

    def test_supertrace_sample_count_follows_the_scenario(self, rank2_holomorphic):
        assert rank2_holomorphic.samples == 200
        group, verdicts = run_supertrace(replace(rank2_holomorphic, samples=5))
        assert group == "supertrace"
        assert all(v.passed for v in verdicts)
        bracket = next(v for v in verdicts if v.name == "supertrace_bracket")
        assert bracket.details == ["5 samples"]
