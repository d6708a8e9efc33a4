from __future__ import annotations

import json

from mtplan import cli
from mtplan.compile import compile_mtp, fairness_doc

from conftest import SCENARIO

MANIFEST = str(SCENARIO / "manifest.json")


def write_variant_manifest(tmp_path, *, init=None, order=None, d3_goal=None):
    data = json.loads((SCENARIO / "manifest.json").read_text())
    for tier in data["tiers"]:
        tier["domain_file"] = str(SCENARIO / tier["domain_file"])
    if init is not None:
        data["init"] = init
    if order is not None:
        data["order"] = order
    if d3_goal is not None:
        data["tiers"][2]["goal"] = d3_goal
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestValidate:
    def test_valid_manifest_exits_zero(self, capsys):
        assert cli.main(["validate", MANIFEST]) == 0
        assert "valid" in capsys.readouterr().out

    def test_broken_order_exits_one_with_report(self, tmp_path, capsys):
        bad = write_variant_manifest(tmp_path, order=[["d1", "d2"], ["d2", "d1"], ["d2", "d3"]])
        assert cli.main(["validate", bad]) == 1
        assert "not-a-partial-order" in capsys.readouterr().out

    def test_missing_file_exits_two(self, capsys):
        assert cli.main(["validate", "/nonexistent/manifest.json"]) == 2

    def test_json_report(self, capsys):
        assert cli.main(["validate", MANIFEST, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True and doc["schema_version"] == 1


class TestCompile:
    def test_writes_three_files(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["compile", MANIFEST, "--out", str(out)]) == 0
        assert sorted(p.name for p in out.iterdir()) == [
            "domain.pddl",
            "fairness.json",
            "problem.pddl",
        ]
        assert "(when " in (out / "domain.pddl").read_text()

    def test_flatten_has_no_when_token(self, tmp_path):
        out = tmp_path / "flat"
        assert cli.main(["compile", MANIFEST, "--flatten", "--out", str(out)]) == 0
        assert "when" not in (out / "domain.pddl").read_text()

    def test_reruns_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        cli.main(["compile", MANIFEST, "--out", str(a)])
        cli.main(["compile", MANIFEST, "--out", str(b)])
        for name in ("domain.pddl", "problem.pddl", "fairness.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_matches_library_fairness_doc(self, tmp_path, nonrunning):
        out = tmp_path / "out"
        cli.main(["compile", MANIFEST, "--out", str(out)])
        got = json.loads((out / "fairness.json").read_text())
        assert got == fairness_doc(compile_mtp(nonrunning))


class TestSolve:
    def test_solvable_writes_policy(self, tmp_path, capsys, compiled, policy):
        out = tmp_path / "out"
        assert cli.main(["solve", MANIFEST, "--out", str(out)]) == 0
        doc = json.loads((out / "policy.json").read_text())
        assert doc == policy.to_doc()  # thin wrapper over the library
        assert (out / "policy.dot").read_text().startswith("digraph")

    def test_scratched_variant_unsolvable_exits_three(self, tmp_path, capsys):
        bad = write_variant_manifest(tmp_path, init=["(at c2)", "(scratch)"])
        assert cli.main(["solve", bad, "--out", str(tmp_path / "o")]) == 3
        assert "UNSOLVABLE" in capsys.readouterr().out

    def test_node_cap_exits_four(self, tmp_path, capsys):
        assert cli.main(["solve", MANIFEST, "--node-cap", "5", "--out", str(tmp_path / "o")]) == 4


class TestExtractVerify:
    def test_extract_writes_controller_and_triggers(self, tmp_path, controller, nonrunning):
        out = tmp_path / "out"
        assert cli.main(["extract", MANIFEST, "--out", str(out)]) == 0
        got = json.loads((out / "mtc.json").read_text())
        assert got == controller.to_doc()
        triggers = json.loads((out / "triggers.json").read_text())
        assert triggers["triggers"]["d3"] == [["(at c2)"]]

    def test_verify_extracted_controller_exits_zero(self, capsys):
        assert cli.main(["verify", MANIFEST]) == 0
        assert "verified" in capsys.readouterr().out

    def test_verify_json(self, capsys):
        assert cli.main(["verify", MANIFEST, "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["ok"] is True


class TestSimulate:
    def test_scripted_trace_to_stdout(self, capsys):
        assert cli.main(["simulate", MANIFEST, "--ground-truth", "d1", "--script", "[1, 0]"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["terminal"] == "goal"
        assert [e["event"] for e in doc["events"]] == ["degrade", "step", "goal"]
        assert doc["events"][0]["degrade_to"] == "d2"

    def test_script_from_file_and_output_file(self, tmp_path, capsys):
        script = tmp_path / "script.json"
        script.write_text("[0, 2, 1]")
        out = tmp_path / "trace.json"
        assert (
            cli.main(
                [
                    "simulate",
                    MANIFEST,
                    "--ground-truth",
                    "d1",
                    "--script",
                    str(script),
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        doc = json.loads(out.read_text())
        assert [e["event"] for e in doc["events"]] == ["step", "degrade", "step", "goal"]

    def test_seeded_simulation_terminates(self, capsys):
        assert cli.main(["simulate", MANIFEST, "--ground-truth", "d1", "--seed", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["terminal"] == "goal"

    def test_adversarial_simulation(self, capsys):
        assert cli.main(["simulate", MANIFEST, "--ground-truth", "d1", "--adversarial"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["terminal"] == "goal"

    def test_unknown_ground_truth_is_an_error(self, capsys):
        assert cli.main(["simulate", MANIFEST, "--ground-truth", "d9"]) == 2
