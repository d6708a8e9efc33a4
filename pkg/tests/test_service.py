from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from mtplan import service, solve

from conftest import SCENARIO


def bundle():
    manifest = json.loads((SCENARIO / "manifest.json").read_text())
    files = {t["domain_file"]: (SCENARIO / t["domain_file"]).read_text() for t in manifest["tiers"]}
    return {"manifest": manifest, "files": files}


@pytest.fixture()
def client():
    with TestClient(service.create_app()) as c:
        yield c


def prepared_problem(client) -> str:
    pid = client.post("/problems", json=bundle()).json()["problem"]
    assert client.post(f"/problems/{pid}/compile").status_code == 200
    assert client.post(f"/problems/{pid}/solve").json()["status"] == "solved"
    return pid


def start_session(client, pid, ground_truth="d1"):
    resp = client.post(
        "/sessions", json={"problem": pid, "ground_truth": ground_truth, "chooser": "interactive"}
    )
    assert resp.status_code == 201
    return resp.json()


class TestProblems:
    def test_upload_compile_solve_flow(self, client):
        up = client.post("/problems", json=bundle())
        assert up.status_code == 201
        doc = up.json()
        assert doc["problem"] == "p-1" and doc["valid"] is True
        compiled = client.post("/problems/p-1/compile").json()
        assert compiled["operators"] == 29 and compiled["bookkeeping_atoms"] == 10
        solved = client.post("/problems/p-1/solve").json()
        assert solved["status"] == "solved" and solved["policy_states"] > 0
        assert client.get("/problems/p-1/solve").json()["status"] == "solved"

    def test_upload_with_missing_file_is_422(self, client):
        payload = bundle()
        payload["files"].pop("d2.pddl")
        assert client.post("/problems", json=payload).status_code == 422

    def test_artifacts_before_solving_are_409(self, client):
        pid = client.post("/problems", json=bundle()).json()["problem"]
        assert client.get(f"/problems/{pid}/policy-graph").status_code == 409
        assert client.post(f"/problems/{pid}/solve").status_code == 409  # not compiled

    def test_unknown_problem_is_404(self, client):
        assert client.get("/problems/p-99/mtc").status_code == 404

    def test_policy_graph_mtc_triggers(self, client):
        pid = prepared_problem(client)
        graph = client.get(f"/problems/{pid}/policy-graph").json()
        assert graph["nodes"] and graph["edges"]
        mtc = client.get(f"/problems/{pid}/mtc").json()
        assert set(mtc["tiers"]) == {"d1", "d2", "d3"}
        triggers = client.get(f"/problems/{pid}/triggers").json()
        assert triggers["triggers"]["d3"] == [["(at c2)"]]

    def test_slow_solve_returns_202_with_poll_url(self, client, monkeypatch):
        original = solve.solve_dual

        def slow(*args, **kwargs):
            time.sleep(0.4)
            return original(*args, **kwargs)

        monkeypatch.setattr(service.solve, "solve_dual", slow)
        with TestClient(service.create_app(solve_budget=0.01)) as slow_client:
            pid = slow_client.post("/problems", json=bundle()).json()["problem"]
            slow_client.post(f"/problems/{pid}/compile")
            resp = slow_client.post(f"/problems/{pid}/solve")
            assert resp.status_code == 202
            assert resp.json()["poll"] == f"/problems/{pid}/solve"
            for _ in range(100):
                status = slow_client.get(f"/problems/{pid}/solve").json()["status"]
                if status != "solving":
                    break
                time.sleep(0.05)
            assert status == "solved"


class TestSessions:
    def test_snapshot_shape(self, client):
        pid = prepared_problem(client)
        snap = start_session(client, pid)
        assert snap["session"] == "s-1"
        assert snap["tier"] == "d3" and snap["state"] == ["(at c2)"]
        assert [t["id"] for t in snap["tiers"]] == ["d1", "d2", "d3"]
        (action,) = snap["actions"]
        assert action["name"] == "walk_c2_c1"
        outcomes = action["outcomes"]
        assert [o["degrade_to"] for o in outcomes] == [None, "d2", "d1"]
        assert outcomes[1]["explained_by"] == ["d1", "d2"]

    def test_scratch_advance_choice_reports_degrade_event(self, client):
        pid = prepared_problem(client)
        snap = start_session(client, pid)
        resp = client.post(
            f"/sessions/{snap['session']}/choose", json={"action": "walk_c2_c1", "successor": 1}
        )
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["events"][0]["event"] == "degrade"
        assert doc["events"][0]["degrade_to"] == "d2"
        assert doc["snapshot"]["tier"] == "d2"
        assert doc["snapshot"]["goal"] == "(and (at c0) (not (broken)))"

    def test_session_runs_to_goal_banner(self, client):
        pid = prepared_problem(client)
        sid = start_session(client, pid)["session"]
        client.post(f"/sessions/{sid}/choose", json={"action": "walk_c2_c1", "successor": 1})
        resp = client.post(f"/sessions/{sid}/choose", json={"action": "walk_c1_c0", "successor": 0})
        snap = resp.json()["snapshot"]
        assert snap["finished"] is True and snap["terminal"] == "goal"
        assert snap["actions"] == []

    def test_choose_on_finished_session_is_409(self, client):
        pid = prepared_problem(client)
        sid = start_session(client, pid)["session"]
        client.post(f"/sessions/{sid}/choose", json={"action": "walk_c2_c1", "successor": 1})
        client.post(f"/sessions/{sid}/choose", json={"action": "walk_c1_c0", "successor": 0})
        resp = client.post(f"/sessions/{sid}/choose", json={"action": "walk_c1_c0", "successor": 0})
        assert resp.status_code == 409

    def test_stale_action_is_409(self, client):
        pid = prepared_problem(client)
        sid = start_session(client, pid)["session"]
        resp = client.post(f"/sessions/{sid}/choose", json={"action": "run", "successor": 0})
        assert resp.status_code == 409

    def test_illegal_successor_is_422(self, client):
        pid = prepared_problem(client)
        sid = start_session(client, pid)["session"]
        resp = client.post(f"/sessions/{sid}/choose", json={"action": "walk_c2_c1", "successor": 9})
        assert resp.status_code == 422

    def test_unknown_session_is_404_and_delete_works(self, client):
        assert client.get("/sessions/s-99").status_code == 404
        pid = prepared_problem(client)
        sid = start_session(client, pid)["session"]
        assert client.delete(f"/sessions/{sid}").status_code == 204
        assert client.get(f"/sessions/{sid}").status_code == 404

    def test_bad_ground_truth_is_422(self, client):
        pid = prepared_problem(client)
        resp = client.post(
            "/sessions", json={"problem": pid, "ground_truth": "d9", "chooser": "interactive"}
        )
        assert resp.status_code == 422

    def test_non_interactive_chooser_rejected(self, client):
        pid = prepared_problem(client)
        resp = client.post(
            "/sessions", json={"problem": pid, "ground_truth": "d1", "chooser": "random"}
        )
        assert resp.status_code == 422

    def test_replaying_choices_reproduces_snapshots_bit_for_bit(self):
        choices = [("walk_c2_c1", 0), ("walk_c1_c0", 2), ("walk_c1_c2", 1)]

        def record():
            with TestClient(service.create_app()) as c:
                pid = prepared_problem(c)
                snaps = [json.dumps(start_session(c, pid), sort_keys=True)]
                sid = "s-1"
                for action, successor in choices:
                    resp = c.post(
                        f"/sessions/{sid}/choose",
                        json={"action": action, "successor": successor},
                    )
                    snaps.append(json.dumps(resp.json(), sort_keys=True))
                return snaps

        assert record() == record()
