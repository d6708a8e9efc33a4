"""HTTP JSON service: problem upload, compile/solve, interactive sessions.

Problems are uploaded as a manifest bundle (the manifest plus the domain
file texts), compiled and solved in memory, and steered step by step
through sessions whose outcome choices the client supplies.  Snapshots are
pure functions of the session history, so replaying the same choices on a
fresh service reproduces them bit for bit.  Solving runs off-thread; when
it outlasts the configured budget the endpoint answers 202 with a poll
URL instead of blocking the request.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import compile as compilemod
from . import mtc as mtcmod
from . import model, sim, solve
from .errors import IllegalSuccessorError, MtplanError, SessionError, ValidationFailedError

SCHEMA_VERSION = 1
DEFAULT_SOLVE_BUDGET = 5.0


class ProblemBundle(BaseModel):
    manifest: dict
    files: dict[str, str] = {}


class SessionRequest(BaseModel):
    problem: str
    ground_truth: str
    chooser: str = "interactive"
    step_cap: int = sim.DEFAULT_STEP_CAP


class ChooseRequest(BaseModel):
    action: str
    successor: int


@dataclass
class ProblemRecord:
    id: str
    problem: model.MtpProblem
    compiled: compilemod.CompiledProblem | None = None
    solve_state: str = "unsolved"  # unsolved | solving | solved | unsolvable
    policy: solve.Policy | None = None
    controller: mtcmod.MtController | None = None
    triggers: mtcmod.TriggerMap | None = None
    solve_thread: threading.Thread | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class SessionRecord:
    id: str
    problem_id: str
    session: sim.SimSession
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(solve_budget: float | None = None) -> FastAPI:
    app = FastAPI(title="mtplan", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    budget = (
        solve_budget
        if solve_budget is not None
        else float(os.environ.get("MTPLAN_SOLVE_BUDGET", str(DEFAULT_SOLVE_BUDGET)))
    )

    problems: dict[str, ProblemRecord] = {}
    sessions: dict[str, SessionRecord] = {}
    counters = {"p": 0, "s": 0}
    registry_lock = threading.Lock()

    def next_id(kind: str) -> str:
        with registry_lock:
            counters[kind] += 1
            return f"{kind}-{counters[kind]}"

    def get_problem(pid: str) -> ProblemRecord:
        rec = problems.get(pid)
        if rec is None:
            raise HTTPException(404, f"unknown problem {pid}")
        return rec

    def get_session(sid: str) -> SessionRecord:
        rec = sessions.get(sid)
        if rec is None:
            raise HTTPException(404, f"unknown session {sid}")
        return rec

    def tier_panel(problem: model.MtpProblem) -> list[dict]:
        from .pddl import format_condition

        return [
            {
                "id": tid,
                "goal": format_condition(problem.goals[tid]),
                "above": list(problem.above(tid)),
            }
            for tid in problem.tier_ids
        ]

    def snapshot(rec: SessionRecord) -> dict:
        s = rec.session
        actions = []
        if not s.finished:
            for name in s.prescribed():
                outcomes = []
                for c in s.choices(name):
                    outcomes.append(
                        {
                            "successor": sorted(str(a) for a in c.successor),
                            "explained_by": list(c.explained_by),
                            "degrade_to": c.degrade_to if c.degrade_to else None,
                        }
                    )
                actions.append({"name": name, "outcomes": outcomes})
        from .pddl import format_condition

        return {
            "schema_version": SCHEMA_VERSION,
            "session": rec.id,
            "problem": rec.problem_id,
            "ground_truth": s.ground_truth,
            "step": s.steps,
            "finished": s.finished,
            "terminal": s.events[-1].kind if s.finished and s.events else None,
            "tier": s.tier,
            "goal": format_condition(s.problem.goals[s.tier]),
            "tiers": tier_panel(s.problem),
            "state": sorted(str(a) for a in s.state),
            "actions": actions,
            "events": [e.to_doc() for e in s.events],
        }

    def run_solve(rec: ProblemRecord) -> None:
        try:
            policy = solve.solve_dual(
                solve.compiled_fond(rec.compiled),
                rec.compiled.fairness,
                tie_break=solve.compiled_tie_break(rec.compiled),
            )
        except MtplanError:
            with rec.lock:
                rec.solve_state = "error"
            return
        with rec.lock:
            if policy is None:
                rec.solve_state = "unsolvable"
            else:
                rec.policy = policy
                rec.controller = mtcmod.extract_mtc(policy, rec.compiled)
                rec.triggers = mtcmod.triggering_states(rec.problem, rec.controller)
                rec.solve_state = "solved"

    def solve_status(rec: ProblemRecord) -> dict:
        doc = {"schema_version": SCHEMA_VERSION, "problem": rec.id, "status": rec.solve_state}
        if rec.solve_state == "solved":
            doc["policy_states"] = len(rec.policy.mapping)
        return doc

    @app.post("/problems", status_code=201)
    def upload_problem(bundle: ProblemBundle):
        try:
            problem = model.load_manifest_data(
                bundle.manifest,
                lambda name: bundle.files[name],
                name=str(bundle.manifest.get("name", "")),
            )
        except KeyError as exc:
            raise HTTPException(422, f"missing domain file {exc}") from exc
        except MtplanError as exc:
            raise HTTPException(422, str(exc)) from exc
        rec = ProblemRecord(next_id("p"), problem)
        problems[rec.id] = rec
        report = model.validate_mtp(problem)
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": rec.id,
            "tiers": list(problem.tier_ids),
            "valid": report.ok,
            "report": report.to_doc(),
        }

    @app.post("/problems/{pid}/compile")
    def compile_problem(pid: str):
        rec = get_problem(pid)
        with rec.lock:
            if rec.compiled is None:
                try:
                    rec.compiled = compilemod.compile_mtp(rec.problem)
                except ValidationFailedError as exc:
                    raise HTTPException(422, detail=exc.report.to_doc()) from exc
            compiled = rec.compiled
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": rec.id,
            "operators": len(compiled.domain.operators),
            "atoms": len(compiled.domain.vocabulary),
            "bookkeeping_atoms": len(compiled.bookkeeping_atoms),
            "unfair": sorted(n for n, f in compiled.fairness.items() if f == "unfair"),
        }

    @app.post("/problems/{pid}/solve")
    def solve_problem(pid: str):
        rec = get_problem(pid)
        with rec.lock:
            if rec.compiled is None:
                raise HTTPException(409, "problem not compiled yet")
            if rec.solve_state == "unsolved":
                rec.solve_state = "solving"
                rec.solve_thread = threading.Thread(target=run_solve, args=(rec,), daemon=True)
                rec.solve_thread.start()
            thread = rec.solve_thread
        if thread is not None and thread.is_alive():
            thread.join(timeout=budget)
        if rec.solve_state == "solving":
            from fastapi.responses import JSONResponse

            return JSONResponse(
                status_code=202,
                content={
                    "schema_version": SCHEMA_VERSION,
                    "problem": rec.id,
                    "status": "solving",
                    "poll": f"/problems/{rec.id}/solve",
                },
            )
        return solve_status(rec)

    @app.get("/problems/{pid}/solve")
    def poll_solve(pid: str):
        return solve_status(get_problem(pid))

    def require_solved(rec: ProblemRecord) -> None:
        if rec.solve_state != "solved":
            raise HTTPException(409, f"problem is not solved (status: {rec.solve_state})")

    @app.get("/problems/{pid}/policy-graph")
    def policy_graph(pid: str):
        rec = get_problem(pid)
        require_solved(rec)
        return solve.export_policy_graph(
            rec.policy, solve.compiled_fond(rec.compiled), rec.compiled.fairness, rec.compiled.provenance
        )

    @app.get("/problems/{pid}/mtc")
    def controller(pid: str):
        rec = get_problem(pid)
        require_solved(rec)
        return rec.controller.to_doc()

    @app.get("/problems/{pid}/triggers")
    def triggers(pid: str):
        rec = get_problem(pid)
        require_solved(rec)
        return rec.triggers.to_doc()

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest):
        rec = get_problem(req.problem)
        require_solved(rec)
        if req.chooser != "interactive":
            raise HTTPException(422, "only the interactive chooser is served over HTTP")
        try:
            session = sim.SimSession(rec.problem, rec.controller, req.ground_truth, req.step_cap)
        except SessionError as exc:
            raise HTTPException(422, str(exc)) from exc
        srec = SessionRecord(next_id("s"), rec.id, session)
        sessions[srec.id] = srec
        return snapshot(srec)

    @app.get("/sessions/{sid}")
    def get_snapshot(sid: str):
        return snapshot(get_session(sid))

    @app.post("/sessions/{sid}/choose")
    def choose(sid: str, req: ChooseRequest):
        rec = get_session(sid)
        with rec.lock:
            try:
                events = rec.session.choose(req.action, req.successor)
            except SessionError as exc:
                raise HTTPException(409, str(exc)) from exc
            except IllegalSuccessorError as exc:
                raise HTTPException(422, str(exc)) from exc
            return {
                "schema_version": SCHEMA_VERSION,
                "events": [e.to_doc() for e in events],
                "snapshot": snapshot(rec),
            }

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        get_session(sid)
        del sessions[sid]

    return app
