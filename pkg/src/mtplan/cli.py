"""Command-line entry point tying the pipeline together.

Exit codes: 0 ok, 1 validation/verification failure, 2 IO or parse error,
3 unsolvable, 4 state-space cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import compile as compilemod
from . import mtc as mtcmod
from . import model, sim, solve
from .errors import (
    IllegalSuccessorError,
    MtplanError,
    StateSpaceBudgetError,
    ValidationFailedError,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_UNSOLVABLE = 3
EXIT_CAP = 4


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_problem(manifest: str) -> model.MtpProblem:
    return model.load_manifest(Path(manifest))


def _solve_compiled(compiled, node_cap: int):
    return solve.solve_dual(
        solve.compiled_fond(compiled),
        compiled.fairness,
        node_cap=node_cap,
        tie_break=solve.compiled_tie_break(compiled),
    )


def cmd_validate(args) -> int:
    problem = _load_problem(args.manifest)
    report = model.validate_mtp(problem)
    if args.json:
        sys.stdout.write(_dump(report.to_doc()))
    else:
        print(report.render())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_compile(args) -> int:
    problem = _load_problem(args.manifest)
    compiled = compilemod.compile_mtp(problem)
    if args.flatten:
        compiled = compilemod.flatten(compiled)
    out = Path(args.out)
    _write(out / "domain.pddl", compilemod.domain_pddl(compiled))
    _write(out / "problem.pddl", compilemod.problem_pddl(compiled))
    _write(out / "fairness.json", _dump(compilemod.fairness_doc(compiled)))
    print(f"wrote domain.pddl, problem.pddl, fairness.json to {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = _load_problem(args.manifest)
    compiled = compilemod.compile_mtp(problem)
    policy = _solve_compiled(compiled, args.node_cap)
    if policy is None:
        print("UNSOLVABLE")
        return EXIT_UNSOLVABLE
    out = Path(args.out)
    fp = solve.compiled_fond(compiled)
    graph = solve.export_policy_graph(policy, fp, compiled.fairness, compiled.provenance)
    _write(out / "policy.json", _dump(policy.to_doc()))
    _write(out / "policy.dot", solve.policy_graph_dot(graph))
    print(f"solved: {len(policy.mapping)} policy states; wrote policy.json, policy.dot to {out}")
    return EXIT_OK


def cmd_extract(args) -> int:
    problem = _load_problem(args.manifest)
    compiled = compilemod.compile_mtp(problem)
    policy = _solve_compiled(compiled, args.node_cap)
    if policy is None:
        print("UNSOLVABLE")
        return EXIT_UNSOLVABLE
    controller = mtcmod.extract_mtc(policy, compiled)
    triggers = mtcmod.triggering_states(problem, controller)
    out = Path(args.out)
    _write(out / "mtc.json", _dump(controller.to_doc()))
    _write(out / "triggers.json", _dump(triggers.to_doc()))
    print(f"wrote mtc.json, triggers.json to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    problem = _load_problem(args.manifest)
    compiled = compilemod.compile_mtp(problem)
    policy = _solve_compiled(compiled, args.node_cap)
    if policy is None:
        print("UNSOLVABLE")
        return EXIT_UNSOLVABLE
    controller = mtcmod.extract_mtc(policy, compiled)
    verdict = mtcmod.verify_mtc(problem, controller)
    if args.json:
        sys.stdout.write(_dump(verdict.to_doc()))
    else:
        print(verdict.render())
    return EXIT_OK if verdict.ok else EXIT_INVALID


def _interactive_callback(state, action, choices) -> int:
    print(f"\naction: {action}")
    print("state: " + " ".join(sorted(str(a) for a in state)))
    for i, c in enumerate(choices):
        atoms = " ".join(sorted(str(a) for a in c.successor))
        tiers = ",".join(c.explained_by) or "-"
        degrade = f" degrade->{c.degrade_to}" if c.degrade_to else ""
        print(f"  [{i}] {{{atoms}}} explained by {tiers}{degrade}")
    while True:
        raw = input(f"outcome [0-{len(choices) - 1}]: ").strip()
        if raw.isdigit() and 0 <= int(raw) < len(choices):
            return int(raw)
        print("invalid choice")


def cmd_simulate(args) -> int:
    problem = _load_problem(args.manifest)
    compiled = compilemod.compile_mtp(problem)
    policy = _solve_compiled(compiled, args.node_cap)
    if policy is None:
        print("UNSOLVABLE")
        return EXIT_UNSOLVABLE
    controller = mtcmod.extract_mtc(policy, compiled)

    if args.script:
        script_path = Path(args.script)
        raw = script_path.read_text(encoding="utf-8") if script_path.exists() else args.script
        chooser = sim.ScriptedChooser(json.loads(raw))
    elif args.interactive:
        chooser = sim.InteractiveChooser(_interactive_callback)
    elif args.adversarial:
        chooser = sim.AdversarialLowestChooser(problem)
    else:
        chooser = sim.RandomChooser(args.seed)

    trace = sim.run_session(problem, controller, args.ground_truth, chooser, args.steps)
    text = _dump(trace.to_doc())
    if args.out:
        _write(Path(args.out), text)
        print(f"terminal: {trace.terminal}; wrote trace to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port or int(os.environ.get("MTPLAN_PORT", "8000"))
    uvicorn.run(create_app(), host=args.host, port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("manifest", help="tier manifest JSON file")
        p.add_argument("--node-cap", type=int, default=solve.DEFAULT_NODE_CAP)
        if out_default is not None:
            p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("validate", help="check the multi-tier lattice invariants")
    p.add_argument("manifest")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="emit the dual-FOND encoding")
    common(p, out_default="out")
    p.add_argument("--flatten", action="store_true", help="no conditional effects in the output")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="synthesize a policy for the compiled problem")
    common(p, out_default="out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("extract", help="solve and project the multi-tier controller")
    common(p, out_default="out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="verify the extracted controller semantically")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run the controller against an environment")
    common(p)
    p.add_argument("--ground-truth", required=True, help="tier whose dynamics the environment follows")
    p.add_argument("--seed", type=int, default=0, help="seeded-random outcome choice")
    p.add_argument("--script", help="JSON list of branch indices (file path or inline)")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--adversarial", action="store_true", help="always pick the lowest-tier outcome")
    p.add_argument("--steps", type=int, default=sim.DEFAULT_STEP_CAP)
    p.add_argument("--out", help="trace output file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailedError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except StateSpaceBudgetError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CAP
    except (OSError, json.JSONDecodeError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO
    except IllegalSuccessorError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except MtplanError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
