"""Command-line front end.

    momentcrit run --spec state.yaml --witness all
    momentcrit suite classical-closure --seed 42 --count 200
    momentcrit grid --grid g2.yaml --witness antibunching --t 0 --tau 1
    momentcrit list

Exit codes: 0 all classical-consistent (or suite passed), 10 nonclassical,
20 entangled(NPT), 1 usage or validation error, 3 suite assertion failed.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import fock, report, suites
from .errors import MomentCritError
from .specio import load_grid, load_state
from .witnesses import registry
from .witnesses.twotime import w_antibunching, w_hyperbunching
from .witnesses.verdict import AGREE_REL, DEFAULT_TOL_REL


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(report.EXIT_USAGE, f"{self.prog}: error: {message}\n")


GRID_RUNNERS = {"antibunching": w_antibunching, "hyperbunching": w_hyperbunching}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="momentcrit", description="Moment-matrix nonclassicality and entanglement tests.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    r = sub.add_parser("run", help="evaluate witnesses on a state spec")
    r.add_argument("--spec", required=True, help="YAML state specification")
    r.add_argument("--witness", default="all",
                   help="comma-separated witness ids (parameters in brackets) or 'all'")
    r.add_argument("--pt-mode", type=int, default=0, help="transposed mode for entanglement witnesses")
    r.add_argument("--tol", type=float, default=DEFAULT_TOL_REL, help="relative tolerance")
    r.add_argument("--embed-matrices", action="store_true", help="include moment-matrix entries")
    common(r)

    s = sub.add_parser("suite", help="run a seeded property suite")
    s.add_argument("name", choices=suites.SUITES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--tol", type=float, default=None, help="relative tolerance override")
    common(s)

    g = sub.add_parser("grid", help="two-time correlation determinants on a sampled grid")
    g.add_argument("--grid", required=True, help="YAML correlation grid")
    g.add_argument("--witness", required=True,
                   help="antibunching or hyperbunching (optionally prefixed table1.)")
    g.add_argument("--t", type=float, required=True, dest="t")
    g.add_argument("--tau", type=float, required=True)
    g.add_argument("--tol", type=float, default=DEFAULT_TOL_REL)
    common(g)

    sub.add_parser("list", help="list witness ids")
    return p


def _tolerances(tol_rel: float) -> dict:
    return {"tol_rel": tol_rel, "agree_rel": AGREE_REL, "leakage_tol": fock.DEFAULT_LEAKAGE_TOL}


def cmd_run(args) -> tuple[dict, int]:
    loaded = load_state(args.spec)
    M = loaded.state.num_modes
    if args.witness.strip() == "all":
        refs = [e.witness_id for e in registry.applicable(M)]
    else:
        refs = registry.split_refs(args.witness)
        if not refs:
            raise UsageError("--witness is empty")
    for ref in refs:
        wid, _ = registry.parse_ref(ref)
        if wid in registry.GRID_WITNESSES:
            raise UsageError(f"{wid} works on correlation grids; use the grid subcommand")
        registry.get(wid)
    if not 0 <= args.pt_mode < M:
        raise UsageError(f"--pt-mode {args.pt_mode} outside 0..{M - 1}")
    verdicts = [(ref, registry.run(ref, loaded.state, tol_rel=args.tol, pt_mode=args.pt_mode)) for ref in refs]
    verdicts.sort(key=lambda t: (t[1].witness_id, t[0]))
    vs = [v for _, v in verdicts]
    body = {
        "results": [dict(report.verdict_record(v, args.embed_matrices), reference=ref) for ref, v in verdicts],
        "summary": report.summary(vs),
    }
    inp = {"state": loaded.describe(), "witnesses": refs, "pt_mode": args.pt_mode,
           "embed_matrices": bool(args.embed_matrices)}
    return report.document("run", input=inp, tolerances=_tolerances(args.tol), body=body), report.exit_code(vs)


def cmd_suite(args) -> tuple[dict, int]:
    if args.count < 1:
        raise UsageError(f"--count must be at least 1, got {args.count}")
    res = suites.run_suite(args.name, args.seed, args.count, args.tol)
    tol = args.tol if args.tol is not None else DEFAULT_TOL_REL
    inp = {"suite": args.name, "seed": args.seed, "count": args.count}
    doc = report.document("suite", input=inp, tolerances=_tolerances(tol), body=res.body())
    return doc, report.EXIT_OK if res.passed else report.EXIT_SUITE_FAILED


def cmd_grid(args) -> tuple[dict, int]:
    name = args.witness.removeprefix("table1.")
    if name not in GRID_RUNNERS:
        raise UsageError(f"unknown grid witness {args.witness!r}; choose antibunching or hyperbunching")
    grid, digest = load_grid(args.grid)
    v = GRID_RUNNERS[name](grid, args.t, args.tau, tol_rel=args.tol)
    inp = {"grid": {"source": args.grid, "digest": digest, "times": len(grid.times),
                    "taus": len(grid.taus), "stationary": grid.stationary},
           "witness": v.witness_id, "t": args.t, "tau": args.tau}
    body = {"results": [report.verdict_record(v)], "summary": report.summary([v])}
    return report.document("grid", input=inp, tolerances=_tolerances(args.tol), body=body), report.exit_code([v])


def cmd_list(args) -> tuple[dict, int]:
    rows = [{"witness_id": e.witness_id, "operator_set": e.operator_set, "threshold": e.threshold,
             "modes": [e.min_modes, e.max_modes], "parameters": e.defaults, "partial_transpose": e.uses_pt}
            for e in registry.REGISTRY.values()]
    rows += [{"witness_id": w, "operator_set": "two-time G2 grid", "threshold": "d < 0",
              "modes": None, "parameters": {"t": None, "tau": None}, "partial_transpose": False}
             for w in registry.GRID_WITNESSES]
    rows.sort(key=lambda r: r["witness_id"])
    return report.to_jsonable({"witnesses": rows}), report.EXIT_OK


COMMANDS = {"run": cmd_run, "suite": cmd_suite, "grid": cmd_grid, "list": cmd_list}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        doc, code = COMMANDS[args.command](args)
    except (UsageError, MomentCritError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"momentcrit: error: {msg}", file=sys.stderr)
        return report.EXIT_USAGE
    if getattr(args, "timing", False):
        doc["wall_clock_seconds"] = time.perf_counter() - t0
    text = report.dumps(doc)
    out = getattr(args, "out", None)
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            print(f"momentcrit: error: cannot write {out!r}: {exc.strerror}", file=sys.stderr)
            return report.EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
