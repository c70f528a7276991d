"""Command line entry point: run | sweep | accept | gen."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import acceptance, harness


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text: str) -> list[float]:
    return [float(eval_expr(t)) for t in text.split(",") if t.strip()]


def eval_expr(token: str) -> float:
    """Numbers, optionally written with ln2 (e.g. "2ln2")."""
    token = token.strip()
    if token.endswith("ln2"):
        head = token[:-3]
        return (float(head) if head else 1.0) * math.log(2)
    return float(token)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bicriteria", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one solver on one instance file")
    r.add_argument("--instance", required=True)
    r.add_argument("--solver", required=True, choices=sorted(harness.SOLVERS))
    r.add_argument("--epsilon", type=float, default=0.25)
    r.add_argument("--delta", type=float)
    r.add_argument("--horizon", type=float)
    r.add_argument("--step", type=float)
    r.add_argument("--samples", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--ell", type=int, default=2)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")

    s = sub.add_parser("sweep", help="value curve of the multi-optimum greedy")
    s.add_argument("--ell", default="2,3,4", help="comma list of l values")
    s.add_argument("--beta", default="0,0.25,0.5,1ln2,1,1.5,2ln2,2,3", help="comma list; 'ln2' suffix allowed")
    s.add_argument("--analytic-only", action="store_true")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    a = sub.add_parser("accept", help="run the acceptance criteria")
    a.add_argument("--only", help="comma list of criterion numbers; empty string selects none")

    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("kind", choices=("coverage", "modular", "cut", "dicut"))
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            spec = harness.InstanceSpec.from_json(Path(args.instance).read_text())
            params = harness.Params(args.epsilon, args.delta, args.horizon, args.step, args.samples, args.seed, args.ell)
            rec = harness.run(spec, args.solver, params)
            _emit(harness.write_records([rec], args.format), args.out)
            return 0
        if args.command == "sweep":
            ells = [int(v) for v in args.ell.split(",") if v.strip()]
            rows = harness.sweep_curve(ells, _floats(args.beta), empirical=not args.analytic_only)
            _emit(harness.write_sweep(rows, args.format), args.out)
            return 0
        if args.command == "accept":
            ok = True
            for k in acceptance.select(args.only):
                res = acceptance.CRITERIA[k]()
                print(res.line(), flush=True)
                ok &= res.passed
            return 0 if ok else 1
        if args.command == "gen":
            _emit(harness.generate(args.kind, args.n, args.seed).to_json(), args.out)
            return 0
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
