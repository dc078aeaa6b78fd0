"""Command line: run, oracle, replay and list-scenarios.

Exit codes: 0 confirmed agreement (or success), 2 no agreement, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from decimal import Decimal
from pathlib import Path
from typing import Sequence

from ..errors import MarketError, ScenarioInvalid
from .oracle import oracle_best_outcome
from .runner import run_scenario
from .scenario import bundled_scenarios, load_scenario, parse_scenario

EXIT_OK, EXIT_ERROR, EXIT_NO_AGREEMENT = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsag-market", description="Contract-aware cinema marketplace simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario end to end")
    run.add_argument("scenario", help="scenario file, or the name of a bundled scenario")
    run.add_argument("--seed", type=int)
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--deterministic", dest="deterministic", action="store_true", default=None)
    mode.add_argument("--concurrent", dest="deterministic", action="store_false", help="dispatch sessions on threads")
    run.add_argument("--out", type=Path, help="output directory (default runs/<scenario>-seed<N>)")

    orc = sub.add_parser("oracle", help="exhaustive best outcome for a scenario")
    orc.add_argument("scenario")
    orc.add_argument("--grid", type=Decimal, default=Decimal("0.5"))
    orc.add_argument("--seed", type=int)

    rep = sub.add_parser("replay", help="re-run a stored transcript's scenario and compare")
    rep.add_argument("transcript", type=Path)

    sub.add_parser("list-scenarios", help="show the bundled scenarios")
    return p


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    out = args.out or Path("runs") / f"{sc.name}-seed{seed}"
    res = run_scenario(sc, seed=seed, out_dir=out, deterministic=args.deterministic)
    print(json.dumps(res.summary(), indent=2))
    return EXIT_OK if res.confirmed else EXIT_NO_AGREEMENT


def _cmd_oracle(args) -> int:
    sc = load_scenario(args.scenario)
    r = oracle_best_outcome(sc, args.grid, seed=args.seed)
    print(json.dumps({
        "scenario": sc.name,
        "best_utility": str(r.best_utility),
        "best_provider": r.best_provider,
        "best_bindings": {k: str(v) if isinstance(v, Decimal) else v for k, v in sorted(r.best_bindings.items())},
        "points_checked": r.points_checked,
    }, indent=2))
    return EXIT_OK


def _cmd_replay(args) -> int:
    path: Path = args.transcript
    meta_path = path.parent / "run.json"
    if not path.exists() or not meta_path.exists():
        print(f"replay needs {path} and {meta_path}", file=sys.stderr)
        return EXIT_ERROR
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    sc = parse_scenario(meta["scenario"])
    with tempfile.TemporaryDirectory() as tmp:
        res = run_scenario(sc, seed=meta["seed"], out_dir=tmp, deterministic=meta["deterministic"])
        fresh = res.transcript_path.read_bytes()
    stored = path.read_bytes()
    if fresh == stored:
        print(f"replay identical: {len(stored.splitlines())} records")
        return EXIT_OK
    old, new = stored.splitlines(), fresh.splitlines()
    first = next((i for i, (a, b) in enumerate(zip(old, new)) if a != b), min(len(old), len(new)))
    print(f"replay differs at record {first + 1}", file=sys.stderr)
    return EXIT_ERROR


def _cmd_list(args) -> int:
    for name in bundled_scenarios():
        sc = load_scenario(name)
        print(f"{name}\t{sc.description}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "oracle": _cmd_oracle, "replay": _cmd_replay, "list-scenarios": _cmd_list}[args.command]
    try:
        return handler(args)
    except ScenarioInvalid as exc:
        for where, why in sorted(exc.diagnostics.items()):
            print(f"scenario invalid: {where or '<root>'}: {why}", file=sys.stderr)
        return EXIT_ERROR
    except MarketError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
