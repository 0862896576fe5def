"""Command-line front end: gen, solve, verify, bench.

Exit codes: 0 verified equilibrium (or successful gen/bench), 2 usage
error, 3 iteration/time limit reached, 4 result failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TIME_LIMIT,
    run_suite,
    solve_instance,
    write_csv,
)
from .driver import EQUILIBRIUM
from .games import gen_keg, gen_knapsack, gen_lot
from .games.io import dumps, from_json
from .model import JointDistribution, MixedStrategy, Profile
from .verify import verify_ce, verify_ne

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_LIMIT = 3
EXIT_UNVERIFIED = 4

SUITES = ("knapsack-2p", "knapsack-3p", "keg", "lotsizing", "ce-knapsack",
          "direct-pns")


def profile_to_json(profile: Profile) -> list:
    return [
        [{"values": [float(v) for v in s.values], "prob": float(w)}
         for s, w in mix.atoms]
        for mix in profile.players
    ]


def profile_from_json(game, data) -> Profile:
    players = []
    for p, atoms in enumerate(data):
        players.append(MixedStrategy(
            [(game.make_strategy(p, atom["values"]), atom["prob"]) for atom in atoms]
        ))
    return Profile(players)


def joint_to_json(joint: JointDistribution) -> list:
    return [
        {"cells": [[float(v) for v in s.values] for s in cells], "prob": float(w)}
        for cells, w in joint.atoms
    ]


def joint_from_json(game, data) -> JointDistribution:
    atoms = []
    for entry in data:
        cells = tuple(
            game.make_strategy(p, values) for p, values in enumerate(entry["cells"])
        )
        atoms.append((cells, entry["prob"]))
    return JointDistribution(atoms)


def _load(path: str):
    data = json.loads(Path(path).read_text())
    return from_json(data), data.get("game")


def cmd_gen(args) -> int:
    if args.game == "knapsack":
        if args.n is None or args.m is None:
            raise SystemExit("gen knapsack needs --n and --m")
        game = gen_knapsack(args.n, args.m, args.ins, args.seed)
    elif args.game == "keg":
        if args.vertices is None or args.density is None:
            raise SystemExit("gen keg needs --vertices and --density")
        game = gen_keg(args.vertices, args.density, args.ins, args.seed)
    elif args.game == "lotsizing":
        if args.m is None or args.T is None:
            raise SystemExit("gen lotsizing needs --m and --T")
        game = gen_lot(args.m, args.T, args.ins, args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit(f"unknown game {args.game!r}")
    Path(args.out).write_text(dumps(game))
    print(args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    game, kind = _load(args.instance)
    if args.method == "potential" and kind != "lotsizing":
        raise SystemExit("--method potential applies to lot-sizing instances only")
    record, profile, joint = solve_instance(
        game, kind, args.method,
        label=Path(args.instance).stem, size=kind, ins=0,
        epsilon=args.eps, max_iterations=args.max_iter,
        time_limit=args.time_limit,
    )
    payload = {"record": record.to_dict()}
    if profile is not None:
        payload["profile"] = profile_to_json(profile)
    if joint is not None:
        payload["joint"] = joint_to_json(joint)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if record.status != EQUILIBRIUM:
        return EXIT_LIMIT
    if not record.verified:
        return EXIT_UNVERIFIED
    return EXIT_OK


def cmd_verify(args) -> int:
    game, kind = _load(args.instance)
    payload = json.loads(Path(args.result).read_text())
    eps = args.eps
    if eps is None:
        eps = payload.get("record", {}).get(
            "epsilon", DEFAULT_EPSILON.get(kind, 0.0))
    if payload.get("joint"):
        report = verify_ce(game, joint_from_json(game, payload["joint"]), eps)
        what = "joint distribution"
    elif payload.get("profile"):
        report = verify_ne(game, profile_from_json(game, payload["profile"]), eps)
        what = "profile"
    else:
        raise SystemExit("result file holds neither a profile nor a joint distribution")
    for p, gap in enumerate(report.gaps):
        print(f"player {p}: payoff {report.current[p]:.9g}, "
              f"best response {report.best[p]:.9g}, gap {gap:.3g}")
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{what}: max gap {report.max_gap:.3g} vs eps {eps:g} -> {verdict}")
    return EXIT_OK if report.passed else EXIT_UNVERIFIED


def cmd_bench(args) -> int:
    records = run_suite(args.suite, seed=args.seed, jobs=args.jobs,
                        time_limit=args.time_limit)
    write_csv(records, args.out)
    verified = sum(1 for r in records if r.verified)
    print(f"{args.suite}: {len(records)} runs, {verified} verified -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipgames",
        description="Equilibrium computation for integer programming games.",
        epilog="Exit codes: 0 verified equilibrium; 2 usage error;"
               " 3 iteration or time limit; 4 verification failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance (JSON)")
    gen.add_argument("--game", required=True,
                     choices=("knapsack", "keg", "lotsizing"))
    gen.add_argument("--n", type=int, help="items per player (knapsack)")
    gen.add_argument("--m", type=int, help="number of players")
    gen.add_argument("--T", type=int, help="number of periods (lotsizing)")
    gen.add_argument("--vertices", type=int, help="vertex count (keg)")
    gen.add_argument("--density", type=float, help="arc probability (keg)")
    gen.add_argument("--ins", type=int, default=0, help="instance index 0..9")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("instance")
    solve.add_argument("--method", default="msgm",
                       choices=("sgm", "msgm", "ce", "potential", "oracle"))
    solve.add_argument("--eps", type=float, default=None,
                       help="deviation tolerance (default: per-game convention)")
    solve.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)
    solve.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    solve.add_argument("--out", help="result JSON path (default: stdout)")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="re-check a result file")
    verify.add_argument("instance")
    verify.add_argument("result")
    verify.add_argument("--eps", type=float, default=None)
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="run a benchmark suite to CSV")
    bench.add_argument("--suite", required=True, choices=SUITES)
    bench.add_argument("--out", required=True)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        raise
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
