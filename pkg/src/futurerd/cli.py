"""Command-line interface.

Subcommands: detect, verify, gen, stats. Exit codes: 0 = no race found,
1 = race(s) found, 2 = invalid input, 3 = verification divergence or an
internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import engine, generators, oracle, trace
from .errors import InputError, InvariantError, UsageError

EXIT_OK = 0
EXIT_RACES = 1
EXIT_BAD_INPUT = 2
EXIT_BROKEN = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="futurerd",
                                description="trace-driven race detection for futures")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="run race detection over a trace")
    d.add_argument("--algo", choices=[engine.ALGO_MULTIBAGS, engine.ALGO_PLUS], required=True)
    d.add_argument("--mode", choices=[trace.MODE_STRUCTURED, trace.MODE_GENERAL], required=True)
    d.add_argument("--trace", required=True, metavar="FILE")
    d.add_argument("--json", action="store_true", help="print the machine-readable report")
    d.add_argument("--stats", action="store_true", help="include run statistics")
    d.add_argument("--dump-dag", metavar="FILE.dot", help="write the strand dag as GraphViz")

    v = sub.add_parser("verify", help="check detector answers against the brute-force dag")
    v.add_argument("--algo", choices=[engine.ALGO_MULTIBAGS, engine.ALGO_PLUS], required=True)
    v.add_argument("--trace", required=True, metavar="FILE")
    v.add_argument("--sample", type=int, default=None, metavar="N")
    v.add_argument("--seed", type=int, default=0, metavar="S")

    g = sub.add_parser("gen", help="generate a trace")
    g.add_argument("family", choices=["lcs-structured", "lcs-general", "random"])
    g.add_argument("--n", type=int, default=4, help="blocks per side (lcs families)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--inject-race", action="store_true")
    g.add_argument("--events", type=int, default=200, help="event budget (random family)")
    g.add_argument("--p-spawn", type=float, default=0.15)
    g.add_argument("--p-create", type=float, default=0.10)
    g.add_argument("--p-get", type=float, default=0.08)
    g.add_argument("-o", "--out", required=True, metavar="FILE")

    s = sub.add_parser("stats", help="print trace counts without detection")
    s.add_argument("--trace", required=True, metavar="FILE")
    return p


def _cmd_detect(args) -> int:
    seq = trace.load(args.trace)
    report = engine.detect(seq, args.algo, args.mode)
    if args.dump_dag:
        with open(args.dump_dag, "w", encoding="utf-8") as fh:
            fh.write(oracle.to_dot(oracle.build(seq)))
    if args.json:
        print(report.to_json())
    else:
        if report.races:
            for r in report.races:
                print(f"race {r.kind} at 0x{r.addr:x}: strand {r.prior} vs strand {r.current}")
        print(f"{len(report.races)} race(s) found")
        if args.stats:
            for key, val in report.stats.to_json_dict().items():
                print(f"  {key}: {val}")
            print(f"  elapsed: {report.stats.elapsed:.6f}s")
    return EXIT_RACES if report.races else EXIT_OK


def _cmd_verify(args) -> int:
    seq = trace.load(args.trace)
    report = engine.verify(seq, args.algo, sample=args.sample, seed=args.seed)
    if report.divergence is not None:
        print(f"DIVERGENCE {report.divergence.describe()}", file=sys.stderr)
        return EXIT_BROKEN
    if not report.races_match:
        missing = report.oracle_races - report.detector_races
        extra = report.detector_races - report.oracle_races
        print(f"RACE SET MISMATCH missing={sorted(missing)} extra={sorted(extra)}",
              file=sys.stderr)
        return EXIT_BROKEN
    print(f"verified: {report.checked} reachability answers, "
          f"{len(report.oracle_races)} race(s), no divergence")
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.family == "lcs-structured":
        seq = generators.gen_lcs_structured(args.n, seed=args.seed, inject_race=args.inject_race)
    elif args.family == "lcs-general":
        seq = generators.gen_lcs_general(args.n, seed=args.seed, inject_race=args.inject_race)
    else:
        seq = generators.gen_random(
            n_events=args.events,
            p_spawn=args.p_spawn,
            p_create=args.p_create,
            p_get=args.p_get,
            seed=args.seed,
            inject_race=args.inject_race,
        )
    trace.dump(seq, args.out)
    print(f"wrote {len(seq)} events to {args.out}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    seq = trace.load(args.trace)
    print(json.dumps(engine.stats_only(seq), indent=2))
    return EXIT_OK


def run_cli(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "detect":
            return _cmd_detect(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "gen":
            return _cmd_gen(args)
        return _cmd_stats(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (InvariantError, UsageError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_BROKEN


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
