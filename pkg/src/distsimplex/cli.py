"""Command-line front end.

Exit codes:
  0  success
  1  I/O error (unreadable scenario, unwritable output)
  2  validation failure, unknown demo or unknown oracle suite
  3  run aborted on a non-finite state
  4  an oracle suite found counterexamples
"""
from __future__ import annotations

import argparse
import logging
import sys
from contextlib import ExitStack
from pathlib import Path

import yaml

from . import __version__, oracles
from .harness import SeriesWriter, SimulationAbort, TrajectoryWriter, run, write_summary
from .scenario import BUILTIN, Scenario, ScenarioError, builtin, load

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_ABORT = 3
EXIT_ORACLE = 4


def _err(msg: str) -> None:
    print(f"distsimplex: {msg}", file=sys.stderr)


def _execute(scn: Scenario, out_dir: Path, quiet: bool) -> int:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with ExitStack() as stack:
            sinks = []
            if scn.output.trajectory:
                fh = stack.enter_context(open(out_dir / scn.output.trajectory, "w", newline=""))
                sinks.append(TrajectoryWriter(fh))
            if scn.output.series:
                fh = stack.enter_context(open(out_dir / scn.output.series, "w", newline=""))
                sinks.append(SeriesWriter(fh, scn.n))
            try:
                summary = run(scn, sinks=sinks)
                code = EXIT_OK
            except SimulationAbort as exc:
                _err(f"run aborted at step {exc.step}: {exc}")
                summary = exc.summary
                code = EXIT_ABORT
            if scn.output.summary:
                with open(out_dir / scn.output.summary, "w") as fh:
                    write_summary(summary, fh)
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    if not quiet:
        yaml.safe_dump(summary.to_dict(), sys.stdout, sort_keys=False)
    return code


def cmd_run(path, overrides=(), out_dir=".", quiet=False, seed=None) -> int:
    try:
        ov = list(overrides or ())
        if seed is not None:
            ov.append(f"seed={int(seed)}")
        scn = load(path, ov)
    except OSError as exc:
        _err(f"cannot read scenario {path}: {exc}")
        return EXIT_IO
    except ScenarioError as exc:
        _err(f"invalid scenario {path}: {exc}")
        return EXIT_INVALID
    return _execute(scn, Path(out_dir), quiet)


def cmd_validate(path, overrides=()) -> int:
    try:
        scn = load(path, overrides)
    except OSError as exc:
        _err(f"cannot read scenario {path}: {exc}")
        return EXIT_IO
    except ScenarioError as exc:
        _err(f"invalid scenario {path}: {exc}")
        return EXIT_INVALID
    print(f"{path}: ok ({scn.n} agents, {scn.steps} steps)")
    return EXIT_OK


def cmd_demo(name, seed=None, overrides=(), out_dir=".", quiet=False) -> int:
    if name not in BUILTIN:
        _err(f"unknown demo {name!r}; valid names: {', '.join(BUILTIN)}")
        return EXIT_INVALID
    try:
        scn = builtin(name, seed, overrides)
    except ScenarioError as exc:
        _err(f"invalid demo configuration: {exc}")
        return EXIT_INVALID
    return _execute(scn, Path(out_dir), quiet)


def cmd_oracle(suite, seed=0, samples=None, quiet=False) -> int:
    names = list(oracles.SUITES) if suite == "all" else [suite]
    unknown = [n for n in names if n not in oracles.SUITES]
    if unknown:
        _err(f"unknown oracle suite {unknown[0]!r}; valid names: all, {', '.join(oracles.SUITES)}")
        return EXIT_INVALID
    code = EXIT_OK
    for name in names:
        kwargs = {"seed": seed}
        if samples is not None:
            kwargs["samples"] = samples
        res = oracles.run_suite(name, **kwargs)
        if not quiet or not res.passed:
            print(res.line())
        if not res.passed:
            code = EXIT_ORACLE
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for trajectory, summary and series files")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted override applied after parsing, e.g. limits.eta=0.05 (repeatable)")
    common.add_argument("--quiet", action="store_true", help="do not print the run summary")

    parser = argparse.ArgumentParser(prog="distsimplex", description="Distributed Simplex Architecture simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log switching and solver warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a scenario file")
    p.add_argument("path")
    p = sub.add_parser("validate", parents=[common], help="check a scenario file without running it")
    p.add_argument("path")
    p = sub.add_parser("demo", parents=[common], help="run a built-in scenario")
    p.add_argument("name", help=f"one of: {', '.join(BUILTIN)}")
    p = sub.add_parser("oracle", parents=[common], help="run a randomized verification suite")
    p.add_argument("suite", help=f"one of: all, {', '.join(oracles.SUITES)}")
    p.add_argument("--samples", type=int, default=None, help="override the suite's sample count")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "run":
        return cmd_run(args.path, args.overrides, args.out_dir, args.quiet, args.seed)
    if args.command == "validate":
        return cmd_validate(args.path, args.overrides)
    if args.command == "demo":
        return cmd_demo(args.name, args.seed, args.overrides, args.out_dir, args.quiet)
    return cmd_oracle(args.suite, args.seed or 0, args.samples, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
