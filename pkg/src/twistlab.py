"""
twistlab command line: run experiments, re-verify distance certificates,
pretty-print maps and emit reference configs.

Exit codes: 0 success, 1 missing or unreadable input, 2 invalid config or map
text, 3 numerical failure, 4 certificate mismatch.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from enflo import DistanceEstimate, verify_estimate
from experiments import (SCHEMAS, ConfigError, NumericalFailure, demo_config, load_configs, run_batch,
                         run_experiment, write_atomic)
from maps import MapDimensionError, MapSyntaxError, parse_map, print_map
from spaces import euclidean

EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_MISMATCH = 4


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    p = argparse.ArgumentParser(prog="twistlab",
                                description="Finite-dimensional laboratory for twisted sums and extensions of normed spaces.")
    p.add_argument("--verbose", "-v", action="store_true", help="Log per-stage progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the experiment(s) of a TOML config file")
    run.add_argument("config", help="Path to the TOML config")

    verify = sub.add_parser("verify", help="Recompute the bounds stored in distance certificates")
    verify.add_argument("paths", nargs="+",
                        help="Certificate JSON files, or output directories whose cert_*.json files are checked")

    pm = sub.add_parser("print-map", help="Validate map text and print its canonical form")
    pm.add_argument("text", help="Map expression, e.g. 'sum(linear([[1,0],[0,1]]), scale(0.3, kp))'")
    pm.add_argument("--domain", type=int, default=2, help="Dimension of the Euclidean domain (default 2)")
    pm.add_argument("--codomain", type=int, default=None, help="Dimension of the Euclidean codomain (default: domain)")

    demo = sub.add_parser("demo", help="Emit a reference config for an experiment kind")
    demo.add_argument("kind", choices=sorted(SCHEMAS), help="Experiment kind")
    demo.add_argument("--output", "-o", default=None, help="Write the config to this file instead of stdout")
    return p.parse_args(argv)


def _fail(message: str, code: int):
    print(f"Error: {message}", file=sys.stderr)
    sys.exit(code)


def _certificate_files(paths: list[str]) -> list[Path]:
    files = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(path.glob("cert_*.json"))
            if not found:
                _fail(f"no cert_*.json files in {path}", EXIT_USAGE)
            files += found
        elif path.exists():
            files.append(path)
        else:
            _fail(f"certificate file does not exist: {path}", EXIT_USAGE)
    return files


def cmd_run(args) -> None:
    config_path = Path(args.config)
    if not config_path.exists():
        _fail(f"config file does not exist: {config_path}", EXIT_USAGE)
    try:
        configs = load_configs(config_path)
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            print(f"Error: {diagnostic}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)

    if len(configs) == 1:
        try:
            outcomes = [run_experiment(configs[0])]
        except NumericalFailure as e:
            outcomes = [e]
    else:
        try:
            outcomes = run_batch(configs)
        except ConfigError as e:
            _fail("; ".join(e.diagnostics), EXIT_CONFIG)

    failed = False
    for config, outcome in zip(configs, outcomes):
        if isinstance(outcome, NumericalFailure):
            failed = True
            print(f"Error: {config.label}: {outcome}", file=sys.stderr)
            print(json.dumps(outcome.report, indent=2, default=str), file=sys.stderr)
        else:
            print(f"Wrote results to {config.output_dir}", flush=True)
    if failed:
        sys.exit(EXIT_NUMERICAL)


def cmd_verify(args) -> None:
    mismatched = False
    for path in _certificate_files(args.paths):
        try:
            estimate = DistanceEstimate.from_json(json.loads(path.read_text(encoding="utf-8")))
            result = verify_estimate(estimate)
        except (OSError, KeyError, ValueError) as e:
            _fail(f"cannot read certificate {path}: {e}", EXIT_USAGE)
        for name, stored, recomputed in result.checks:
            status = "ok" if abs(stored - recomputed) <= 1e-12 else "MISMATCH"
            print(f"{path}: {name} stored={stored!r} recomputed={recomputed!r} {status}")
        if not result.passed:
            mismatched = True
    if mismatched:
        _fail("stored bounds do not match their certificates", EXIT_MISMATCH)


def cmd_print_map(args) -> None:
    codomain = args.domain if args.codomain is None else args.codomain
    if args.domain < 1 or codomain < 1:
        _fail("dimensions must be positive", EXIT_USAGE)
    try:
        h = parse_map(args.text, euclidean(args.domain), euclidean(codomain))
    except MapSyntaxError as e:
        print(f"  {args.text}\n  {' ' * e.position}^", file=sys.stderr)
        _fail(str(e), EXIT_CONFIG)
    except MapDimensionError as e:
        _fail(str(e), EXIT_CONFIG)
    print(print_map(h))
    print(f"{h.domain} -> {h.codomain}")


def cmd_demo(args) -> None:
    text = demo_config(args.kind)
    if args.output is None:
        print(text, end="")
        return
    write_atomic(Path(args.output), text)
    print(f"Wrote config to {args.output}")


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "print-map": cmd_print_map, "demo": cmd_demo}


def main(argv: list[str] | None = None):
    """
    Entry point. When called from the command line pass None so argparse reads
    sys.argv; tests pass an explicit argument list.
    """
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    COMMANDS[args.command](args)


if __name__ == "__main__":
    main()
