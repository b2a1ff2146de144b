"""Command-line entry point: ``spinfront run --config FILE`` and ``spinfront list``.

Exit status: 0 when every check passes, 2 when at least one check fails
(``failures.json`` lists them), 1 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError, SpinfrontError
from .scenarios import SCENARIOS, run_scenario, scenario_from_dict, write_manifest, write_summary

log = logging.getLogger("spinfront")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinfront", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a JSON config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--grid-n", type=int)
    run.add_argument("--delta", type=float)
    run.add_argument("--out", type=Path, help="output directory")

    sub.add_parser("list", help="print the scenario names")
    return parser


def _load(args) -> dict:
    try:
        return json.loads(args.config.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {args.config} is not valid JSON: {exc}") from exc


def cmd_run(args) -> int:
    try:
        scenario = scenario_from_dict(_load(args), {
            "epsilon": args.epsilon, "grid_n": args.grid_n,
            "delta": args.delta, "out": args.out,
        })
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    log.info("running %s into %s", scenario.name, scenario.output_dir)
    try:
        checks, artifacts = run_scenario(scenario)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpinfrontError as exc:
        # a numerical failure inside a pipeline is reported like a failed check
        failure = {"scenario": scenario.name, "error": type(exc).__name__, "message": str(exc)}
        (scenario.output_dir / "failures.json").write_text(json.dumps([failure], indent=2))
        print(f"{scenario.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED

    out = scenario.output_dir
    artifacts = [write_summary(checks, out / "summary.csv"), *artifacts]
    failed = [c for c in checks if not c.passed]
    if failed:
        rows = [{"name": c.name, "invariant": c.invariant, "measured": c.measured,
                 "bound": c.bound} for c in failed]
        path = out / "failures.json"
        path.write_text(json.dumps(rows, indent=2))
        artifacts.append(path)
    write_manifest(scenario, artifacts, out / "manifest.json")

    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  measured={c.measured:.6g}  bound {c.bound}")
    print(f"{scenario.name}: {len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for name in SCENARIOS:
            print(name)
        return EXIT_OK
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
