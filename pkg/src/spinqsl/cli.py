"""Command line entry point: ``run``, ``validate`` and ``list-presets``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .scenario import FORMATS, PRESETS, ScenarioConfig, preset, run_scenario
from .validation import SUITES, run_suites


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinqsl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its outputs")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="JSON scenario file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--format", choices=FORMATS, help="file format (overrides the config)")

    val = sub.add_parser("validate", help="run self-check suites")
    val.add_argument("--suite", choices=SUITES + ("all",), default="all")
    val.add_argument("--spin", help="spin for the conservation suite, e.g. 3 or 3/2")
    val.add_argument("--k", type=float, help="elliptic modulus for the conservation suite")
    val.add_argument("--report", type=Path, help="also write the JSON report here")

    sub.add_parser("list-presets", help="print the built-in scenarios")
    return ap


def _cmd_run(args) -> int:
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        name = args.config.stem
    else:
        raw = preset(args.preset)
        name = args.preset
    if args.format:
        raw["format"] = args.format
    cfg = ScenarioConfig.from_dict(raw, name=name)
    manifest = run_scenario(cfg, out_dir=args.out or (cfg.out_dir if args.config else f"results/{name}"))
    print(json.dumps(manifest.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_validate(args) -> int:
    if (args.spin is not None or args.k is not None) and args.suite not in ("conservation", "all"):
        raise ConfigError("--spin and --k apply to the conservation suite")
    spin = args.spin
    if spin is None and args.k is not None:
        spin = 1
    results = run_suites(args.suite, spin=spin, k=args.k)
    failed = [r for r in results if r.status == "fail"]
    report = {"suite": args.suite, "passed": not failed,
              "counts": {s: sum(r.status == s for r in results)
                         for s in ("pass", "fail", "not_applicable")},
              "checks": [r.to_dict() for r in results]}
    text = json.dumps(report, indent=2)
    if args.report:
        args.report.write_text(text + "\n")
    print(text)
    return 1 if failed else 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        for name, cfg in PRESETS.items():
            print(f"{name}: S={cfg['spin']} outputs={','.join(cfg['outputs'])}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
