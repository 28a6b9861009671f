"""Command-line entry point: ``run``, ``validate``, ``sweep`` and ``info``.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
4 acceptance failure.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import io, simulation, validation
from .config import load_config
from .errors import BlowUpError, ConfigError, UsageError

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_ACCEPTANCE = 0, 2, 3, 4


def _parse_floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"--eps: expected a comma-separated list of numbers, got {text!r}") from None


def cmd_run(args):
    cfg = load_config(args.config)
    code, hist = simulation.run_simulation(cfg, args.out)
    out = args.out or cfg.output.directory
    print(f"{hist.status}: {len(hist.records)} records written to {out}")
    if hist.error:
        print(hist.error, file=sys.stderr)
    return code


def cmd_validate(args):
    only = {int(x) for x in args.only.split(",")} if args.only else None

    def report(res):
        print(res.line(), flush=True)

    results = validation.run_validation(only, report, capillary_sign=args.capillary_sign)
    doc = [r.as_dict() for r in results]
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    rows = simulation.sweep_epsilon(cfg, _parse_floats(args.eps), args.out)
    sys.stdout.write(simulation.format_sweep(rows))
    return EXIT_BLOWUP if any(r.status != "ok" for r in rows) else EXIT_OK


def cmd_info(args):
    phi, u, head = io.read_snapshot(args.snapshot)
    print(f"snapshot format version {head['version']}: d={head['d']} N={head['N']} "
          f"t={head['t']!r} eps={head['eps']!r}")
    print(f"phi range [{float(phi.min())!r}, {float(phi.max())!r}]")
    speed = np.sqrt(np.sum(u * u, axis=0))
    print(f"max |u| {float(speed.max())!r}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="torusflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress messages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration and write its outputs")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: output.directory)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--json", help="write the machine-readable report here")
    p.add_argument("--capillary-sign", type=float, default=1.0,
                   help="test hook: -1 flips the capillary force in every run")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run a configuration for several interface widths")
    p.add_argument("config")
    p.add_argument("--eps", required=True, help="comma-separated widths, e.g. 0.08,0.04,0.02")
    p.add_argument("--out", help="write per-width outputs under this directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("info", help="describe a snapshot file")
    p.add_argument("snapshot")
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
