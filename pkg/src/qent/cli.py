"""Command-line front end.

Subcommands: ``qent validate <config.json>``, ``qent run <config.json>``,
``qent sweep <spec.json>``.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure.  The QENT_DIM_CAP environment variable
overrides the amplitude-count cap.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import validate_config_file, validate_sweep_file
from .errors import ConfigError, QentError
from .runner import run_experiment, run_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qent",
        description="Vacuum-subtracted region entropies of localized-particle states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="schema- and physics-check a config")
    p_val.add_argument("config", help="path to the experiment config JSON")

    p_run = sub.add_parser("run", help="run one experiment and write report files")
    p_run.add_argument("config", help="path to the experiment config JSON")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes (used by sweep)")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep and write CSV + summary")
    p_sweep.add_argument("spec", help="path to the sweep spec JSON")
    p_sweep.add_argument("--out", default=None, help="output directory override")
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            config = validate_config_file(args.config)
            print(json.dumps(config.data, indent=2, sort_keys=True))
        elif args.command == "run":
            config = validate_config_file(args.config)
            written = run_experiment(config, out_dir=args.out)
            for kind, path in sorted(written.items()):
                print(f"{kind}: {path}")
        else:
            spec = validate_sweep_file(args.spec)
            written = run_sweep(spec, out_dir=args.out, jobs=args.jobs)
            for kind, path in sorted(written.items()):
                print(f"{kind}: {path}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except QentError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
