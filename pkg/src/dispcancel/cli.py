"""Command-line entry point: ``dispcancel <scenario> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, NumericalGuardError
from .scenarios import SCENARIOS, _clean, load_config

log = logging.getLogger("dispcancel")

HELP = {
    "hbt": "intensity cross-correlation of the conjugate beam pair",
    "fields": "four intensity traces of one realization",
    "sweep": "zero-lag deficit over a (d1, d2) grid with quadratic fit",
    "pulse": "broadening of a short chaotic pulse pair vs the pair coincidence width",
    "identical-beams": "cross-correlation when beam 2 is a copy of beam 1",
    "quantum": "pair coincidence profile dump",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with scenario settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--modes", type=int, dest="n_modes")
    common.add_argument("--realizations", type=int, dest="n_realizations")
    common.add_argument("--d1", type=float, help="dimensionless dispersion of medium 1")
    common.add_argument("--d2", type=float, help="dimensionless dispersion of medium 2")
    common.add_argument("--lag-max", type=float, dest="lag_max")
    common.add_argument("--out-dir", default=".", help="directory for CSV/JSON outputs")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dispcancel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def overrides_from_args(args) -> dict:
    out = {}
    for key in ("seed", "n_modes", "n_realizations", "lag_max"):
        v = getattr(args, key)
        if v is not None:
            out[key] = v
    media = {k: getattr(args, k) for k in ("d1", "d2") if getattr(args, k) is not None}
    if media:
        out["media"] = media
    if args.scenario == "sweep" and args.n_realizations is not None:
        out["sweep"] = {"realizations": args.n_realizations}
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, overrides_from_args(args))
        log.info("running %s with seed %d", args.scenario, cfg.seed)
        summary = SCENARIOS[args.scenario](cfg, args.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    summary = {k: v for k, v in summary.items() if k != "config"}
    print(json.dumps(_clean(summary), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
