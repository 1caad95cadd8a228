"""Command-line entry point: ``irsce run`` and ``irsce validate``."""
from __future__ import annotations

import argparse
import logging
import math
import sys

from ..config import PRESETS, ConfigError, load_config, make_config
from .experiment import noise_power
from .report import SWEEPS, run_sweep

log = logging.getLogger("irsce")


def _load(args):
    if args.config:
        cfg = load_config(args.config, preset=getattr(args, "preset", None))
    else:
        cfg = make_config(getattr(args, "preset", None) or "paper")
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(master_seed=args.seed)
    return cfg


def cmd_validate(args) -> int:
    cfg = _load(args)
    s2 = noise_power(cfg)
    print(f"config_hash     {cfg.config_hash()}")
    print(f"sigma_n2        {s2:.6e} W ({10 * math.log10(s2) + 30:.2f} dBm per subcarrier)")
    print(f"N_P             {cfg.n_pilots}")
    print(f"G_M             {cfg.grid_m[0] * cfg.grid_m[1]} ({cfg.grid_m[0]} x {cfg.grid_m[1]})")
    print(f"G_N             {cfg.grid_n[0] * cfg.grid_n[1]} ({cfg.grid_n[0]} x {cfg.grid_n[1]})")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    report = run_sweep(cfg, args.sweep, threads=args.threads,
                       progress=None if args.quiet else log.info)
    paths = report.write(args.out)
    print(paths[0])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irsce",
                                description="IRS-aided broadband channel estimation experiments")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one sweep and write the CSV report")
    r.add_argument("--config", help="TOML config file")
    r.add_argument("--preset", choices=sorted(PRESETS), help="base preset (overrides the file)")
    r.add_argument("--sweep", choices=SWEEPS, default="ptx")
    r.add_argument("--out", default="results")
    r.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a config and print derived quantities")
    v.add_argument("--config", required=True)
    v.add_argument("--preset", choices=sorted(PRESETS))
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
