"""``robust-qpke`` command line."""

from __future__ import annotations

import argparse
import sys

from .adversary import CATALOG_NAMES
from .harness import EXPERIMENTS, RunConfig, default_seed, load_config_file, run_cli


def _budget(text: str):
    if text == "full":
        return None
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError("budget must be non-negative or 'full'")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robust-qpke", description=__doc__)
    ap.add_argument("--config", help="key=value file; explicit flags take precedence")
    ap.add_argument("--experiment", choices=EXPERIMENTS)
    ap.add_argument("--scenario", choices=CATALOG_NAMES)
    ap.add_argument("--lambda", dest="lam", type=int)
    ap.add_argument("--preimage-bits", type=int)
    ap.add_argument("--owf-rounds", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--budget", type=_budget, default=argparse.SUPPRESS,
                    help="search budget, an integer or 'full'")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write the report here and the records to <out>.records")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    values = {}
    try:
        if args.config:
            raw = load_config_file(args.config)
            for key, text in raw.items():
                if key in ("experiment", "scenario", "out"):
                    values[key] = text
                elif key == "budget":
                    values[key] = _budget(text)
                else:
                    values[key] = int(text)
        for key in ("experiment", "scenario", "lam", "preimage_bits", "owf_rounds",
                    "trials", "seed", "out"):
            v = getattr(args, key)
            if v is not None:
                values[key] = v
        if "budget" in args:
            values["budget"] = args.budget
        values.setdefault("seed", default_seed())
        if "experiment" not in values:
            ap.error("--experiment is required")
        cfg = RunConfig(**values)
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        ap.error(str(exc))
    code, text = run_cli(cfg)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
