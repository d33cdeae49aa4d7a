"""``autohr <mode> [--config FILE] [--<field> VALUE ...]``

Every ExperimentConfig field is accepted as a flag (``--clip_length`` or
``--clip-length``); flags override the config file.
"""
from __future__ import annotations

import argparse
import logging
import sys

from autohr.harness.config import FIELD_TYPES, load_config, parse_value
from autohr.harness.pipeline import RUNNERS

ALIASES = {"results": ["--from"]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autohr", description="rPPG heart-rate pipeline")
    sub = parser.add_subparsers(dest="mode", metavar="MODE", required=True)
    for mode in RUNNERS:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("-v", "--verbose", action="store_true")
        for name in FIELD_TYPES:
            if name == "mode":
                continue
            flags = [f"--{name}"]
            if "_" in name:
                flags.append(f"--{name.replace('_', '-')}")
            flags += ALIASES.get(name, [])
            p.add_argument(*flags, dest=name, default=None, metavar=FIELD_TYPES[name].upper())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {"mode": args.mode}
        for name in FIELD_TYPES:
            raw = getattr(args, name, None)
            if name != "mode" and raw is not None:
                overrides[name] = parse_value(name, raw)
        config = load_config(args.config, overrides)
        result = RUNNERS[args.mode](config)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    except Exception as e:  # noqa: BLE001
        msg = " ".join(str(e).split()) or type(e).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1
    if isinstance(result, list):
        for r in result:
            print(r)
    else:
        print(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
