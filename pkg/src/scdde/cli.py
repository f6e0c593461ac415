"""Command line front end: selftest, PAPR runs, BER sweeps."""

from __future__ import annotations

import argparse
import sys

from . import harness


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scdde", description="SC-DDE link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("selftest", help="run the cross-module oracle suite")

    for name, help_text in (
        ("papr", "per-block PAPR samples for every configured curve"),
        ("ber", "BER sweep over the configured Es/N0 points"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", required=True, help="output CSV path")

    args = parser.parse_args(argv)

    if args.command == "selftest":
        return 0 if harness.selftest() else 1

    cfg = harness.parse_config(args.config)
    if args.command == "papr":
        records = harness.run_papr(cfg)
    else:
        records = harness.run_ber(cfg)
    harness.write_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
