"""
Reference external target: runs a synthetic family as a separate process.

    python -m acpf.wrapper --family quadratic_valley [--seed N] PAYLOAD.json --x=0.3 --m=a

PAYLOAD.json holds ``{"features": [...]}``. Prints one ``ACPF_RESULT`` line.
"""
from __future__ import annotations

import argparse
import json
import sys

from .evaluation import SYNTHETIC_TARGETS


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="acpf.wrapper")
    p.add_argument("--family", required=True, choices=sorted(SYNTHETIC_TARGETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("payload")
    args, rest = p.parse_known_args(argv)
    cfg = {}
    for tok in rest:
        if not tok.startswith("--") or "=" not in tok:
            p.error(f"bad parameter argument {tok!r}")
        name, value = tok[2:].split("=", 1)
        try:
            cfg[name] = float(value)
        except ValueError:
            cfg[name] = value
    try:
        with open(args.payload) as fh:
            feats = json.load(fh)["features"]
        perf = SYNTHETIC_TARGETS[args.family](feats, cfg)
    except Exception as exc:
        print(f"wrapper error: {exc}", file=sys.stderr)
        print("ACPF_RESULT status=crashed perf=nan")
        return 1
    print(f"ACPF_RESULT status=ok perf={perf!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
