"""Run figure presets at a chosen scale and write results under results/<preset>/.

    python scripts/run_presets.py --realizations 20 fig-alpha fig-K
    python scripts/run_presets.py --all --realizations 500

Set OFDMA_ACKNAK_WORKERS to spread realizations over processes.
"""
import argparse
import sys
from pathlib import Path

from ofdma_acknak.cli import PRESETS, run_preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("presets", nargs="*", metavar="PRESET", help=", ".join(sorted(PRESETS)))
    ap.add_argument("--all", action="store_true")
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    ns = ap.parse_args()
    names = sorted(PRESETS) if ns.all else ns.presets
    if not names:
        ap.error("name at least one preset or pass --all")
    unknown = set(names) - set(PRESETS)
    if unknown:
        ap.error(f"unknown presets: {sorted(unknown)}")
    for name in names:
        out = Path(ns.out) / name
        summary = run_preset(name, out, {"realizations": ns.realizations, "seed": ns.seed},
                             log=lambda m: print(f"[{name}] {m}", file=sys.stderr))
        for pt in summary["points"]:
            row = "  ".join(f"{s}={v['mean']:.3f}" for s, v in pt["schemes"].items())
            print(f"{name} x={pt['x']}: {row}")


if __name__ == "__main__":
    main()
