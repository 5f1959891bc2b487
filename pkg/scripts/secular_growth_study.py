#!/usr/bin/env python3
"""Probe the long-duration growth of the second-order return amplitude.

At fixed lambda the order-2 amplitude of the initial level grows linearly
with the duration S (with size of order S * gamma^2 / lambda), which is the
mechanism that eventually spoils naive order-by-order truncation.  This
script sweeps S at fixed lambda and lambda at fixed S.

    python scripts/secular_growth_study.py
    python scripts/secular_growth_study.py --lam 200 --durations 5,10,20,40,80
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from adiabatic_jumps import (  # noqa: E402
    ModelSpec,
    secular_lambda_scan,
    secular_probe,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", default="rotated_frame")
    parser.add_argument("--lam", type=float, default=100.0)
    parser.add_argument("--durations", default="5,10,20,40")
    parser.add_argument("--lambdas", default="50,100,200,400,800")
    parser.add_argument("--fixed-S", type=float, default=10.0)
    args = parser.parse_args()

    spec = ModelSpec(family=args.family)
    durations = [float(x) for x in args.durations.split(",")]
    lams = [float(x) for x in args.lambdas.split(",")]

    vs_s = secular_probe(spec, args.lam, durations)
    print(f"family: {args.family}, lambda = {args.lam:g}, "
          f"gamma = {vs_s.gamma:.4f}")
    print(f"{'S':>8}  {'|A2(m0)|':>12}")
    for s, mag in zip(vs_s.axis, vs_s.magnitudes):
        print(f"{s:8.1f}  {mag:12.6e}")
    if vs_s.null_case:
        print("null case: no growth to fit")
    elif vs_s.fit is not None:
        print(f"fit vs S: exponent {vs_s.fit.exponent:+.3f}  "
              f"R^2 {vs_s.fit.r_squared:.5f}")
    for note in vs_s.notes:
        print(f"  note: {note}")

    vs_lam = secular_lambda_scan(spec, lams, duration=args.fixed_S)
    print(f"\nfixed S = {args.fixed_S:g}")
    print(f"{'lambda':>8}  {'|A2(m0)|':>12}")
    for lam, mag in zip(vs_lam.axis, vs_lam.magnitudes):
        print(f"{lam:8.0f}  {mag:12.6e}")
    if not vs_lam.null_case and vs_lam.fit is not None:
        print(f"fit vs lambda: exponent {vs_lam.fit.exponent:+.3f}  "
              f"R^2 {vs_lam.fit.r_squared:.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
