#!/usr/bin/env python3
"""Measure how the first-order transition amplitude decays with lambda.

For the chosen family this fits the envelope of |A~^(1)(S)| against lambda
and the remainder left after subtracting the endpoint asymptotic formula.
Generic schedules should show exponents near -1 and -2 respectively; a
schedule whose couplings vanish at both endpoints (flat_endpoint_ramp) moves
the amplitude itself to the -2 class.

    python scripts/first_order_decay_study.py --family landau_zener_window
    python scripts/first_order_decay_study.py --family flat_endpoint_ramp \
        --lambdas 50,100,200,400,800 --csv decay.csv
"""

import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from adiabatic_jumps import (  # noqa: E402
    ModelSpec,
    asymptotic_residual_scan,
    first_order_decay_scan,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", default="landau_zener_window")
    parser.add_argument("--lambdas", default="50,100,200,400,800")
    parser.add_argument("--level", type=int, default=1)
    parser.add_argument("--window", type=float, default=0.1,
                        help="envelope window as a fraction of S")
    parser.add_argument("--csv", default=None, help="write per-point data here")
    args = parser.parse_args()

    lams = [float(x) for x in args.lambdas.split(",")]
    spec = ModelSpec(family=args.family)

    decay = first_order_decay_scan(spec, lams, level=args.level,
                                   window=args.window)
    residual = asymptotic_residual_scan(spec, lams, level=args.level,
                                        window=args.window)

    print(f"family: {args.family}, gamma = {decay.gamma:.4f}")
    print(f"{'lambda':>8}  {'|A1| envelope':>14}  {'bound margin':>13}  "
          f"{'asymptotic residual':>20}")
    for i, lam in enumerate(lams):
        print(f"{lam:8.0f}  {decay.magnitudes[i]:14.6e}  "
              f"{decay.bound_margins[i]:13.4e}  {residual.magnitudes[i]:20.6e}")
    print(f"amplitude fit:  exponent {decay.fit.exponent:+.3f}  "
          f"R^2 {decay.fit.r_squared:.5f}")
    print(f"residual fit:   exponent {residual.fit.exponent:+.3f}  "
          f"R^2 {residual.fit.r_squared:.5f}")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "amplitude_envelope", "bound_margin",
                             "asymptotic_residual"])
            for i, lam in enumerate(lams):
                writer.writerow([lam, decay.magnitudes[i],
                                 decay.bound_margins[i],
                                 residual.magnitudes[i]])
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
