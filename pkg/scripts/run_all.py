"""Run registered scenarios and write CSV + JSON sidecars.

    python scripts/run_all.py --span ci --out results/
    python scripts/run_all.py fig2-kdv gray1 --span full
"""

import argparse
import logging
import time

from fourier_relax.experiments import SCENARIOS, IntegrationFailure, run_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", help="scenario names (default: all)")
    ap.add_argument("--span", choices=("ci", "full"), default="ci")
    ap.add_argument("--out", default="results")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)
    for name in args.names or list(SCENARIOS):
        t = time.perf_counter()
        try:
            res = run_scenario(name, args.span, out_dir=args.out, fmt=args.format)
        except IntegrationFailure as exc:
            print(f"{name:12s} FAILED  {exc}")
            continue
        s = res.summary
        print(f"{name:12s} {time.perf_counter() - t:7.1f}s  drift M {s['max_mass_drift']:.1e} "
              f"P {s['max_momentum_drift']:.1e} E {s['max_energy_drift']:.1e}  err {s['final_l2_error']:.2e}")


if __name__ == "__main__":
    main()
