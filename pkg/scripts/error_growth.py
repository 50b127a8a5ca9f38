"""Error growth slopes per conservation policy.

    python scripts/error_growth.py fig4-kdv2 --window 100 300
    python scripts/error_growth.py gray2 --policies full mass-energy --window 70 140
"""

import argparse

from fourier_relax.experiments import error_growth_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("scenario")
    ap.add_argument("--policies", nargs="+", default=["none", "mass-energy", "full"])
    ap.add_argument("--window", nargs=2, type=float, help="fit window in elapsed time")
    ap.add_argument("--span", choices=("ci", "full"), default="ci")
    args = ap.parse_args()
    study = error_growth_study(args.scenario, args.policies, tuple(args.window) if args.window else None, args.span)
    print(f"{study.scenario}: window {study.window}")
    for p in args.policies:
        flag = "" if study.flags[p] else "  (degenerate window)"
        err = study.results[p].summary["final_l2_error"]
        print(f"  {p:12s} slope {study.slopes[p]:6.2f}  final error {err:.3e}{flag}")


if __name__ == "__main__":
    main()
