"""Momentum distributions of KR and MKR after 3000 kicks and their ratio in the far band."""

import argparse
import json

from kickedrotor.experiment import RunConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/fig3")
    ap.add_argument("--kicks", type=int, default=3000)
    ap.add_argument("--band", default="8000:90000")
    args = ap.parse_args()
    lo, hi = (float(x) for x in args.band.split(":"))
    cfg = RunConfig(
        mode="distribution",
        kappa=(3.5,),
        tau=(0.1,),
        schedule=("kr", "mkr"),
        kicks=args.kicks,
        band=(lo, hi),
        out=args.out,
    )
    manifest = run_experiment(cfg)
    print(json.dumps(manifest.reports, indent=2, default=str))


if __name__ == "__main__":
    main()
