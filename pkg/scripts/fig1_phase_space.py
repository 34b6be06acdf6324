"""Poincare sections and island fractions for KR and MKR at kappa = 3.5."""

import argparse
import json

from kickedrotor.experiment import RunConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/fig1")
    ap.add_argument("--kappa", type=float, default=3.5)
    ap.add_argument("--grid", type=int, default=30)
    ap.add_argument("--section-kicks", type=int, default=300)
    args = ap.parse_args()
    cfg = RunConfig(
        mode="phase-space",
        kappa=(args.kappa,),
        schedule=("kr", "mkr"),
        grid=args.grid,
        section_kicks=args.section_kicks,
        out=args.out,
    )
    manifest = run_experiment(cfg)
    print(json.dumps(manifest.to_dict(), indent=2))


if __name__ == "__main__":
    main()
