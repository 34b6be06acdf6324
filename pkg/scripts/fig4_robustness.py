"""Extended-domain MKR run: Gaussian packet on [-256 pi, 256 pi), k = 33.

tau = 2 pi / (60 + golden ratio conjugate) keeps the free phase off every
rational resonance. The momentum grid is split into 256 residue classes of
2^16 indices each, enough for 1000 kicks; expect roughly half an hour on
one core.
"""

import argparse
import json
import math

from kickedrotor.experiment import RunConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/fig4")
    ap.add_argument("--kicks", type=int, default=1000)
    ap.add_argument("--basis", type=int, default=2**23)
    args = ap.parse_args()
    sigma = (math.sqrt(5) - 1) / 2
    cfg = RunConfig(
        mode="compare",
        k=(33.0,),
        tau=(2 * math.pi / (60 + sigma),),
        schedule=("mkr",),
        init="gaussian:9",
        boundary_mult=256,
        basis=args.basis,
        kicks=args.kicks,
        out=args.out,
    )
    manifest = run_experiment(cfg)
    print(json.dumps(manifest.reports, indent=2, default=str))


if __name__ == "__main__":
    main()
