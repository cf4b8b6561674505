"""Tabulate the maximum score of the four-level family against the general bound as x_-/x_+ grows."""
import argparse

import numpy as np

from precess import observables as ob
from precess import protocol as pr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=12)
    ap.add_argument("--max-ratio", type=float, default=100.0)
    args = ap.parse_args()
    print(f"{'ratio':>10} {'max P3':>14} {'bound':>14}")
    for ratio in np.geomspace(1.01, args.max_ratio, args.points):
        pair = ob.make_four_level(1.0, float(ratio))
        top = pr.max_p3(pair)[0]
        print(f"{ratio:10.4f} {top:14.10f} {pr.general_bound(pr.spectrum(pair)):14.10f}")


if __name__ == "__main__":
    main()
