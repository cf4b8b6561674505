"""Sweep the spin-3/2 probability space and summarise how far it reaches past the classical facets.

    python3 scripts/spin32_surface.py --directions 500 --out spin32.csv
"""
import argparse
import time

import numpy as np

from precess import observables as ob
from precess import probspace as ps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--directions", type=int, default=500)
    ap.add_argument("--out", default="spin32_surface.csv")
    ap.add_argument("--tol", type=float, default=ps.DEFAULT_RAY_TOL)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    pair = ob.make_spin(1.5)
    t0 = time.perf_counter()
    results = ps.sample_surface(pair, args.directions, tol=args.tol, threads=args.threads)
    ps.write_surface_csv(results, args.out)
    p3 = np.array([r.p3 for r in results])
    beyond = sum(ps.facet_distance(r.point) > 1e-9 for r in results)
    print(f"{len(results)} rays in {time.perf_counter() - t0:.1f}s, written to {args.out}")
    print(f"P3 range [{p3.min():.6f}, {p3.max():.6f}], max gap {max(r.gap for r in results):.1e}")
    print(f"{beyond} boundary points lie beyond a classical facet")


if __name__ == "__main__":
    main()
